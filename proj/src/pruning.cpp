#include "branch/pruning.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "branch/errors.h"

namespace branch
{
PruningPlan plan_pruning(const std::vector<TraitRecord> &traits, double diameter_cutoff_cm,
                         double length_cutoff_cm)
{
  if (traits.empty())
    throw InvalidParams("pruning needs at least one branch");
  std::set<std::string> seen;
  for (const auto &t : traits)
  {
    if (!seen.insert(t.branch_id).second)
      throw DuplicateBranchId("duplicate branch id: " + t.branch_id);
  }

  PruningPlan plan;
  plan.diameter_cutoff_cm = diameter_cutoff_cm;
  plan.length_cutoff_cm = length_cutoff_cm;
  plan.decisions.resize(traits.size());

  // targets: diameter strictly exceeding the cutoff
  const double cutoff_mm = diameter_cutoff_cm * 10.0;
  std::vector<size_t> targets;
  for (size_t i = 0; i < traits.size(); i++)
  {
    if (traits[i].diameter_mm > cutoff_mm)
      targets.push_back(i);
  }

  // the largest target goes first, the rest by attachment height descending
  if (!targets.empty())
  {
    const size_t largest = *std::min_element(targets.begin(), targets.end(), [&](size_t a, size_t b) {
      if (traits[a].diameter_mm != traits[b].diameter_mm)
        return traits[a].diameter_mm > traits[b].diameter_mm;
      return traits[a].branch_id < traits[b].branch_id;
    });
    std::vector<size_t> rest;
    for (const size_t i : targets)
    {
      if (i != largest)
        rest.push_back(i);
    }
    std::sort(rest.begin(), rest.end(), [&](size_t a, size_t b) {
      if (traits[a].attachment_height_m != traits[b].attachment_height_m)
        return traits[a].attachment_height_m > traits[b].attachment_height_m;
      return traits[a].branch_id < traits[b].branch_id;
    });
    int order = 1;
    auto mark_removal = [&](size_t i) {
      PruneDecision &d = plan.decisions[i];
      d.branch_id = traits[i].branch_id;
      d.action = PruneDecision::Action::Remove;
      d.rule = PruneDecision::Rule::DiameterRule;
      d.order = order++;
    };
    mark_removal(largest);
    for (const size_t i : rest) mark_removal(i);
  }

  for (size_t i = 0; i < traits.size(); i++)
  {
    PruneDecision &d = plan.decisions[i];
    if (d.order.has_value())
      continue;
    d.branch_id = traits[i].branch_id;
    if (traits[i].length_cm > length_cutoff_cm)
    {
      d.action = PruneDecision::Action::Shorten;
      d.rule = PruneDecision::Rule::LengthRule;
      d.shorten_to_cm = length_cutoff_cm;
    }
    else
    {
      d.action = PruneDecision::Action::Keep;
      d.rule = PruneDecision::Rule::None;
    }
  }
  return plan;
}

namespace
{
const char *action_name(PruneDecision::Action a)
{
  switch (a)
  {
  case PruneDecision::Action::Remove: return "remove";
  case PruneDecision::Action::Shorten: return "shorten";
  default: return "keep";
  }
}
const char *rule_name(PruneDecision::Rule r)
{
  switch (r)
  {
  case PruneDecision::Rule::DiameterRule: return "diameter";
  case PruneDecision::Rule::LengthRule: return "length";
  default: return "none";
  }
}
PruneDecision::Action action_from(const std::string &s)
{
  if (s == "remove")
    return PruneDecision::Action::Remove;
  if (s == "shorten")
    return PruneDecision::Action::Shorten;
  if (s == "keep")
    return PruneDecision::Action::Keep;
  throw IoError("unknown pruning action: " + s);
}
PruneDecision::Rule rule_from(const std::string &s)
{
  if (s == "diameter")
    return PruneDecision::Rule::DiameterRule;
  if (s == "length")
    return PruneDecision::Rule::LengthRule;
  if (s == "none")
    return PruneDecision::Rule::None;
  throw IoError("unknown pruning rule: " + s);
}
}  // namespace

std::string plan_to_json(const PruningPlan &plan)
{
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["thresholds"] = {{"diameter_cutoff_cm", plan.diameter_cutoff_cm},
                     {"length_cutoff_cm", plan.length_cutoff_cm}};
  j["decisions"] = nlohmann::ordered_json::array();
  for (const auto &d : plan.decisions)
  {
    nlohmann::ordered_json jd;
    jd["branch_id"] = d.branch_id;
    jd["action"] = action_name(d.action);
    jd["rule"] = rule_name(d.rule);
    if (d.order.has_value())
      jd["order"] = *d.order;
    if (d.action == PruneDecision::Action::Shorten)
      jd["shorten_to_cm"] = d.shorten_to_cm;
    j["decisions"].push_back(jd);
  }
  return j.dump(2);
}

PruningPlan plan_from_json(const std::string &json_text)
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(json_text);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw IoError(std::string("bad pruning plan JSON: ") + e.what());
  }
  PruningPlan plan;
  plan.diameter_cutoff_cm = j.at("thresholds").at("diameter_cutoff_cm").get<double>();
  plan.length_cutoff_cm = j.at("thresholds").at("length_cutoff_cm").get<double>();
  for (const auto &jd : j.at("decisions"))
  {
    PruneDecision d;
    d.branch_id = jd.at("branch_id").get<std::string>();
    d.action = action_from(jd.at("action").get<std::string>());
    d.rule = rule_from(jd.at("rule").get<std::string>());
    if (jd.contains("order"))
      d.order = jd.at("order").get<int>();
    if (jd.contains("shorten_to_cm"))
      d.shorten_to_cm = jd.at("shorten_to_cm").get<double>();
    plan.decisions.push_back(d);
  }
  return plan;
}

namespace
{
std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}
}  // namespace

void emit_pruning_map(const PruningPlan &plan, const TreeModel &tree, const std::string &svg_path,
                      const std::string &json_path)
{
  std::set<std::string> tree_ids;
  for (const auto &b : tree.branches) tree_ids.insert(b.model.id());
  for (const auto &d : plan.decisions)
  {
    if (!tree_ids.count(d.branch_id))
      throw UnknownBranchId("plan names unknown branch: " + d.branch_id);
  }

  auto decision_of = [&](const std::string &id) -> const PruneDecision * {
    for (const auto &d : plan.decisions)
    {
      if (d.branch_id == id)
        return &d;
    }
    return nullptr;
  };

  // side view: world (x, z) onto the page
  struct Poly
  {
    std::vector<Eigen::Vector2d> pts;
    std::string colour;
    std::string label;
  };
  auto sample = [](const BranchModel &m) {
    std::vector<Eigen::Vector2d> pts;
    constexpr int kSamples = 24;
    for (int i = 0; i <= kSamples; i++)
    {
      const Vec3 p = m.centreline(m.length() * i / kSamples);
      pts.emplace_back(p.x(), p.z());
    }
    return pts;
  };

  std::vector<Poly> polys;
  polys.push_back(Poly{sample(tree.trunk), "#6b4f2a", ""});
  std::vector<std::pair<int, std::string>> legend;
  for (const auto &b : tree.branches)
  {
    const PruneDecision *d = decision_of(b.model.id());
    Poly poly;
    poly.pts = sample(b.model);
    if (!d)
      poly.colour = "#999999";
    else if (d->action == PruneDecision::Action::Remove)
    {
      poly.colour = "#d62728";
      poly.label = std::to_string(*d->order);
      legend.emplace_back(*d->order, d->branch_id);
    }
    else if (d->action == PruneDecision::Action::Shorten)
      poly.colour = "#ff8c00";
    else
      poly.colour = "#2e8b57";
    polys.push_back(std::move(poly));
  }
  std::sort(legend.begin(), legend.end());

  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto &poly : polys)
  {
    for (const auto &p : poly.pts)
    {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  const double span = std::max((hi - lo).maxCoeff(), 1e-6);
  const double scale = 640.0 / span;
  const double pad = 60.0;
  const double width = (hi.x() - lo.x()) * scale + 2 * pad;
  const double height = (hi.y() - lo.y()) * scale + 2 * pad;
  auto to_page = [&](const Eigen::Vector2d &p) {
    return Eigen::Vector2d(pad + (p.x() - lo.x()) * scale, height - pad - (p.y() - lo.y()) * scale);
  };

  std::ofstream svg(svg_path);
  if (!svg)
    throw IoError("cannot write " + svg_path);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t i = 0; i < polys.size(); i++)
  {
    const auto &poly = polys[i];
    svg << "<polyline fill=\"none\" stroke=\"" << poly.colour << "\" stroke-width=\""
        << (i == 0 ? "5" : "3") << "\" points=\"";
    for (const auto &p : poly.pts)
    {
      const auto q = to_page(p);
      svg << fmt(q.x()) << "," << fmt(q.y()) << " ";
    }
    svg << "\"/>\n";
    if (!poly.label.empty())
    {
      const auto q = to_page(poly.pts[poly.pts.size() / 2]);
      svg << "<text x=\"" << fmt(q.x() + 4) << "\" y=\"" << fmt(q.y() - 4)
          << "\" font-size=\"14\" fill=\"#d62728\">" << poly.label << "</text>\n";
    }
  }
  // legend: removal order, ascending top to bottom
  double legend_y = 20.0;
  svg << "<text x=\"10\" y=\"" << fmt(legend_y) << "\" font-size=\"13\" fill=\"black\">removal order</text>\n";
  for (const auto &[order, id] : legend)
  {
    legend_y += 16.0;
    svg << "<text x=\"10\" y=\"" << fmt(legend_y) << "\" font-size=\"13\" fill=\"#d62728\">" << order
        << ". " << id << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream json_file(json_path);
  if (!json_file)
    throw IoError("cannot write " + json_path);
  json_file << plan_to_json(plan) << "\n";
}

}  // namespace branch
