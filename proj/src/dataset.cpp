#include "branch/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "branch/cloud_io.h"
#include "branch/errors.h"
#include "branch/rng.h"

namespace branch
{
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace
{
std::string sample_id(size_t index)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "b%04zu", index);
  return buf;
}

// a viewpoint safely outside the padded bounds, direction seeded per sample
Vec3 pick_viewpoint(const BranchModel &model, Rng &rng)
{
  Bounds b;
  const size_t probes = 64;
  for (size_t i = 0; i <= probes; i++)
  {
    const double s = model.length() * static_cast<double>(i) / probes;
    b.extend(model.centreline(s));
  }
  const double azimuth = rng.uniform(0.0, 2.0 * kPi);
  const double elevation = rng.uniform(deg2rad(-20.0), deg2rad(20.0));
  const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation));
  return b.centre() + dir * (1.5 * b.diagonal() + 1.0);
}

struct GeneratedSample
{
  BranchModel model;
  TraitSidecar sidecar;
};

TraitSidecar make_sidecar(const BranchModel &model, const std::string &id, const Vec3 &base,
                          const Vec3 &trunk_axis, double height, double diameter_offset)
{
  TraitSidecar sc;
  sc.traits.branch_id = id;
  sc.traits.diameter_mm = 2.0 * model.radius_at(diameter_offset) * 1000.0;
  sc.traits.angle_deg = rad2deg(std::acos(std::clamp(model.tangent(0.0).dot(trunk_axis.normalized()), -1.0, 1.0)));
  sc.traits.length_cm = model.length() * 100.0;
  sc.traits.attachment_height_m = height;
  sc.base = base;
  sc.trunk_axis = trunk_axis;
  sc.diameter_offset_m = diameter_offset;
  return sc;
}

// nb mode: harvest lateral branches from generated tree units until count is met
std::vector<GeneratedSample> nb_samples(const RunConfig &cfg)
{
  std::vector<GeneratedSample> out;
  size_t tree_index = 0;
  while (out.size() < cfg.dataset.count)
  {
    const uint64_t tree_seed = derive_seed(cfg.seed, "tree", tree_index);
    const TreeModel tree = generate_tree_unit(cfg.dataset.tree_params, tree_seed);
    for (const auto &att : tree.branches)
    {
      if (out.size() >= cfg.dataset.count)
        break;
      GeneratedSample gs{att.model, {}};
      const double s_att = att.attachment_t * tree.trunk.length();
      const Vec3 base = att.model.centreline(0.0);
      gs.sidecar = make_sidecar(att.model, sample_id(out.size()), base, tree.trunk.tangent(s_att),
                                base.z(), cfg.dataset.diameter_offset);
      out.push_back(std::move(gs));
    }
    tree_index++;
    if (tree_index > 4 * cfg.dataset.count + 8)
      throw InvalidParams("tree parameters produce no lateral branches");
  }
  return out;
}

std::vector<GeneratedSample> fb_samples(const RunConfig &cfg)
{
  std::vector<GeneratedSample> out(cfg.dataset.count);
  for (size_t i = 0; i < out.size(); i++)
  {
    const uint64_t seed = derive_seed(cfg.seed, "branch", i);
    out[i].model = generate_random_branch(cfg.dataset.branch_params, seed);
    out[i].model.set_id(sample_id(i));
    Rng rng(derive_seed(cfg.seed, "height", i));
    out[i].sidecar = make_sidecar(out[i].model, sample_id(i), out[i].model.centreline(0.0), Vec3(0, 0, 1),
                                  rng.uniform(0.5, 3.0), cfg.dataset.diameter_offset);
  }
  return out;
}
}  // namespace

Manifest run_generate(const RunConfig &cfg)
{
  if (cfg.dataset.count < 1)
    throw InvalidParams("dataset count must be positive");
  if (cfg.dataset.mode != "fb" && cfg.dataset.mode != "nb")
    throw InvalidParams("dataset mode must be fb or nb");
  if (cfg.dataset.occlusion_fraction < 0.0 || cfg.dataset.occlusion_fraction >= 1.0)
    throw InvalidParams("occlusion fraction must be in [0,1)");

  fs::create_directories(fs::path(cfg.out_dir) / "clouds");
  fs::create_directories(fs::path(cfg.out_dir) / "skeletons");
  fs::create_directories(fs::path(cfg.out_dir) / "traits");

  const std::vector<GeneratedSample> samples =
    cfg.dataset.mode == "fb" ? fb_samples(cfg) : nb_samples(cfg);

  Manifest manifest;
  manifest.dataset = cfg.dataset.mode;
  manifest.seed = cfg.seed;
  manifest.samples.resize(samples.size());

  const size_t partial_target =
    cfg.dataset.partial_count > 0
      ? cfg.dataset.partial_count
      : static_cast<size_t>(std::lround((1.0 - cfg.dataset.occlusion_fraction) *
                                        static_cast<double>(cfg.dataset.complete_count)));

  parallel_for(samples.size(), [&](size_t i) {
    const GeneratedSample &gs = samples[i];
    const std::string id = gs.sidecar.traits.branch_id;
    const uint64_t seed = derive_seed(cfg.seed, "sample", i);

    const Cloud complete = sample_complete(gs.model, cfg.dataset.complete_count,
                                           derive_seed(seed, "complete", 0));

    Rng view_rng(derive_seed(seed, "view", 0));
    ViewConfig view;
    view.viewpoint = pick_viewpoint(gs.model, view_rng);
    view.target_count = partial_target;
    view.grid_resolution = cfg.dataset.grid_resolution;
    Cloud partial = render_partial(gs.model, view, derive_seed(seed, "render", 0));

    if (cfg.dataset.gap_count > 0)
    {
      // gaps are discontinuities of the scan, so their centres are observed
      // points; the first one lands near the measurement station, the regime
      // where incompleteness breaks diameter estimation
      Rng gap_rng(derive_seed(seed, "gaps", 0));
      std::vector<double> foot(partial.size());
      constexpr int kStations = 200;
      std::vector<Vec3> stations(kStations + 1);
      for (int k = 0; k <= kStations; k++)
        stations[static_cast<size_t>(k)] = gs.model.centreline(gs.model.length() * k / kStations);
      for (size_t p = 0; p < partial.size(); p++)
      {
        double best = std::numeric_limits<double>::max();
        for (int k = 0; k <= kStations; k++)
        {
          const double d2 = (partial[p] - stations[static_cast<size_t>(k)]).squaredNorm();
          if (d2 < best)
          {
            best = d2;
            foot[p] = gs.model.length() * k / kStations;
          }
        }
      }
      auto pick_near = [&](double target_arc) {
        for (double tol = 0.01; ; tol *= 2.0)
        {
          std::vector<size_t> candidates;
          for (size_t p = 0; p < partial.size(); p++)
          {
            if (std::abs(foot[p] - target_arc) <= tol)
              candidates.push_back(p);
          }
          if (!candidates.empty())
            return partial[candidates[gap_rng.below(candidates.size())]];
          if (tol > gs.model.length())
            return partial[gap_rng.below(partial.size())];
        }
      };
      std::vector<Vec3> centres;
      for (size_t g = 0; g < cfg.dataset.gap_count; g++)
      {
        double target;
        if (g == 0 && cfg.dataset.gap_placement == "junction")
        {
          // the gap swallows the whole station slice while the attachment
          // collar below stays observable: its ring-kill halfwidth is
          // sqrt(g^2 - (2r)^2), so solve for the centre per branch
          const double r_hat = gs.model.radius_at(cfg.dataset.diameter_offset);
          const double wrap2 = cfg.dataset.gap_radius * cfg.dataset.gap_radius - 4.0 * r_hat * r_hat;
          if (wrap2 > 0.0)
            target = cfg.dataset.diameter_offset - r_hat - 0.005 + std::sqrt(wrap2) +
                     gap_rng.uniform(-cfg.dataset.junction_band, cfg.dataset.junction_band);
          else
            target = cfg.dataset.diameter_offset + 0.8 * cfg.dataset.gap_radius +
                     gap_rng.uniform(-cfg.dataset.junction_band, cfg.dataset.junction_band);
          target = std::clamp(target, 0.0, gs.model.length());
        }
        else
          target = gap_rng.uniform(0.2, 0.95) * gs.model.length();
        centres.push_back(pick_near(target));
      }
      const Cloud corrupted = corrupt_gaps(partial, centres, cfg.dataset.gap_radius);
      if (corrupted.size() >= 30)  // keep enough structure downstream
        partial = corrupted;
    }

    SampleEntry &entry = manifest.samples[i];
    entry.id = id;
    entry.seed = seed;
    entry.complete_path = (fs::path(cfg.out_dir) / "clouds" / (id + "_complete.ply")).string();
    entry.partial_path = (fs::path(cfg.out_dir) / "clouds" / (id + "_partial.ply")).string();
    entry.skeleton_path = (fs::path(cfg.out_dir) / "skeletons" / (id + ".json")).string();
    entry.traits_path = (fs::path(cfg.out_dir) / "traits" / (id + ".json")).string();

    write_cloud(entry.complete_path, complete);
    write_cloud(entry.partial_path, partial);
    write_skeleton_json(entry.skeleton_path, skeleton_of(gs.model, 100));
    write_traits_json(entry.traits_path, gs.sidecar);
  }, cfg.threads);

  // train/test split
  size_t train_count;
  const double exact = cfg.dataset.split_train_fraction * static_cast<double>(samples.size());
  if (cfg.dataset.split_rounding == "round")
    train_count = static_cast<size_t>(std::lround(exact));
  else if (cfg.dataset.split_rounding == "floor")
    train_count = static_cast<size_t>(std::floor(exact));
  else
    throw InvalidParams("split rounding must be floor or round");
  train_count = std::min(train_count, samples.size());
  for (size_t i = 0; i < samples.size(); i++)
  {
    if (i < train_count)
      manifest.train_ids.push_back(manifest.samples[i].id);
    else
      manifest.test_ids.push_back(manifest.samples[i].id);
  }

  write_manifest((fs::path(cfg.out_dir) / "manifest.json").string(), manifest);
  return manifest;
}

namespace
{
void write_trace_csv(const std::string &path, const std::vector<LossTraceRow> &trace)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path);
  out << "step,cd,rep,var,total\n";
  char buf[160];
  for (const auto &row : trace)
  {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g\n", row.step, row.cd, row.rep, row.var,
                  row.total);
    out << buf;
  }
}
}  // namespace

CompletionRun run_complete(const Manifest &manifest, const RunConfig &cfg)
{
  if (manifest.samples.empty())
    throw InvalidParams("manifest holds no samples");
  fs::create_directories(fs::path(cfg.out_dir) / "completed");

  CompletionRun run;
  run.manifest = manifest;
  run.summary.resize(manifest.samples.size());

  parallel_for(manifest.samples.size(), [&](size_t i) {
    SampleEntry &entry = run.manifest.samples[i];
    const Cloud partial = read_cloud(entry.partial_path);
    const Cloud complete = read_cloud(entry.complete_path);

    CompletionConfig ccfg = cfg.completion;
    ccfg.seed = derive_seed(entry.seed, "coarse", 0);
    const CompletionResult result = complete_cloud(partial, ccfg);

    entry.completed_path = (fs::path(cfg.out_dir) / "completed" / (entry.id + "_completed.ply")).string();
    entry.skeleton_est_path = (fs::path(cfg.out_dir) / "completed" / (entry.id + "_skeleton.json")).string();
    entry.trace_path = (fs::path(cfg.out_dir) / "completed" / (entry.id + "_trace.csv")).string();
    write_cloud(entry.completed_path, result.completed);
    write_skeleton_json(entry.skeleton_est_path, result.skeleton_est);
    write_trace_csv(entry.trace_path, result.loss_trace);

    run.summary[i].id = entry.id;
    run.summary[i].cd_l1_x1000 = 1000.0 * chamfer(result.completed, complete, ChamferNorm::L1).value;
  }, cfg.threads);

  double mean = 0.0;
  for (const auto &row : run.summary) mean += row.cd_l1_x1000;
  run.mean_cd_l1_x1000 = mean / static_cast<double>(run.summary.size());

  std::ofstream csv(fs::path(cfg.out_dir) / "cd_summary.csv");
  if (!csv)
    throw IoError("cannot write cd_summary.csv");
  csv << "id,cd_l1_x1000\n";
  char buf[96];
  for (const auto &row : run.summary)
  {
    std::snprintf(buf, sizeof(buf), "%s,%.12g\n", row.id.c_str(), row.cd_l1_x1000);
    csv << buf;
  }
  std::snprintf(buf, sizeof(buf), "mean,%.12g\n", run.mean_cd_l1_x1000);
  csv << buf;

  write_manifest((fs::path(cfg.out_dir) / "completed_manifest.json").string(), run.manifest);
  return run;
}

namespace
{
// diameter at the requested station when it holds data, otherwise at the
// nearest measurable station (field crews and QSM tools do the same when the
// exact height is unmeasurable)
double diameter_with_fallback(const Cloud &cloud, const Skeleton &skeleton, double offset)
{
  const double length = skeleton.polyline_length();
  const double step = std::max(skeleton.radius_at_arc(std::clamp(offset, 0.0, length)), 5e-3);
  for (int k = 0; k < 64; k++)
  {
    for (const double sign : {1.0, -1.0})
    {
      const double station = offset + sign * static_cast<double>(k) * step;
      if (station < 0.0 || station >= length)
        continue;
      try
      {
        return measure_diameter(cloud, skeleton, station);
      }
      catch (const TooSparse &)
      {
      }
      if (k == 0)
        break;  // the requested station itself has one try
    }
  }
  throw TooSparse("no measurable station on this branch");
}

std::optional<TraitRecord> characterize_cloud(const Cloud &cloud, const TraitSidecar &sidecar,
                                              const RunConfig &cfg)
{
  try
  {
    const size_t slices = std::max<size_t>(3, std::min(cfg.completion.slice_count, cloud.size() / 10));
    Skeleton est = estimate_skeleton(cloud, slices);
    est = orient_to_base(est, &sidecar.base);
    TraitRecord record;
    record.branch_id = sidecar.traits.branch_id;
    record.diameter_mm = diameter_with_fallback(cloud, est, sidecar.diameter_offset_m);
    record.angle_deg = measure_angle(est, sidecar.trunk_axis);
    record.length_cm = measure_length(est);
    record.attachment_height_m = sidecar.traits.attachment_height_m;
    return record;
  }
  catch (const BadInput &)
  {
    return std::nullopt;
  }
}

void append_rows(std::vector<ReportRow> &rows, const std::string &model, const std::string &dataset,
                 const std::vector<BranchEval> &branches, bool completed_side)
{
  std::vector<double> est_d, gt_d, est_a, gt_a, est_l, gt_l;
  for (const auto &b : branches)
  {
    // compare over the branches where both pipelines produced a measurement
    if (!b.raw.has_value() || !b.completed.has_value())
      continue;
    const TraitRecord &r = completed_side ? *b.completed : *b.raw;
    est_d.push_back(r.diameter_mm);
    gt_d.push_back(b.gt.diameter_mm);
    est_a.push_back(r.angle_deg);
    gt_a.push_back(b.gt.angle_deg);
    est_l.push_back(r.length_cm);
    gt_l.push_back(b.gt.length_cm);
  }
  if (est_d.empty())
    return;
  rows.push_back(ReportRow{model, dataset, "diameter", error_metrics(est_d, gt_d)});
  rows.push_back(ReportRow{model, dataset, "angle", error_metrics(est_a, gt_a)});
  rows.push_back(ReportRow{model, dataset, "length", error_metrics(est_l, gt_l)});
}

PruningPlan plan_for(const std::vector<TraitRecord> &traits, const RunConfig &cfg)
{
  return plan_pruning(traits, cfg.diameter_cutoff_cm, cfg.length_cutoff_cm);
}
}  // namespace

EvaluateResult run_evaluate(const Manifest &manifest, const RunConfig &cfg)
{
  if (manifest.samples.empty())
    throw InvalidParams("manifest holds no samples");

  EvaluateResult result;
  result.branches.resize(manifest.samples.size());
  const bool have_completed = !manifest.samples.front().completed_path.empty();

  parallel_for(manifest.samples.size(), [&](size_t i) {
    const SampleEntry &entry = manifest.samples[i];
    const TraitSidecar sidecar = read_traits_json(entry.traits_path);
    BranchEval &be = result.branches[i];
    be.id = entry.id;
    be.gt = sidecar.traits;
    be.raw = characterize_cloud(read_cloud(entry.partial_path), sidecar, cfg);
    if (!entry.completed_path.empty())
      be.completed = characterize_cloud(read_cloud(entry.completed_path), sidecar, cfg);
  }, cfg.threads);

  append_rows(result.rows, "raw", manifest.dataset, result.branches, false);
  if (have_completed)
    append_rows(result.rows, "completed", manifest.dataset, result.branches, true);

  // pruning plans over the measurable subsets, plus the ground-truth reference
  std::vector<TraitRecord> gt_traits, raw_traits, completed_traits;
  for (const auto &b : result.branches)
  {
    gt_traits.push_back(b.gt);
    if (b.raw.has_value())
      raw_traits.push_back(*b.raw);
    if (b.completed.has_value())
      completed_traits.push_back(*b.completed);
  }
  result.gt_plan = plan_for(gt_traits, cfg);
  if (!raw_traits.empty())
    result.raw_plan = plan_for(raw_traits, cfg);
  if (!completed_traits.empty())
    result.completed_plan = plan_for(completed_traits, cfg);

  // decision flips between the raw and the completed plan
  for (const auto &draw : result.raw_plan.decisions)
  {
    for (const auto &dcomp : result.completed_plan.decisions)
    {
      if (draw.branch_id == dcomp.branch_id && draw.action != dcomp.action)
      {
        result.decision_flips++;
        break;
      }
    }
  }
  return result;
}

void write_report_csv(const std::string &path, const std::vector<ReportRow> &rows)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path);
  out << "model,dataset,trait,mae,mape,rmse,n\n";
  char buf[192];
  for (const auto &r : rows)
  {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6g,%.6g,%.6g,%zu\n", r.model.c_str(), r.dataset.c_str(),
                  r.trait.c_str(), r.report.mae, r.report.mape, r.report.rmse, r.report.n);
    out << buf;
  }
}

std::string report_table(const std::vector<ReportRow> &rows)
{
  std::ostringstream out;
  out << "model      dataset  trait     MAE        MAPE(%)    RMSE       n\n";
  char buf[192];
  for (const auto &r : rows)
  {
    std::snprintf(buf, sizeof(buf), "%-10s %-8s %-9s %-10.4g %-10.4g %-10.4g %zu\n", r.model.c_str(),
                  r.dataset.c_str(), r.trait.c_str(), r.report.mae, r.report.mape, r.report.rmse,
                  r.report.n);
    out << buf;
  }
  out << "units: diameter mm, angle deg, length cm\n";
  return out.str();
}

namespace
{
// a synthetic display tree: vertical trunk, each sample branch attached at its
// recorded height; only for map rendering
TreeModel display_tree(const EvaluateResult &result, const Manifest &manifest)
{
  double top = 1.0;
  for (const auto &b : result.branches) top = std::max(top, b.gt.attachment_height_m + 0.5);
  std::vector<SkeletalSphere> trunk_spheres = {SkeletalSphere{Vec3(0, 0, 0), 0.04},
                                               SkeletalSphere{Vec3(0, 0, 0.5 * top), 0.04},
                                               SkeletalSphere{Vec3(0, 0, top), 0.04}};
  TreeModel tree;
  tree.trunk = fit_spline(trunk_spheres, -0.1, 0.02);
  tree.trunk.set_id("T");

  for (size_t i = 0; i < manifest.samples.size(); i++)
  {
    const Skeleton sk = read_skeleton_json(manifest.samples[i].skeleton_path);
    const double height = std::clamp(result.branches[i].gt.attachment_height_m, 0.0, top);
    const double theta = static_cast<double>(i) * 2.0 * kPi * 0.381966;
    const Vec3 base = tree.trunk.surface_point(height, theta);
    const Vec3 shift = base - sk.spheres.front().centre;
    std::vector<SkeletalSphere> moved = sk.spheres;
    for (auto &s : moved) s.centre += shift;
    BranchModel model = fit_spline(moved);
    model.set_id(manifest.samples[i].id);
    tree.branches.push_back(TreeModel::Attachment{std::move(model), height / tree.trunk.length()});
  }
  return tree;
}
}  // namespace

void write_evaluation_outputs(const EvaluateResult &result, const Manifest &manifest, const RunConfig &cfg)
{
  fs::create_directories(cfg.out_dir);
  write_report_csv((fs::path(cfg.out_dir) / "report.csv").string(), result.rows);
  {
    std::ofstream txt(fs::path(cfg.out_dir) / "report.txt");
    txt << report_table(result.rows);
  }

  const TreeModel tree = display_tree(result, manifest);
  if (!result.raw_plan.decisions.empty())
    emit_pruning_map(result.raw_plan, tree, (fs::path(cfg.out_dir) / "raw_map.svg").string(),
                     (fs::path(cfg.out_dir) / "raw_plan.json").string());
  if (!result.completed_plan.decisions.empty())
    emit_pruning_map(result.completed_plan, tree, (fs::path(cfg.out_dir) / "completed_map.svg").string(),
                     (fs::path(cfg.out_dir) / "completed_plan.json").string());

  Json flips;
  flips["decision_flips"] = result.decision_flips;
  Json detail = Json::array();
  for (const auto &draw : result.raw_plan.decisions)
  {
    for (const auto &dcomp : result.completed_plan.decisions)
    {
      if (draw.branch_id == dcomp.branch_id && draw.action != dcomp.action)
      {
        Json jflip;
        jflip["branch_id"] = draw.branch_id;
        jflip["raw"] = draw.action == PruneDecision::Action::Remove    ? "remove"
                   : draw.action == PruneDecision::Action::Shorten ? "shorten"
                                                                   : "keep";
        jflip["completed"] = dcomp.action == PruneDecision::Action::Remove    ? "remove"
                         : dcomp.action == PruneDecision::Action::Shorten ? "shorten"
                                                                          : "keep";
        detail.push_back(jflip);
        break;
      }
    }
  }
  flips["branches"] = detail;
  std::ofstream fj(fs::path(cfg.out_dir) / "flips.json");
  fj << flips.dump(2) << "\n";
}

namespace
{
template <class T>
void maybe(const Json &j, const char *key, T &value)
{
  if (j.contains(key))
    value = j.at(key).get<T>();
}
}  // namespace

RunConfig run_config_from_json(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path);
  Json j;
  try
  {
    j = Json::parse(in);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw IoError(path + ": " + e.what());
  }

  RunConfig cfg;
  maybe(j, "seed", cfg.seed);
  maybe(j, "out", cfg.out_dir);
  maybe(j, "threads", cfg.threads);
  maybe(j, "diameter_cutoff_cm", cfg.diameter_cutoff_cm);
  maybe(j, "length_cutoff_cm", cfg.length_cutoff_cm);
  if (j.contains("dataset"))
  {
    const Json &d = j.at("dataset");
    maybe(d, "count", cfg.dataset.count);
    maybe(d, "mode", cfg.dataset.mode);
    maybe(d, "complete_count", cfg.dataset.complete_count);
    maybe(d, "partial_count", cfg.dataset.partial_count);
    maybe(d, "occlusion_fraction", cfg.dataset.occlusion_fraction);
    maybe(d, "grid_resolution", cfg.dataset.grid_resolution);
    maybe(d, "gap_count", cfg.dataset.gap_count);
    maybe(d, "gap_radius", cfg.dataset.gap_radius);
    maybe(d, "gap_placement", cfg.dataset.gap_placement);
    maybe(d, "junction_band", cfg.dataset.junction_band);
    maybe(d, "split_train_fraction", cfg.dataset.split_train_fraction);
    maybe(d, "split_rounding", cfg.dataset.split_rounding);
    maybe(d, "diameter_offset", cfg.dataset.diameter_offset);
  }
  if (j.contains("completion"))
  {
    const Json &c = j.at("completion");
    maybe(c, "output_count", cfg.completion.output_count);
    maybe(c, "steps", cfg.completion.steps);
    maybe(c, "step_size", cfg.completion.step_size);
    maybe(c, "variance_activation_step", cfg.completion.variance_activation_step);
    maybe(c, "slice_count", cfg.completion.slice_count);
    maybe(c, "repulsion_k", cfg.completion.repulsion_k);
    maybe(c, "repulsion_h_fraction", cfg.completion.repulsion_h_fraction);
    maybe(c, "variance_skeleton_samples", cfg.completion.variance_skeleton_samples);
    if (c.contains("lambda_skeleton"))
      cfg.completion.weights.lambda_skeleton = c.at("lambda_skeleton").get<double>();
    if (c.contains("lambda_variance"))
      cfg.completion.weights.lambda_variance = c.at("lambda_variance").get<double>();
  }
  return cfg;
}

}  // namespace branch
