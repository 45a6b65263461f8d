#include "branch/model_io.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "branch/errors.h"

namespace branch
{
namespace
{
using Json = nlohmann::ordered_json;

Json load_json(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  try
  {
    return Json::parse(in);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw IoError(path + ": " + e.what());
  }
}

void save_json(const std::string &path, const Json &j)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Json vec_to_json(const Vec3 &v) { return Json::array({v[0], v[1], v[2]}); }

Vec3 vec_from_json(const Json &j)
{
  if (!j.is_array() || j.size() != 3)
    throw IoError("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json spheres_to_json(const std::vector<SkeletalSphere> &spheres)
{
  Json arr = Json::array();
  for (const auto &s : spheres) arr.push_back(Json{{"c", vec_to_json(s.centre)}, {"r", s.radius}});
  return arr;
}

std::vector<SkeletalSphere> spheres_from_json(const Json &arr)
{
  std::vector<SkeletalSphere> spheres;
  for (const auto &js : arr)
    spheres.push_back(SkeletalSphere{vec_from_json(js.at("c")), js.at("r").get<double>()});
  return spheres;
}

// control points with the taper radius at their arc stations
Json branch_to_json(const BranchModel &model)
{
  Json j;
  j["id"] = model.id();
  std::vector<SkeletalSphere> spheres;
  const auto &points = model.spline().control_points();
  for (size_t i = 0; i < points.size(); i++)
    spheres.push_back(SkeletalSphere{points[i], model.radius_at(model.spline().arc_at_control(i))});
  j["spheres"] = spheres_to_json(spheres);
  j["taper"] = Json{{"angle_deg", model.taper().taper_angle_deg}, {"min_r", model.taper().min_radius}};
  return j;
}

BranchModel branch_from_json(const Json &j)
{
  const auto spheres = spheres_from_json(j.at("spheres"));
  const double angle = j.at("taper").at("angle_deg").get<double>();
  const double min_r = j.at("taper").at("min_r").get<double>();
  BranchModel model = fit_spline(spheres, angle, min_r);
  if (j.contains("id"))
    model.set_id(j.at("id").get<std::string>());
  return model;
}
}  // namespace

void write_skeleton_json(const std::string &path, const Skeleton &skeleton)
{
  Json j;
  j["version"] = 1;
  j["spheres"] = spheres_to_json(skeleton.spheres);
  save_json(path, j);
}

Skeleton read_skeleton_json(const std::string &path)
{
  const Json j = load_json(path);
  Skeleton skeleton;
  skeleton.spheres = spheres_from_json(j.at("spheres"));
  return skeleton;
}

void write_tree_json(const std::string &path, const TreeModel &tree)
{
  Json j = branch_to_json(tree.trunk);
  j["version"] = 1;
  j["provenance"] = Json{{"kind", tree.provenance.kind == Provenance::TreeUnit ? "tree_unit" : "skeleton"},
                         {"seed", tree.provenance.seed}};
  Json children = Json::array();
  for (const auto &b : tree.branches)
  {
    Json jc = branch_to_json(b.model);
    jc["attachment_t"] = b.attachment_t;
    children.push_back(jc);
  }
  j["children"] = children;
  save_json(path, j);
}

TreeModel read_tree_json(const std::string &path)
{
  const Json j = load_json(path);
  TreeModel tree;
  tree.trunk = branch_from_json(j);
  if (j.contains("provenance"))
  {
    tree.provenance.kind =
      j.at("provenance").at("kind").get<std::string>() == "tree_unit" ? Provenance::TreeUnit : Provenance::FromSkeleton;
    tree.provenance.seed = j.at("provenance").at("seed").get<uint64_t>();
  }
  if (j.contains("children"))
  {
    for (const auto &jc : j.at("children"))
      tree.branches.push_back(TreeModel::Attachment{branch_from_json(jc), jc.at("attachment_t").get<double>()});
  }
  return tree;
}

void write_traits_json(const std::string &path, const TraitSidecar &sidecar)
{
  Json j;
  j["version"] = 1;
  j["branch_id"] = sidecar.traits.branch_id;
  j["diameter_mm"] = sidecar.traits.diameter_mm;
  j["angle_deg"] = sidecar.traits.angle_deg;
  j["length_cm"] = sidecar.traits.length_cm;
  j["height_m"] = sidecar.traits.attachment_height_m;
  j["base"] = vec_to_json(sidecar.base);
  j["trunk_axis"] = vec_to_json(sidecar.trunk_axis);
  j["diameter_offset_m"] = sidecar.diameter_offset_m;
  save_json(path, j);
}

TraitSidecar read_traits_json(const std::string &path)
{
  const Json j = load_json(path);
  TraitSidecar s;
  s.traits.branch_id = j.at("branch_id").get<std::string>();
  s.traits.diameter_mm = j.at("diameter_mm").get<double>();
  s.traits.angle_deg = j.at("angle_deg").get<double>();
  s.traits.length_cm = j.at("length_cm").get<double>();
  s.traits.attachment_height_m = j.at("height_m").get<double>();
  s.base = vec_from_json(j.at("base"));
  s.trunk_axis = vec_from_json(j.at("trunk_axis"));
  s.diameter_offset_m = j.at("diameter_offset_m").get<double>();
  return s;
}

void write_manifest(const std::string &path, const Manifest &manifest)
{
  Json j;
  j["version"] = 1;
  j["dataset"] = manifest.dataset;
  j["seed"] = manifest.seed;
  Json samples = Json::array();
  for (const auto &s : manifest.samples)
  {
    Json js;
    js["id"] = s.id;
    js["seed"] = s.seed;
    js["partial"] = s.partial_path;
    js["complete"] = s.complete_path;
    js["skeleton"] = s.skeleton_path;
    js["traits"] = s.traits_path;
    if (!s.completed_path.empty())
    {
      js["completed"] = s.completed_path;
      js["skeleton_est"] = s.skeleton_est_path;
      js["trace"] = s.trace_path;
    }
    samples.push_back(js);
  }
  j["samples"] = samples;
  j["split"] = Json{{"train", manifest.train_ids}, {"test", manifest.test_ids}};
  save_json(path, j);
}

Manifest read_manifest(const std::string &path)
{
  const Json j = load_json(path);
  Manifest m;
  m.dataset = j.at("dataset").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  for (const auto &js : j.at("samples"))
  {
    SampleEntry s;
    s.id = js.at("id").get<std::string>();
    s.seed = js.at("seed").get<uint64_t>();
    s.partial_path = js.at("partial").get<std::string>();
    s.complete_path = js.at("complete").get<std::string>();
    s.skeleton_path = js.at("skeleton").get<std::string>();
    s.traits_path = js.at("traits").get<std::string>();
    if (js.contains("completed"))
    {
      s.completed_path = js.at("completed").get<std::string>();
      s.skeleton_est_path = js.at("skeleton_est").get<std::string>();
      s.trace_path = js.at("trace").get<std::string>();
    }
    m.samples.push_back(s);
  }
  if (j.contains("split"))
  {
    m.train_ids = j.at("split").at("train").get<std::vector<std::string>>();
    m.test_ids = j.at("split").at("test").get<std::vector<std::string>>();
  }
  return m;
}

}  // namespace branch
