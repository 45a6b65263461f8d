#ifndef BRANCH_MODEL_IO_H
#define BRANCH_MODEL_IO_H

#include <string>
#include <vector>

#include "branch/branch_model.h"
#include "branch/characterize.h"
#include "branch/skeleton.h"

namespace branch
{
/// Ground-truth sidecar written next to every generated sample: the traits the
/// generator knows exactly, plus the base point and trunk axis that anchor the
/// measurements.
struct TraitSidecar
{
  TraitRecord traits;
  Vec3 base = Vec3::Zero();
  Vec3 trunk_axis = Vec3(0, 0, 1);
  double diameter_offset_m = 0.02;
};

/// One generated sample of a dataset manifest.
struct SampleEntry
{
  std::string id;
  uint64_t seed = 0;
  std::string partial_path;
  std::string complete_path;
  std::string skeleton_path;
  std::string traits_path;
  // filled once the completion pass has run
  std::string completed_path;
  std::string skeleton_est_path;
  std::string trace_path;
};

struct Manifest
{
  std::string dataset = "fb";
  uint64_t seed = 0;
  std::vector<SampleEntry> samples;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// Skeletons, branches and trees share one JSON schema:
// {version, spheres:[{c:[x,y,z], r}], taper:{angle_deg, min_r}, children:[...]}
void write_skeleton_json(const std::string &path, const Skeleton &skeleton);
Skeleton read_skeleton_json(const std::string &path);

void write_tree_json(const std::string &path, const TreeModel &tree);
TreeModel read_tree_json(const std::string &path);

void write_traits_json(const std::string &path, const TraitSidecar &sidecar);
TraitSidecar read_traits_json(const std::string &path);

void write_manifest(const std::string &path, const Manifest &manifest);
Manifest read_manifest(const std::string &path);

}  // namespace branch

#endif  // BRANCH_MODEL_IO_H
