#ifndef BRANCH_SYNTH_H
#define BRANCH_SYNTH_H

#include <vector>

#include "branch/branch_model.h"
#include "branch/maths.h"

namespace branch
{
/// Virtual scanner setup for partial-view sampling. Rays go from the viewpoint
/// through a grid spanning the model's projected extent; only first hits are kept.
struct ViewConfig
{
  Vec3 viewpoint = Vec3(2, 0, 0.5);
  size_t target_count = 2048;
  int grid_resolution = 256;  // rays per image axis
};

/// Depth back-projection: casts a ray grid from the viewpoint, keeps the first
/// tube intersection per ray, then subsamples or pads to exactly target_count.
/// Every returned point lies on the tube surface and is visible from the viewpoint.
/// Throws EmptyView when no ray hits, InvalidParams when the viewpoint is inside
/// the model bounds.
Cloud render_partial(const BranchModel &model, const ViewConfig &view, uint64_t seed);
Cloud render_partial(const TreeModel &model, const ViewConfig &view, uint64_t seed);

/// Removes every point within gap_radius of any gap centre. Never adds points;
/// the result may be empty.
Cloud corrupt_gaps(const Cloud &cloud, const std::vector<Vec3> &gap_centres, double gap_radius);

/// Parameters of the recursive tree-unit generator: a central leader extended
/// unit by unit, each unit spawning lateral branches.
struct TreeUnitParams
{
  int depth = 3;               // number of stacked units
  int branches_per_unit = 2;   // laterals spawned by each unit
  double radius_decay = 0.8;   // multiplier on leader radius per unit, in (0,1]
  double branch_angle_min_deg = 30.0;  // lateral departure angle range, within (0,90)
  double branch_angle_max_deg = 70.0;
  double unit_length_min = 0.25;  // meters
  double unit_length_max = 0.45;
  double trunk_base_radius = 0.03;  // meters
};

/// Builds a randomised tree from repeated structural units. Radii are
/// monotonically non-increasing along every root-to-tip path, lateral branch
/// bases sit on the trunk surface, and the result is deterministic per seed.
/// Throws InvalidParams on out-of-range parameters.
TreeModel generate_tree_unit(const TreeUnitParams &params, uint64_t seed);

/// Parameters for randomised single-branch skeletons, the FB-style sample unit.
struct RandomBranchParams
{
  double base_radius_min = 0.008, base_radius_max = 0.022;  // meters
  double length_min = 0.4, length_max = 0.9;                // meters
  int control_points_min = 5, control_points_max = 9;
  double angle_from_trunk_min_deg = 25.0, angle_from_trunk_max_deg = 80.0;
  double turn_per_step_deg = 12.0;  // random walk bend between control points
};

/// One randomised branch skeleton leaving a vertical trunk axis, plus the model
/// fitted through it. Deterministic per seed.
BranchModel generate_random_branch(const RandomBranchParams &params, uint64_t seed);

}  // namespace branch

#endif  // BRANCH_SYNTH_H
