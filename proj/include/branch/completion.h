#ifndef BRANCH_COMPLETION_H
#define BRANCH_COMPLETION_H

#include <optional>
#include <vector>

#include "branch/losses.h"
#include "branch/maths.h"
#include "branch/skeleton.h"

namespace branch
{
/// Settings of the gradient-descent completion optimizer.
struct CompletionConfig
{
  size_t output_count = 8192;
  size_t steps = 60;
  double step_size = 0.002;  // meters per unit gradient, initial line-search step
  LossWeights weights;
  size_t variance_activation_step = 30;  // iteration at which the variance term turns on

  size_t slice_count = 30;          // skeleton estimation bins
  size_t repulsion_k = 5;
  double repulsion_h_fraction = 0.03;   // bandwidth as fraction of bbox diagonal
  size_t variance_skeleton_samples = 200;  // polyline densification for the variance term
  uint64_t seed = 0;
};

/// One row of the refinement trace.
struct LossTraceRow
{
  size_t step = 0;
  double cd = 0.0;   // partial->points coverage term
  double rep = 0.0;
  double var = 0.0;
  double total = 0.0;
};

struct CompletionResult
{
  Cloud completed;        // refined cloud
  Cloud coarse;           // initial tube synthesis
  Skeleton skeleton_est;  // estimated (or supplied) skeleton
  std::vector<LossTraceRow> loss_trace;
};

/// Estimates a skeleton from a branch cloud: principal-axis slicing, per-slice
/// centroid + least-squares circle radius, spline bridging across empty
/// slices, and endpoint extrapolation to the full axial extent.
/// Throws TooSparse when fewer than 3 slices hold enough points.
Skeleton estimate_skeleton(const Cloud &partial, size_t slice_count = 30);

/// Samples output_count points, uniform by area, on the tube implied by the
/// skeleton with linearly interpolated radii. Deterministic per seed.
Cloud synthesize_coarse(const Skeleton &skeleton, size_t output_count, uint64_t seed);

/// Gradient descent with backtracking line search on
///   coverage(partial -> points) + repulsion + lambda_variance * variance
/// (variance activates at cfg.variance_activation_step). When gt_skeleton is
/// supplied the skeleton Chamfer term joins, scaled by lambda_skeleton.
/// The accepted steps never increase the total loss, and never leave the
/// coverage term above its value on the coarse cloud.
/// Throws Divergence if the loss turns non-finite.
CompletionResult refine(const Cloud &coarse, const Cloud &partial, const Skeleton &skeleton,
                        const CompletionConfig &cfg,
                        const std::vector<Vec3> *gt_skeleton = nullptr);

/// estimate_skeleton + synthesize_coarse + refine in one call.
CompletionResult complete_cloud(const Cloud &partial, const CompletionConfig &cfg);

/// The coverage term on its own: (1/|partial|) sum_p min_c ||p - c||.
double coverage_term(const Cloud &partial, const Cloud &points);

}  // namespace branch

#endif  // BRANCH_COMPLETION_H
