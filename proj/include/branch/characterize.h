#ifndef BRANCH_CHARACTERIZE_H
#define BRANCH_CHARACTERIZE_H

#include <string>
#include <vector>

#include "branch/maths.h"
#include "branch/skeleton.h"

namespace branch
{
/// Branch-level traits in the units the pruning rules use.
struct TraitRecord
{
  std::string branch_id;
  double diameter_mm = 0.0;
  double angle_deg = 0.0;   // branch axis vs trunk axis at the junction
  double length_cm = 0.0;
  double attachment_height_m = 0.0;
};

/// Aggregate error metrics for one trait.
struct ErrorReport
{
  double mae = 0.0;   // same unit as the trait
  double mape = 0.0;  // percent
  double rmse = 0.0;  // same unit as the trait
  size_t n = 0;
};

/// Branch diameter at a given arc-length offset from the base: points within a
/// slice of thickness 2x the local radius estimate are projected onto the
/// plane perpendicular to the local skeleton tangent and circle-fitted.
/// Returns millimeters. Throws TooSparse when the slice holds fewer than 8 points.
double measure_diameter(const Cloud &branch_cloud, const Skeleton &skeleton, double offset = 0.02);

/// Branch departure angle in degrees: least-squares direction of the skeleton
/// centres within junction_window of the base, oriented base->tip, against the
/// trunk axis. Throws DegenerateSkeleton.
double measure_angle(const Skeleton &branch_skeleton, const Vec3 &trunk_axis,
                     double junction_window = 0.05);

/// Polyline arc length of the skeleton, in centimeters.
double measure_length(const Skeleton &skeleton);

/// MAE / MAPE / RMSE between estimates and ground truth.
/// Throws LengthMismatch and ZeroGroundTruth (MAPE needs nonzero truth).
ErrorReport error_metrics(const std::vector<double> &estimates, const std::vector<double> &ground_truth);

/// Orients a skeleton so the first sphere is the branch base. Uses the hint
/// when given, otherwise the thicker end is taken as the base.
Skeleton orient_to_base(const Skeleton &skeleton, const Vec3 *base_hint = nullptr);

}  // namespace branch

#endif  // BRANCH_CHARACTERIZE_H
