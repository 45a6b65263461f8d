#ifndef BRANCH_SKELETON_H
#define BRANCH_SKELETON_H

#include <vector>

#include "branch/maths.h"

namespace branch
{
/// A centreline sample paired with the local branch radius.
struct SkeletalSphere
{
  Vec3 centre = Vec3::Zero();
  double radius = 0.0;
};

/// Ordered chain of skeletal spheres from branch base to tip.
struct Skeleton
{
  std::vector<SkeletalSphere> spheres;

  size_t size() const { return spheres.size(); }
  bool empty() const { return spheres.empty(); }

  /// Throws DegenerateSkeleton/InvalidParams when the invariants do not hold:
  /// at least two spheres, consecutive centres distinct, radii positive, all finite.
  void validate() const;

  std::vector<Vec3> centres() const;
  std::vector<double> radii() const;

  /// Polyline arc length over the sphere centres, in meters.
  double polyline_length() const;

  /// Centre position at polyline arc length s (linear between spheres).
  Vec3 centre_at_arc(double s) const;

  /// Radius at polyline arc length s (linear between spheres).
  double radius_at_arc(double s) const;

  /// Unit tangent of the polyline at arc length s.
  Vec3 tangent_at_arc(double s) const;

  /// Reverses base/tip order.
  Skeleton reversed() const;

  /// Evenly spaced centre samples along the polyline (n >= 2), used to densify
  /// sparse skeletons before distance-based losses.
  std::vector<Vec3> resample_polyline(size_t n) const;
};

}  // namespace branch

#endif  // BRANCH_SKELETON_H
