#ifndef BRANCH_FITTING_H
#define BRANCH_FITTING_H

#include <vector>

#include "branch/maths.h"

namespace branch
{
struct Circle2
{
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

/// Algebraic (Kasa) least-squares circle fit. Solves the linear system for
/// (centre, radius) that minimises sum((x-a)^2 + (y-b)^2 - R^2)^2.
/// Throws TooFewPoints for fewer than 3 points.
Circle2 fit_circle_kasa(const std::vector<Eigen::Vector2d> &points);

/// Principal axis of a cloud (unit eigenvector of the covariance with the
/// largest eigenvalue). Sign is fixed so the largest-magnitude component is
/// positive. Throws TooFewPoints for fewer than 2 points.
Vec3 principal_axis(const Cloud &cloud);

/// Least-squares line direction through a set of points (same PCA machinery),
/// oriented so it points from the first to the last point of the list.
Vec3 line_direction(const std::vector<Vec3> &points);

}  // namespace branch

#endif  // BRANCH_FITTING_H
