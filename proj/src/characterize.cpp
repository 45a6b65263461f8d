#include "branch/characterize.h"

#include <algorithm>
#include <cmath>

#include "branch/errors.h"
#include "branch/fitting.h"

namespace branch
{
double measure_diameter(const Cloud &branch_cloud, const Skeleton &skeleton, double offset)
{
  if (branch_cloud.empty())
    throw EmptyCloud("diameter needs a cloud");
  skeleton.validate();
  const double length = skeleton.polyline_length();
  if (offset < 0.0 || offset >= length)
    throw OutOfRange("measurement offset beyond the branch");

  const Vec3 station = skeleton.centre_at_arc(offset);
  const Vec3 tangent = skeleton.tangent_at_arc(offset);
  const double half_thickness = std::max(skeleton.radius_at_arc(offset), 1e-4);

  // gather points whose foot on the skeleton polyline is near the station
  const Vec3 u = any_perpendicular(tangent);
  const Vec3 v = tangent.cross(u);
  std::vector<Eigen::Vector2d> slice;
  for (const auto &p : branch_cloud)
  {
    const double axial = tangent.dot(p - station);
    if (std::abs(axial) > half_thickness)
      continue;
    slice.emplace_back(u.dot(p - station), v.dot(p - station));
  }
  if (slice.size() < 8)
    throw TooSparse("diameter slice holds fewer than 8 points");
  const Circle2 circle = fit_circle_kasa(slice);
  return 2.0 * circle.radius * 1000.0;
}

double measure_angle(const Skeleton &branch_skeleton, const Vec3 &trunk_axis, double junction_window)
{
  branch_skeleton.validate();
  if (junction_window <= 0.0)
    throw InvalidParams("junction window must be positive");
  if (branch_skeleton.polyline_length() <= junction_window * 1e-3)
    throw DegenerateSkeleton("skeleton too short for an angle estimate");

  // centres within the window of the base, plus enough to define a direction
  std::vector<Vec3> window_points;
  double run = 0.0;
  window_points.push_back(branch_skeleton.spheres.front().centre);
  for (size_t i = 1; i < branch_skeleton.spheres.size(); i++)
  {
    run += (branch_skeleton.spheres[i].centre - branch_skeleton.spheres[i - 1].centre).norm();
    if (run <= junction_window || window_points.size() < 2)
      window_points.push_back(branch_skeleton.spheres[i].centre);
    else
      break;
  }
  const Vec3 direction = line_direction(window_points);
  const double c = std::clamp(direction.normalized().dot(trunk_axis.normalized()), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

double measure_length(const Skeleton &skeleton)
{
  skeleton.validate();
  return skeleton.polyline_length() * 100.0;
}

ErrorReport error_metrics(const std::vector<double> &estimates, const std::vector<double> &ground_truth)
{
  if (estimates.size() != ground_truth.size())
    throw LengthMismatch("estimate and ground-truth counts differ");
  if (estimates.empty())
    throw LengthMismatch("error metrics need at least one pair");

  ErrorReport report;
  report.n = estimates.size();
  double sum_abs = 0.0, sum_pct = 0.0, sum_sq = 0.0;
  for (size_t i = 0; i < estimates.size(); i++)
  {
    if (ground_truth[i] == 0.0)
      throw ZeroGroundTruth("MAPE undefined for zero ground truth");
    const double e = estimates[i] - ground_truth[i];
    sum_abs += std::abs(e);
    sum_pct += std::abs(e) / std::abs(ground_truth[i]);
    sum_sq += e * e;
  }
  const double n = static_cast<double>(report.n);
  report.mae = sum_abs / n;
  report.mape = 100.0 * sum_pct / n;
  report.rmse = std::sqrt(sum_sq / n);
  return report;
}

Skeleton orient_to_base(const Skeleton &skeleton, const Vec3 *base_hint)
{
  skeleton.validate();
  bool flip;
  if (base_hint)
  {
    flip = (skeleton.spheres.back().centre - *base_hint).norm() <
           (skeleton.spheres.front().centre - *base_hint).norm();
  }
  else
  {
    // without a hint the thicker end is the base (branches taper towards the tip)
    const size_t k = std::max<size_t>(1, skeleton.spheres.size() / 5);
    double head = 0.0, tail = 0.0;
    for (size_t i = 0; i < k; i++)
    {
      head += skeleton.spheres[i].radius;
      tail += skeleton.spheres[skeleton.spheres.size() - 1 - i].radius;
    }
    flip = tail > head;
  }
  return flip ? skeleton.reversed() : skeleton;
}

}  // namespace branch
