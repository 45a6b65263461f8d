#include "branch/skeleton.h"

#include <algorithm>

#include "branch/errors.h"

namespace branch
{
void Skeleton::validate() const
{
  if (spheres.size() < 2)
    throw DegenerateSkeleton("skeleton needs at least two spheres");
  for (size_t i = 0; i < spheres.size(); i++)
  {
    if (!is_finite(spheres[i].centre) || !std::isfinite(spheres[i].radius))
      throw DegenerateSkeleton("skeleton sphere not finite");
    if (spheres[i].radius <= 0.0)
      throw InvalidParams("skeleton sphere radius must be positive");
    if (i > 0 && (spheres[i].centre - spheres[i - 1].centre).norm() <= 0.0)
      throw DegenerateSkeleton("duplicate consecutive skeleton centres");
  }
}

std::vector<Vec3> Skeleton::centres() const
{
  std::vector<Vec3> out(spheres.size());
  for (size_t i = 0; i < spheres.size(); i++) out[i] = spheres[i].centre;
  return out;
}

std::vector<double> Skeleton::radii() const
{
  std::vector<double> out(spheres.size());
  for (size_t i = 0; i < spheres.size(); i++) out[i] = spheres[i].radius;
  return out;
}

double Skeleton::polyline_length() const
{
  double length = 0.0;
  for (size_t i = 1; i < spheres.size(); i++) length += (spheres[i].centre - spheres[i - 1].centre).norm();
  return length;
}

namespace
{
// locates arc length s on the polyline: segment index and fraction
std::pair<size_t, double> locate(const std::vector<SkeletalSphere> &spheres, double s)
{
  double run = 0.0;
  for (size_t i = 1; i < spheres.size(); i++)
  {
    const double seg = (spheres[i].centre - spheres[i - 1].centre).norm();
    if (s <= run + seg || i + 1 == spheres.size())
      return { i - 1, seg > 0.0 ? std::clamp((s - run) / seg, 0.0, 1.0) : 0.0 };
    run += seg;
  }
  return { 0, 0.0 };
}
}  // namespace

Vec3 Skeleton::centre_at_arc(double s) const
{
  const auto [i, f] = locate(spheres, std::clamp(s, 0.0, polyline_length()));
  return (1.0 - f) * spheres[i].centre + f * spheres[i + 1].centre;
}

double Skeleton::radius_at_arc(double s) const
{
  const auto [i, f] = locate(spheres, std::clamp(s, 0.0, polyline_length()));
  return (1.0 - f) * spheres[i].radius + f * spheres[i + 1].radius;
}

Vec3 Skeleton::tangent_at_arc(double s) const
{
  const auto [i, f] = locate(spheres, std::clamp(s, 0.0, polyline_length()));
  (void)f;
  return (spheres[i + 1].centre - spheres[i].centre).normalized();
}

Skeleton Skeleton::reversed() const
{
  Skeleton out;
  out.spheres.assign(spheres.rbegin(), spheres.rend());
  return out;
}

std::vector<Vec3> Skeleton::resample_polyline(size_t n) const
{
  n = std::max<size_t>(n, 2);
  const double length = polyline_length();
  std::vector<Vec3> out(n);
  for (size_t i = 0; i < n; i++)
    out[i] = centre_at_arc(length * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

}  // namespace branch
