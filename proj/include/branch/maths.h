#ifndef BRANCH_MATHS_H
#define BRANCH_MATHS_H

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace branch
{
using Vec3 = Eigen::Vector3d;

/// An unordered set of 3D points in meters, the common currency of the toolkit.
using Cloud = std::vector<Vec3>;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline bool is_finite(const Vec3 &p)
{
  return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
}

inline bool is_finite(const Cloud &cloud)
{
  for (const auto &p : cloud)
  {
    if (!is_finite(p))
      return false;
  }
  return true;
}

struct Bounds
{
  Vec3 min_bound{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                 std::numeric_limits<double>::max()};
  Vec3 max_bound{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
                 std::numeric_limits<double>::lowest()};

  void extend(const Vec3 &p)
  {
    min_bound = min_bound.cwiseMin(p);
    max_bound = max_bound.cwiseMax(p);
  }
  bool contains(const Vec3 &p) const
  {
    return (p.array() >= min_bound.array()).all() && (p.array() <= max_bound.array()).all();
  }
  Vec3 centre() const { return 0.5 * (min_bound + max_bound); }
  double diagonal() const { return (max_bound - min_bound).norm(); }
};

inline Bounds bounds_of(const Cloud &cloud)
{
  Bounds b;
  for (const auto &p : cloud) b.extend(p);
  return b;
}

/// Any unit vector perpendicular to @p v (v need not be normalised).
inline Vec3 any_perpendicular(const Vec3 &v)
{
  const Vec3 axis = std::abs(v[0]) < 0.9 * v.norm() ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  return v.cross(axis).normalized();
}

double point_segment_distance(const Vec3 &p, const Vec3 &a, const Vec3 &b);

/// Double-reflection transport of the frame normal n0 from (x0, t0) to (x1, t1);
/// the result stays perpendicular to t1 and rotation-minimising along the move.
Vec3 transport_normal(const Vec3 &x0, const Vec3 &t0, const Vec3 &n0, const Vec3 &x1, const Vec3 &t1);

/// Runs fn(i) for i in [0, count) across worker threads. Each index must be
/// independent; results are deterministic regardless of thread count.
void parallel_for(size_t count, const std::function<void(size_t)> &fn, int threads = 0);

}  // namespace branch

#endif  // BRANCH_MATHS_H
