#ifndef BRANCH_SPLINE_H
#define BRANCH_SPLINE_H

#include <vector>

#include "branch/maths.h"

namespace branch
{
/// Centripetal Catmull-Rom spline through an ordered list of points, with an
/// arc-length parameterisation built on top. Centripetal knots avoid loops and
/// overshoot on near-collinear data, and the curve passes through every input
/// point. End conditions come from reflecting the first and last points.
class CatmullRomSpline
{
public:
  CatmullRomSpline() = default;

  /// @p points must hold at least two entries with consecutive points distinct.
  explicit CatmullRomSpline(const std::vector<Vec3> &points);

  size_t segment_count() const { return segments_.size(); }
  const std::vector<Vec3> &control_points() const { return control_points_; }

  /// Total arc length in meters.
  double length() const { return total_length_; }

  /// Position at arc length s from the base, s in [0, length()].
  Vec3 point_at_arc(double s) const;

  /// Unit tangent at arc length s.
  Vec3 tangent_at_arc(double s) const;

  /// Position at normalised parameter t in [0, 1] (t is arc length / length).
  Vec3 point_at_t(double t) const { return point_at_arc(t * total_length_); }

  /// Maps arc length to (segment index, local u in [0,1]). Exposed so tests can
  /// compare the arc parameterisation against an independent quadrature oracle.
  std::pair<size_t, double> arc_to_param(double s) const;

  /// Arc length at control point i.
  double arc_at_control(size_t i) const { return arc_table_[i * kSubdiv]; }

  Vec3 eval(size_t segment, double u) const;
  Vec3 derivative(size_t segment, double u) const;  // dC/du, not unit

private:
  struct Segment
  {
    // C(u) = a u^3 + b u^2 + c u + d for u in [0,1]
    Vec3 a, b, c, d;
  };

  void build_arc_table();
  double segment_arc(size_t segment, double u0, double u1) const;  // Gauss-Legendre

  std::vector<Vec3> control_points_;
  std::vector<Segment> segments_;
  // cumulative arc length at subdivision boundaries, kSubdiv per segment
  std::vector<double> arc_table_;
  double total_length_ = 0.0;

  static constexpr int kSubdiv = 32;
};

}  // namespace branch

#endif  // BRANCH_SPLINE_H
