#include "branch/spline.h"

#include <algorithm>
#include <cmath>

#include "branch/errors.h"

namespace branch
{
namespace
{
// 5-point Gauss-Legendre nodes/weights on [0, 1]
constexpr double kGaussNode[5] = { 0.046910077030668, 0.230765344947158, 0.5,
                                   0.769234655052841, 0.953089922969332 };
constexpr double kGaussWeight[5] = { 0.118463442528095, 0.239314335249683, 0.284444444444444,
                                     0.239314335249683, 0.118463442528095 };
}  // namespace

CatmullRomSpline::CatmullRomSpline(const std::vector<Vec3> &points)
  : control_points_(points)
{
  if (points.size() < 2)
    throw DegenerateSkeleton("spline needs at least two points");
  for (size_t i = 0; i + 1 < points.size(); i++)
  {
    if (!is_finite(points[i]) || !is_finite(points[i + 1]))
      throw DegenerateSkeleton("spline point not finite");
    if ((points[i + 1] - points[i]).norm() <= 0.0)
      throw DegenerateSkeleton("duplicate consecutive spline points");
  }

  // reflected ghost points give end tangents without extra data
  std::vector<Vec3> p;
  p.reserve(points.size() + 2);
  p.push_back(2.0 * points.front() - points[1]);
  p.insert(p.end(), points.begin(), points.end());
  p.push_back(2.0 * points.back() - points[points.size() - 2]);

  // centripetal knots: dt = |dP|^(1/2)
  std::vector<double> knots(p.size());
  knots[0] = 0.0;
  for (size_t i = 1; i < p.size(); i++)
    knots[i] = knots[i - 1] + std::sqrt((p[i] - p[i - 1]).norm());

  segments_.resize(points.size() - 1);
  for (size_t i = 0; i < segments_.size(); i++)
  {
    const Vec3 &p0 = p[i], &p1 = p[i + 1], &p2 = p[i + 2], &p3 = p[i + 3];
    const double t0 = knots[i], t1 = knots[i + 1], t2 = knots[i + 2], t3 = knots[i + 3];
    // non-uniform Catmull-Rom as a Hermite segment on u in [0,1]
    const Vec3 m1 = (t2 - t1) * ((p1 - p0) / (t1 - t0) - (p2 - p0) / (t2 - t0) + (p2 - p1) / (t2 - t1));
    const Vec3 m2 = (t2 - t1) * ((p2 - p1) / (t2 - t1) - (p3 - p1) / (t3 - t1) + (p3 - p2) / (t3 - t2));
    Segment &seg = segments_[i];
    seg.a = 2.0 * p1 - 2.0 * p2 + m1 + m2;
    seg.b = -3.0 * p1 + 3.0 * p2 - 2.0 * m1 - m2;
    seg.c = m1;
    seg.d = p1;
  }
  build_arc_table();
}

Vec3 CatmullRomSpline::eval(size_t segment, double u) const
{
  const Segment &s = segments_[segment];
  return ((s.a * u + s.b) * u + s.c) * u + s.d;
}

Vec3 CatmullRomSpline::derivative(size_t segment, double u) const
{
  const Segment &s = segments_[segment];
  return (3.0 * s.a * u + 2.0 * s.b) * u + s.c;
}

double CatmullRomSpline::segment_arc(size_t segment, double u0, double u1) const
{
  double sum = 0.0;
  for (int g = 0; g < 5; g++)
  {
    const double u = u0 + (u1 - u0) * kGaussNode[g];
    sum += kGaussWeight[g] * derivative(segment, u).norm();
  }
  return sum * (u1 - u0);
}

void CatmullRomSpline::build_arc_table()
{
  arc_table_.assign(segments_.size() * kSubdiv + 1, 0.0);
  size_t entry = 1;
  double running = 0.0;
  for (size_t seg = 0; seg < segments_.size(); seg++)
  {
    for (int k = 0; k < kSubdiv; k++)
    {
      const double u0 = static_cast<double>(k) / kSubdiv;
      const double u1 = static_cast<double>(k + 1) / kSubdiv;
      running += segment_arc(seg, u0, u1);
      arc_table_[entry++] = running;
    }
  }
  total_length_ = running;
}

std::pair<size_t, double> CatmullRomSpline::arc_to_param(double s) const
{
  s = std::clamp(s, 0.0, total_length_);
  // locate the subdivision bracket, then polish with Newton on the local arc
  const auto it = std::upper_bound(arc_table_.begin(), arc_table_.end(), s);
  size_t hi = std::min(static_cast<size_t>(it - arc_table_.begin()), arc_table_.size() - 1);
  hi = std::max<size_t>(hi, 1);
  const size_t cell = hi - 1;
  const size_t seg = cell / kSubdiv;
  const double u0 = static_cast<double>(cell % kSubdiv) / kSubdiv;
  const double s0 = arc_table_[cell];
  const double s1 = arc_table_[hi];
  const double du = 1.0 / kSubdiv;
  double u = u0 + du * (s1 > s0 ? (s - s0) / (s1 - s0) : 0.0);
  for (int iter = 0; iter < 3; iter++)
  {
    const double err = s0 + segment_arc(seg, u0, u) - s;
    const double speed = derivative(seg, u).norm();
    if (speed <= 0.0)
      break;
    u -= err / speed;
    u = std::clamp(u, u0, u0 + du);
  }
  return { seg, u };
}

Vec3 CatmullRomSpline::point_at_arc(double s) const
{
  const auto [seg, u] = arc_to_param(s);
  return eval(seg, u);
}

Vec3 CatmullRomSpline::tangent_at_arc(double s) const
{
  const auto [seg, u] = arc_to_param(s);
  Vec3 d = derivative(seg, u);
  const double n = d.norm();
  if (n <= 0.0)
    throw NumericError("vanishing spline derivative");
  return d / n;
}

}  // namespace branch
