#include "branch/branch_model.h"

#include <algorithm>
#include <cmath>

#include "branch/errors.h"
#include "branch/rng.h"

namespace branch
{
namespace
{
constexpr size_t kFrameStations = 1024;
}  // namespace

BranchModel::BranchModel(CatmullRomSpline spline, TaperProfile taper, std::string id)
  : spline_(std::move(spline))
  , taper_(taper)
  , id_(std::move(id))
{
  if (taper_.base_radius <= 0.0 || taper_.min_radius < 0.0 || taper_.min_radius > taper_.base_radius)
    throw InvalidParams("bad taper profile");
  if (taper_.radius_at(spline_.length()) <= 0.0)
    throw InvalidParams("taper shrinks the branch to zero radius");
  build_frames();
}

void BranchModel::build_frames()
{
  const double length = spline_.length();
  frame_arcs_.resize(kFrameStations + 1);
  frame_normals_.resize(kFrameStations + 1);
  Vec3 tangent = spline_.tangent_at_arc(0.0);
  Vec3 normal = any_perpendicular(tangent);
  frame_arcs_[0] = 0.0;
  frame_normals_[0] = normal;
  Vec3 x0 = spline_.point_at_arc(0.0);
  for (size_t i = 1; i <= kFrameStations; i++)
  {
    const double s = length * static_cast<double>(i) / kFrameStations;
    const Vec3 x1 = spline_.point_at_arc(s);
    const Vec3 t1 = spline_.tangent_at_arc(s);
    normal = transport_normal(x0, tangent, normal, x1, t1);
    frame_arcs_[i] = s;
    frame_normals_[i] = normal;
    x0 = x1;
    tangent = t1;
  }
}

void BranchModel::frame(double s, Vec3 &normal, Vec3 &binormal) const
{
  const double length = spline_.length();
  s = std::clamp(s, 0.0, length);
  const double step = length / kFrameStations;
  const size_t station = std::min(static_cast<size_t>(s / step), kFrameStations - 1);
  const Vec3 x0 = spline_.point_at_arc(frame_arcs_[station]);
  const Vec3 t0 = spline_.tangent_at_arc(frame_arcs_[station]);
  const Vec3 x1 = spline_.point_at_arc(s);
  const Vec3 t1 = spline_.tangent_at_arc(s);
  normal = transport_normal(x0, t0, frame_normals_[station], x1, t1);
  binormal = t1.cross(normal);
}

Vec3 BranchModel::surface_point(double s, double theta) const
{
  if (s < -1e-12 || s > spline_.length() + 1e-12)
    throw OutOfRange("arc length outside branch");
  Vec3 normal, binormal;
  frame(s, normal, binormal);
  const double r = taper_.radius_at(std::clamp(s, 0.0, spline_.length()));
  return spline_.point_at_arc(s) + r * (std::cos(theta) * normal + std::sin(theta) * binormal);
}

double BranchModel::closest_arc(const Vec3 &p) const
{
  const double length = spline_.length();
  // coarse scan, then golden-section polish in the winning bracket
  constexpr size_t kScan = 256;
  double best_s = 0.0;
  double best_d2 = std::numeric_limits<double>::max();
  for (size_t i = 0; i <= kScan; i++)
  {
    const double s = length * static_cast<double>(i) / kScan;
    const double d2 = (spline_.point_at_arc(s) - p).squaredNorm();
    if (d2 < best_d2)
    {
      best_d2 = d2;
      best_s = s;
    }
  }
  const double h = length / kScan;
  double lo = std::max(0.0, best_s - h);
  double hi = std::min(length, best_s + h);
  constexpr double kGolden = 0.381966011250105;
  double a = lo + kGolden * (hi - lo);
  double b = hi - kGolden * (hi - lo);
  double fa = (spline_.point_at_arc(a) - p).squaredNorm();
  double fb = (spline_.point_at_arc(b) - p).squaredNorm();
  for (int iter = 0; iter < 48; iter++)
  {
    if (fa < fb)
    {
      hi = b;
      b = a;
      fb = fa;
      a = lo + kGolden * (hi - lo);
      fa = (spline_.point_at_arc(a) - p).squaredNorm();
    }
    else
    {
      lo = a;
      a = b;
      fa = fb;
      b = hi - kGolden * (hi - lo);
      fb = (spline_.point_at_arc(b) - p).squaredNorm();
    }
  }
  return 0.5 * (lo + hi);
}

BranchModel fit_spline(const std::vector<SkeletalSphere> &spheres, double taper_angle_deg, double min_radius)
{
  if (spheres.size() < 2)
    throw DegenerateSkeleton("need at least two skeletal spheres");
  std::vector<Vec3> centres(spheres.size());
  for (size_t i = 0; i < spheres.size(); i++)
  {
    if (!is_finite(spheres[i].centre) || !std::isfinite(spheres[i].radius) || spheres[i].radius <= 0.0)
      throw DegenerateSkeleton("bad skeletal sphere");
    centres[i] = spheres[i].centre;
    if (i > 0 && (centres[i] - centres[i - 1]).norm() <= 0.0)
      throw DegenerateSkeleton("duplicate consecutive sphere centres");
  }
  TaperProfile taper;
  taper.base_radius = spheres.front().radius;
  taper.taper_angle_deg = taper_angle_deg;
  taper.min_radius = std::min(min_radius, taper.base_radius);
  return BranchModel(CatmullRomSpline(centres), taper);
}

namespace
{
// cumulative lateral-area table over arc length; the taper slope term keeps
// the density exact for cones as well as cylinders
struct AreaTable
{
  std::vector<double> arcs;
  std::vector<double> cumulative;  // cumulative[i] = area up to arcs[i]

  explicit AreaTable(const BranchModel &model, size_t cells = 1024)
  {
    const double length = model.length();
    const double slope = std::tan(deg2rad(model.taper().taper_angle_deg));
    arcs.resize(cells + 1);
    cumulative.resize(cells + 1);
    cumulative[0] = 0.0;
    arcs[0] = 0.0;
    auto density = [&](double s) {
      const double r = model.radius_at(s);
      const bool clamped = r <= model.taper().min_radius && slope < 0.0;
      return r * std::sqrt(1.0 + (clamped ? 0.0 : slope * slope));
    };
    for (size_t i = 1; i <= cells; i++)
    {
      const double s0 = length * static_cast<double>(i - 1) / cells;
      const double s1 = length * static_cast<double>(i) / cells;
      arcs[i] = s1;
      cumulative[i] = cumulative[i - 1] + 0.5 * (density(s0) + density(s1)) * (s1 - s0);
    }
  }

  double total() const { return cumulative.back(); }

  double invert(double u) const
  {
    const double target = u * total();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    size_t hi = std::min(static_cast<size_t>(it - cumulative.begin()), cumulative.size() - 1);
    hi = std::max<size_t>(hi, 1);
    const double c0 = cumulative[hi - 1], c1 = cumulative[hi];
    const double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    return arcs[hi - 1] + f * (arcs[hi] - arcs[hi - 1]);
  }
};
}  // namespace

Cloud sample_complete(const BranchModel &model, size_t n, uint64_t seed)
{
  if (n < 1)
    throw InvalidParams("sample count must be positive");
  const AreaTable table(model);
  Rng rng(seed);
  Cloud cloud(n);
  for (size_t i = 0; i < n; i++)
  {
    const double s = table.invert(rng.uniform01());
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    cloud[i] = model.surface_point(s, theta);
  }
  return cloud;
}

Cloud sample_complete(const TreeModel &model, size_t n, uint64_t seed)
{
  if (n < 1)
    throw InvalidParams("sample count must be positive");
  std::vector<const BranchModel *> parts;
  parts.push_back(&model.trunk);
  for (const auto &b : model.branches) parts.push_back(&b.model);

  std::vector<AreaTable> tables;
  tables.reserve(parts.size());
  std::vector<double> part_cdf(parts.size());
  double total = 0.0;
  for (size_t i = 0; i < parts.size(); i++)
  {
    tables.emplace_back(*parts[i]);
    total += tables[i].total();
    part_cdf[i] = total;
  }
  Rng rng(seed);
  Cloud cloud(n);
  for (size_t i = 0; i < n; i++)
  {
    const double pick = rng.uniform01() * total;
    const size_t part = std::min(static_cast<size_t>(std::upper_bound(part_cdf.begin(), part_cdf.end(), pick) -
                                                     part_cdf.begin()),
                                 parts.size() - 1);
    const double s = tables[part].invert(rng.uniform01());
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    cloud[i] = parts[part]->surface_point(s, theta);
  }
  return cloud;
}

std::vector<Vec3> resample_skeleton(const BranchModel &model, size_t n)
{
  if (n < 2)
    throw InvalidParams("resample needs at least two points");
  const double length = model.length();
  std::vector<Vec3> points(n);
  for (size_t i = 0; i < n; i++)
    points[i] = model.centreline(length * static_cast<double>(i) / static_cast<double>(n - 1));
  return points;
}

Skeleton skeleton_of(const BranchModel &model, size_t n)
{
  const auto points = resample_skeleton(model, n);
  const double length = model.length();
  Skeleton skeleton;
  skeleton.spheres.resize(points.size());
  for (size_t i = 0; i < points.size(); i++)
  {
    skeleton.spheres[i].centre = points[i];
    skeleton.spheres[i].radius = model.radius_at(length * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return skeleton;
}

}  // namespace branch
