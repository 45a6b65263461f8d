#include "branch/completion.h"

#include <algorithm>
#include <cmath>

#include "branch/errors.h"
#include "branch/fitting.h"
#include "branch/knn.h"
#include "branch/rng.h"
#include "branch/spline.h"

namespace branch
{
namespace
{
// quality-checked circle fit of one slice: needs enough points and enough
// angular coverage around the fitted centre for the radius to mean anything
struct SliceFit
{
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();
  double radius = 0.0;
  bool good = false;
};

SliceFit fit_slice(const std::vector<Eigen::Vector2d> &plane)
{
  SliceFit out;
  if (plane.size() < 5)
    return out;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto &q : plane) centroid += q;
  centroid /= static_cast<double>(plane.size());
  double spread = 0.0;
  for (const auto &q : plane) spread = std::max(spread, (q - centroid).norm());

  const Circle2 circle = fit_circle_kasa(plane);
  if (!std::isfinite(circle.radius) || circle.radius <= 0.0 || circle.radius > 4.0 * spread)
    return out;

  // angular coverage: the largest gap between consecutive point angles must
  // leave a usable arc, otherwise thin silhouette strips fit junk circles
  std::vector<double> angles;
  angles.reserve(plane.size());
  for (const auto &q : plane) angles.push_back(std::atan2(q.y() - circle.centre.y(), q.x() - circle.centre.x()));
  std::sort(angles.begin(), angles.end());
  double largest_gap = 2.0 * kPi - (angles.back() - angles.front());
  for (size_t i = 1; i < angles.size(); i++) largest_gap = std::max(largest_gap, angles[i] - angles[i - 1]);
  const double span = 2.0 * kPi - largest_gap;
  if (span < deg2rad(60.0))
    return out;

  out.centre = circle.centre;
  out.radius = circle.radius;
  out.good = true;
  return out;
}
}  // namespace

Skeleton estimate_skeleton(const Cloud &partial, size_t slice_count)
{
  if (slice_count < 3)
    throw InvalidParams("need at least 3 slices");
  if (partial.size() < 10 * slice_count)
    throw InvalidParams("cloud too small for the requested slice count");

  const Vec3 axis = principal_axis(partial);
  Vec3 mean = Vec3::Zero();
  for (const auto &p : partial) mean += p;
  mean /= static_cast<double>(partial.size());

  double tmin = std::numeric_limits<double>::max();
  double tmax = std::numeric_limits<double>::lowest();
  std::vector<double> t(partial.size());
  for (size_t i = 0; i < partial.size(); i++)
  {
    t[i] = axis.dot(partial[i] - mean);
    tmin = std::min(tmin, t[i]);
    tmax = std::max(tmax, t[i]);
  }
  const double width = (tmax - tmin) / static_cast<double>(slice_count);
  if (width <= 0.0)
    throw TooSparse("cloud has no extent along its principal axis");

  std::vector<std::vector<size_t>> bins(slice_count);
  for (size_t i = 0; i < partial.size(); i++)
  {
    const size_t b = std::min(static_cast<size_t>((t[i] - tmin) / width), slice_count - 1);
    bins[b].push_back(i);
  }

  // pass 1: slices perpendicular to the principal axis
  const Vec3 u = any_perpendicular(axis);
  const Vec3 v = axis.cross(u);

  struct BinEstimate
  {
    double axial = 0.0;
    Vec3 centre = Vec3::Zero();
    double radius = 0.0;
  };
  std::vector<BinEstimate> found;
  std::vector<double> bin_axial(slice_count);
  for (size_t b = 0; b < slice_count; b++)
  {
    bin_axial[b] = tmin + (static_cast<double>(b) + 0.5) * width;
    if (bins[b].size() < 3)
      continue;
    Vec3 centroid = Vec3::Zero();
    std::vector<Eigen::Vector2d> plane(bins[b].size());
    for (size_t k = 0; k < bins[b].size(); k++)
    {
      const Vec3 &p = partial[bins[b][k]];
      centroid += p;
      plane[k] = Eigen::Vector2d(u.dot(p), v.dot(p));
    }
    centroid /= static_cast<double>(bins[b].size());
    const SliceFit fit = fit_slice(plane);
    if (!fit.good)
      continue;
    const Vec3 centre = axis.dot(centroid) * axis + fit.centre.x() * u + fit.centre.y() * v;
    found.push_back(BinEstimate{bin_axial[b], centre, std::max(fit.radius, 1e-6)});
  }
  if (found.size() < 3)
    throw TooSparse("fewer than 3 usable slices");

  // pass 2: re-slice perpendicular to the local polyline tangent, which removes
  // the radius inflation oblique sections suffer on curved branches
  {
    Skeleton first;
    for (const auto &f : found)
    {
      if (first.spheres.empty() || (first.spheres.back().centre - f.centre).norm() > 1e-12)
        first.spheres.push_back(SkeletalSphere{f.centre, std::max(f.radius, 1e-6)});
    }
    if (first.spheres.size() >= 3)
    {
      const double poly_len = first.polyline_length();
      const double arc_width = poly_len / static_cast<double>(found.size());
      std::vector<std::vector<size_t>> arc_bins(found.size());
      for (size_t i = 0; i < partial.size(); i++)
      {
        // foot of the point on the polyline
        double best_d2 = std::numeric_limits<double>::max();
        double foot_arc = 0.0;
        double run = 0.0;
        for (size_t sgm = 0; sgm + 1 < first.spheres.size(); sgm++)
        {
          const Vec3 &a = first.spheres[sgm].centre;
          const Vec3 &b = first.spheres[sgm + 1].centre;
          const Vec3 ab = b - a;
          const double len2 = ab.squaredNorm();
          const double tt = len2 > 0.0 ? std::clamp((partial[i] - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
          const double d2 = (partial[i] - (a + tt * ab)).squaredNorm();
          if (d2 < best_d2)
          {
            best_d2 = d2;
            foot_arc = run + tt * std::sqrt(len2);
          }
          run += std::sqrt(len2);
        }
        const size_t b = std::min(static_cast<size_t>(foot_arc / arc_width), found.size() - 1);
        arc_bins[b].push_back(i);
      }
      std::vector<BinEstimate> refined;
      for (size_t b = 0; b < found.size(); b++)
      {
        const double arc_centre = (static_cast<double>(b) + 0.5) * arc_width;
        const Vec3 station = first.centre_at_arc(arc_centre);
        const Vec3 tangent = first.tangent_at_arc(arc_centre);
        const Vec3 pu = any_perpendicular(tangent);
        const Vec3 pv = tangent.cross(pu);
        std::vector<Eigen::Vector2d> plane;
        plane.reserve(arc_bins[b].size());
        for (const size_t i : arc_bins[b])
          plane.emplace_back(pu.dot(partial[i] - station), pv.dot(partial[i] - station));
        const SliceFit fit = fit_slice(plane);
        if (!fit.good)
          continue;
        const Vec3 centre = station + fit.centre.x() * pu + fit.centre.y() * pv;
        refined.push_back(BinEstimate{axis.dot(centre - mean), centre, std::max(fit.radius, 1e-6)});
      }
      if (refined.size() >= 3)
        found = std::move(refined);
    }
  }

  // rebuild the regular axial stations: good bins keep their fit, gaps are
  // bridged by the spline through the good centres with linear radii
  std::sort(found.begin(), found.end(), [](const BinEstimate &a, const BinEstimate &b) { return a.axial < b.axial; });

  std::vector<Vec3> control(found.size());
  for (size_t i = 0; i < found.size(); i++) control[i] = found[i].centre;
  std::optional<CatmullRomSpline> bridge;
  try
  {
    bridge.emplace(control);
  }
  catch (const DegenerateSkeleton &)
  {
    // coincident centres; linear interpolation below covers it
  }

  std::vector<SkeletalSphere> spheres;
  spheres.reserve(slice_count + 2);
  size_t seg = 0;
  for (size_t b = 0; b < slice_count; b++)
  {
    const double a = bin_axial[b];
    while (seg + 1 < found.size() && found[seg + 1].axial <= a) seg++;
    if (a < found.front().axial || a > found.back().axial)
      continue;  // leading/trailing gap, covered by the endpoint extension
    const BinEstimate &lo = found[seg];
    const BinEstimate &hi = found[std::min(seg + 1, found.size() - 1)];
    if (a == lo.axial || hi.axial <= lo.axial)
    {
      spheres.push_back(SkeletalSphere{lo.centre, lo.radius});
      continue;
    }
    const double f = (a - lo.axial) / (hi.axial - lo.axial);
    const Vec3 centre = bridge ? bridge->eval(seg, f) : (1.0 - f) * lo.centre + f * hi.centre;
    spheres.push_back(SkeletalSphere{centre, (1.0 - f) * lo.radius + f * hi.radius});
  }
  if (spheres.size() < 2)
  {
    for (const auto &f : found) spheres.push_back(SkeletalSphere{f.centre, f.radius});
  }

  // extend to the full axial extent of the data; radii at the lost ends follow
  // the least-squares taper trend of the good slices (branches taper linearly,
  // and a two-point trend amplifies per-slice noise)
  double trend_slope = 0.0, trend_intercept = 0.0;
  {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto &f : found)
    {
      sx += f.axial;
      sy += f.radius;
      sxx += f.axial * f.axial;
      sxy += f.axial * f.radius;
    }
    const double n = static_cast<double>(found.size());
    const double denom = n * sxx - sx * sx;
    trend_slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    trend_intercept = (sy - trend_slope * sx) / n;
  }
  auto extrapolate = [&](const SkeletalSphere &from, const SkeletalSphere &next, double target_axial,
                         double from_axial, double next_axial) {
    const double span = next_axial - from_axial;
    const double f = span != 0.0 ? (target_axial - from_axial) / span : 0.0;
    double radius = trend_intercept + trend_slope * target_axial;
    radius = std::clamp(radius, 0.25 * from.radius, 4.0 * from.radius);
    return SkeletalSphere{from.centre + f * (next.centre - from.centre), std::max(radius, 1e-6)};
  };
  if (spheres.size() >= 2)
  {
    const SkeletalSphere head =
      extrapolate(spheres[0], spheres[1], tmin, axis.dot(spheres[0].centre - mean),
                  axis.dot(spheres[1].centre - mean));
    const size_t n = spheres.size();
    const SkeletalSphere tail =
      extrapolate(spheres[n - 1], spheres[n - 2], tmax, axis.dot(spheres[n - 1].centre - mean),
                  axis.dot(spheres[n - 2].centre - mean));
    spheres.insert(spheres.begin(), head);
    spheres.push_back(tail);
  }

  Skeleton skeleton;
  for (const auto &s : spheres)
  {
    if (!skeleton.spheres.empty() && (skeleton.spheres.back().centre - s.centre).norm() <= 1e-12)
      continue;
    skeleton.spheres.push_back(s);
  }
  skeleton.validate();
  return skeleton;
}

Cloud synthesize_coarse(const Skeleton &skeleton, size_t output_count, uint64_t seed)
{
  skeleton.validate();
  if (output_count < 1)
    throw InvalidParams("output count must be positive");

  const auto &sp = skeleton.spheres;
  const size_t segs = sp.size() - 1;

  // per-segment frustum areas and transported frames
  std::vector<double> cdf(segs);
  std::vector<Vec3> normals(segs), binormals(segs);
  double total = 0.0;
  Vec3 prev_dir = (sp[1].centre - sp[0].centre).normalized();
  Vec3 normal = any_perpendicular(prev_dir);
  Vec3 prev_mid = sp[0].centre;
  for (size_t i = 0; i < segs; i++)
  {
    const Vec3 seg = sp[i + 1].centre - sp[i].centre;
    const double len = seg.norm();
    const Vec3 dir = seg / len;
    const Vec3 mid = 0.5 * (sp[i].centre + sp[i + 1].centre);
    normal = transport_normal(prev_mid, prev_dir, normal, mid, dir);
    normals[i] = normal;
    binormals[i] = dir.cross(normal);
    prev_dir = dir;
    prev_mid = mid;
    const double slant = std::sqrt(len * len + (sp[i + 1].radius - sp[i].radius) * (sp[i + 1].radius - sp[i].radius));
    total += kPi * (sp[i].radius + sp[i + 1].radius) * slant;
    cdf[i] = total;
  }

  Rng rng(seed);
  Cloud cloud(output_count);
  for (size_t n = 0; n < output_count; n++)
  {
    const double pick = rng.uniform01() * total;
    const size_t i = std::min(static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin()),
                              segs - 1);
    const double r0 = sp[i].radius, r1 = sp[i + 1].radius;
    // within a frustum the area density is linear in the radius; invert its CDF
    const double w = rng.uniform01();
    double f;
    if (std::abs(r1 - r0) < 1e-12 * std::max(r0, r1))
      f = w;
    else
      f = (std::sqrt(r0 * r0 + w * (r1 * r1 - r0 * r0)) - r0) / (r1 - r0);
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 centre = (1.0 - f) * sp[i].centre + f * sp[i + 1].centre;
    const double radius = (1.0 - f) * r0 + f * r1;
    cloud[n] = centre + radius * (std::cos(theta) * normals[i] + std::sin(theta) * binormals[i]);
  }
  return cloud;
}

double coverage_term(const Cloud &partial, const Cloud &points)
{
  if (partial.empty() || points.empty())
    throw EmptyCloud("coverage needs non-empty clouds");
  const KdTree tree(points);
  double sum = 0.0;
  for (const auto &p : partial) sum += (points[tree.nearest(p)] - p).norm();
  return sum / static_cast<double>(partial.size());
}

namespace
{
struct ObjectiveParts
{
  double coverage = 0.0;
  double repulsion_term = 0.0;
  double variance_term = 0.0;  // unweighted
  double total = 0.0;
};

// coverage + repulsion + lambda2 * variance (+ constant skeleton term), with gradient
ObjectiveParts evaluate_objective(const Cloud &points, const Cloud &partial,
                                  const std::vector<Vec3> &var_skeleton, bool var_active,
                                  const CompletionConfig &cfg, double h, double skel_const,
                                  std::vector<Vec3> *gradient)
{
  ObjectiveParts parts;
  if (gradient)
    gradient->assign(points.size(), Vec3::Zero());

  {
    const KdTree tree(points);
    const double inv = 1.0 / static_cast<double>(partial.size());
    for (const auto &p : partial)
    {
      const size_t j = tree.nearest(p);
      const Vec3 diff = points[j] - p;
      const double dist = diff.norm();
      parts.coverage += inv * dist;
      if (gradient && dist > 0.0)
        (*gradient)[j] += inv * diff / dist;
    }
  }
  {
    const LossValue rep = repulsion(points, cfg.repulsion_k, h);
    parts.repulsion_term = rep.value;
    if (gradient)
      for (size_t i = 0; i < points.size(); i++) (*gradient)[i] += rep.gradient[i];
  }
  if (var_active)
  {
    const LossValue var = variance_loss(points, var_skeleton);
    parts.variance_term = var.value;
    if (gradient)
      for (size_t i = 0; i < points.size(); i++)
        (*gradient)[i] += cfg.weights.lambda_variance * var.gradient[i];
  }
  parts.total = parts.coverage + parts.repulsion_term +
                (var_active ? cfg.weights.lambda_variance * parts.variance_term : 0.0) +
                cfg.weights.lambda_skeleton * skel_const;
  if (!std::isfinite(parts.total))
    throw Divergence("joint loss became non-finite");
  return parts;
}
}  // namespace

CompletionResult refine(const Cloud &coarse, const Cloud &partial, const Skeleton &skeleton,
                        const CompletionConfig &cfg, const std::vector<Vec3> *gt_skeleton)
{
  if (coarse.empty() || partial.empty())
    throw EmptyCloud("refine needs non-empty clouds");
  if (cfg.output_count != coarse.size())
    throw InvalidParams("coarse cloud size must match output_count");
  if (cfg.output_count < partial.size())
    throw InvalidParams("output_count must be at least the partial cloud size");
  if (cfg.step_size <= 0.0)
    throw InvalidParams("step size must be positive");
  skeleton.validate();

  CompletionResult result;
  result.coarse = coarse;
  result.skeleton_est = skeleton;

  // optimize in the normalized frame: the default loss weights follow the
  // completion literature's convention of unit-normalized clouds, so the
  // variance term keeps its intended strength regardless of branch size
  Bounds frame = bounds_of(coarse);
  for (const auto &p : partial) frame.extend(p);
  const Vec3 origin = frame.centre();
  const double scale = std::max(frame.diagonal(), 1e-9);
  auto to_frame = [&](const Cloud &cloud) {
    Cloud out(cloud.size());
    for (size_t i = 0; i < cloud.size(); i++) out[i] = (cloud[i] - origin) / scale;
    return out;
  };
  const Cloud partial_n = to_frame(partial);
  Skeleton skeleton_n = skeleton;
  for (auto &s : skeleton_n.spheres)
  {
    s.centre = (s.centre - origin) / scale;
    s.radius /= scale;
  }
  std::vector<Vec3> gt_n;
  if (gt_skeleton)
  {
    gt_n.reserve(gt_skeleton->size());
    for (const auto &p : *gt_skeleton) gt_n.push_back((p - origin) / scale);
  }

  const std::vector<Vec3> var_skeleton = skeleton_n.resample_polyline(cfg.variance_skeleton_samples);
  const double h = std::max(cfg.repulsion_h_fraction * bounds_of(to_frame(coarse)).diagonal(), 1e-12);
  const double skel_const = gt_skeleton ? skeleton_cd_loss(skeleton_n.centres(), gt_n).value : 0.0;

  // hard sanity bound, enforced during the line search: no point may leave the
  // 3x-max-radius neighbourhood of the skeleton polyline
  double max_radius = 0.0;
  for (const auto &s : skeleton_n.spheres) max_radius = std::max(max_radius, s.radius);
  const double bound = 3.0 * max_radius;
  auto within_bound = [&](const Cloud &cloud) {
    for (const auto &p : cloud)
    {
      double d = std::numeric_limits<double>::max();
      for (size_t i = 0; i + 1 < skeleton_n.spheres.size() && d > bound; i++)
        d = std::min(d,
                     point_segment_distance(p, skeleton_n.spheres[i].centre, skeleton_n.spheres[i + 1].centre));
      if (d > bound)
        return false;
    }
    return true;
  };

  Cloud points = to_frame(coarse);
  bool any_accepted = false;
  std::vector<Vec3> gradient;
  bool var_active = cfg.variance_activation_step == 0 && cfg.steps > 0;
  ObjectiveParts parts =
    evaluate_objective(points, partial_n, var_skeleton, var_active, cfg, h, skel_const, &gradient);
  const double coverage_cap = parts.coverage;

  auto record = [&](size_t step) {
    result.loss_trace.push_back(LossTraceRow{step, parts.coverage, parts.repulsion_term,
                                             parts.variance_term, parts.total});
  };
  record(0);

  Cloud trial(points.size());
  for (size_t step = 0; step < cfg.steps; step++)
  {
    const bool now_active = step >= cfg.variance_activation_step;
    if (now_active != var_active)
    {
      var_active = now_active;
      parts = evaluate_objective(points, partial_n, var_skeleton, var_active, cfg, h, skel_const, &gradient);
    }

    double g2 = 0.0;
    for (const auto &g : gradient) g2 += g.squaredNorm();
    bool accepted = false;
    if (g2 > 0.0)
    {
      double alpha = cfg.step_size;
      for (int back = 0; back < 24 && !accepted; back++, alpha *= 0.5)
      {
        for (size_t i = 0; i < points.size(); i++) trial[i] = points[i] - alpha * gradient[i];
        const ObjectiveParts trial_parts =
          evaluate_objective(trial, partial_n, var_skeleton, var_active, cfg, h, skel_const, nullptr);
        if (trial_parts.total <= parts.total - 1e-4 * alpha * g2 &&
            trial_parts.coverage <= coverage_cap + 1e-15 && within_bound(trial))
        {
          points.swap(trial);
          parts = evaluate_objective(points, partial_n, var_skeleton, var_active, cfg, h, skel_const, &gradient);
          accepted = true;
          any_accepted = true;
        }
      }
    }
    record(step + 1);

    if (!accepted && (var_active || cfg.variance_activation_step >= cfg.steps))
    {
      // stationary for the final objective; the remaining rows repeat
      for (size_t rest = step + 1; rest < cfg.steps; rest++) record(rest + 1);
      break;
    }
  }

  if (!within_bound(points))
    throw Divergence("refined point left the skeleton neighbourhood");

  if (!any_accepted)
  {
    result.completed = coarse;  // bitwise no-op when nothing moved
    return result;
  }
  result.completed.resize(points.size());
  for (size_t i = 0; i < points.size(); i++) result.completed[i] = points[i] * scale + origin;
  return result;
}

CompletionResult complete_cloud(const Cloud &partial, const CompletionConfig &cfg)
{
  const size_t slices = std::min(cfg.slice_count, partial.size() / 10);
  const Skeleton skeleton = estimate_skeleton(partial, std::max<size_t>(slices, 3));
  const Cloud coarse = synthesize_coarse(skeleton, cfg.output_count, cfg.seed);
  return refine(coarse, partial, skeleton, cfg);
}

}  // namespace branch
