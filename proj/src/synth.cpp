#include "branch/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "branch/errors.h"
#include "branch/rng.h"

namespace branch
{
namespace
{
// A branch discretised into cone frustums between consecutive arc stations.
// Rays intersect the frustums; hits are then snapped to the smooth tube.
struct FrustumChain
{
  const BranchModel *model = nullptr;
  std::vector<double> arcs;
  std::vector<Vec3> centres;
  std::vector<double> radii;

  explicit FrustumChain(const BranchModel &m)
    : model(&m)
  {
    const double length = m.length();
    const size_t stations = std::clamp<size_t>(static_cast<size_t>(length / 0.002), 64, 1024);
    arcs.resize(stations + 1);
    centres.resize(stations + 1);
    radii.resize(stations + 1);
    for (size_t i = 0; i <= stations; i++)
    {
      arcs[i] = length * static_cast<double>(i) / stations;
      centres[i] = m.centreline(arcs[i]);
      radii[i] = m.radius_at(arcs[i]);
    }
  }
};

// Smallest ray parameter tau > eps where o + tau*d meets the frustum, or infinity.
double ray_frustum(const Vec3 &o, const Vec3 &d, const Vec3 &a, const Vec3 &b, double ra, double rb)
{
  const Vec3 axis = b - a;
  const double len = axis.norm();
  if (len <= 0.0)
    return std::numeric_limits<double>::infinity();
  const Vec3 u = axis / len;
  const double k = (rb - ra) / len;
  const Vec3 e = o - a;
  const double du = d.dot(u), eu = e.dot(u);
  const double one_k2 = 1.0 + k * k;
  const double qa = d.squaredNorm() - one_k2 * du * du;
  const double qb = 2.0 * (e.dot(d) - one_k2 * eu * du - ra * k * du);
  const double qc = e.squaredNorm() - one_k2 * eu * eu - 2.0 * ra * k * eu - ra * ra;

  double best = std::numeric_limits<double>::infinity();
  // slab extended by a full station so bent chains leave no cracks at the
  // shared boundaries (tangent rays can otherwise slip between cones)
  const double slack = len;
  auto consider = [&](double tau) {
    if (tau <= 1e-9 || tau >= best)
      return;
    const double h = eu + tau * du;                     // axial coordinate of the hit
    if (h < -slack || h > len + slack || ra + k * h <= 0.0)
      return;
    best = tau;
  };
  if (std::abs(qa) < 1e-16)
  {
    if (std::abs(qb) > 0.0)
      consider(-qc / qb);
    return best;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0)
    return best;
  const double root = std::sqrt(disc);
  consider((-qb - root) / (2.0 * qa));
  consider((-qb + root) / (2.0 * qa));
  return best;
}

// Closest arc length to p within [centre-window, centre+window], golden section.
double closest_arc_near(const BranchModel &model, const Vec3 &p, double centre, double window)
{
  double lo = std::max(0.0, centre - window);
  double hi = std::min(model.length(), centre + window);
  constexpr double kGolden = 0.381966011250105;
  double a = lo + kGolden * (hi - lo);
  double b = hi - kGolden * (hi - lo);
  double fa = (model.centreline(a) - p).squaredNorm();
  double fb = (model.centreline(b) - p).squaredNorm();
  for (int iter = 0; iter < 40; iter++)
  {
    if (fa < fb)
    {
      hi = b;
      b = a;
      fb = fa;
      a = lo + kGolden * (hi - lo);
      fa = (model.centreline(a) - p).squaredNorm();
    }
    else
    {
      lo = a;
      a = b;
      fa = fb;
      b = hi - kGolden * (hi - lo);
      fb = (model.centreline(b) - p).squaredNorm();
    }
  }
  return 0.5 * (lo + hi);
}

struct Hit
{
  double tau = std::numeric_limits<double>::infinity();
  size_t chain = 0;
  size_t frustum = 0;
};

Cloud render_chains(const std::vector<FrustumChain> &chains, const ViewConfig &view, uint64_t seed)
{
  if (view.target_count < 1 || view.grid_resolution < 2)
    throw InvalidParams("bad view configuration");

  Bounds bounds;
  double max_radius = 0.0;
  for (const auto &chain : chains)
  {
    for (size_t i = 0; i < chain.centres.size(); i++)
    {
      bounds.extend(chain.centres[i]);
      max_radius = std::max(max_radius, chain.radii[i]);
    }
  }
  Bounds padded = bounds;
  padded.min_bound -= Vec3::Constant(max_radius);
  padded.max_bound += Vec3::Constant(max_radius);
  if (padded.contains(view.viewpoint))
    throw InvalidParams("viewpoint lies inside the model bounds");

  // image plane through the bounds centre, perpendicular to the view direction
  const Vec3 target = padded.centre();
  const Vec3 forward = (target - view.viewpoint).normalized();
  const Vec3 right = any_perpendicular(forward);
  const Vec3 up = forward.cross(right);
  const double plane_depth = (target - view.viewpoint).dot(forward);

  auto project = [&](const Vec3 &p, double radius, double &u, double &v, double &ru) {
    const Vec3 w = p - view.viewpoint;
    const double depth = std::max(w.dot(forward), 1e-6);
    const double scale = plane_depth / depth;
    u = w.dot(right) * scale;
    v = w.dot(up) * scale;
    ru = radius * scale * 1.5;  // conservative seen size
  };

  double umin = std::numeric_limits<double>::max(), umax = std::numeric_limits<double>::lowest();
  double vmin = umin, vmax = umax;
  for (const auto &chain : chains)
  {
    for (size_t i = 0; i < chain.centres.size(); i++)
    {
      double u, v, ru;
      project(chain.centres[i], chain.radii[i], u, v, ru);
      umin = std::min(umin, u - ru);
      umax = std::max(umax, u + ru);
      vmin = std::min(vmin, v - ru);
      vmax = std::max(vmax, v + ru);
    }
  }
  const double margin = 0.02 * std::max(umax - umin, vmax - vmin);
  umin -= margin;
  umax += margin;
  vmin -= margin;
  vmax += margin;

  const int res = view.grid_resolution;
  const double cell_u = (umax - umin) / res;
  const double cell_v = (vmax - vmin) / res;

  // bin frustums into the grid cells their screen bbox covers
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> cells(static_cast<size_t>(res) * res);
  for (size_t c = 0; c < chains.size(); c++)
  {
    const auto &chain = chains[c];
    for (size_t f = 0; f + 1 < chain.centres.size(); f++)
    {
      double u0, v0, r0, u1, v1, r1;
      project(chain.centres[f], chain.radii[f], u0, v0, r0);
      project(chain.centres[f + 1], chain.radii[f + 1], u1, v1, r1);
      const double lo_u = std::min(u0 - r0, u1 - r1), hi_u = std::max(u0 + r0, u1 + r1);
      const double lo_v = std::min(v0 - r0, v1 - r1), hi_v = std::max(v0 + r0, v1 + r1);
      const int iu0 = std::clamp(static_cast<int>((lo_u - umin) / cell_u), 0, res - 1);
      const int iu1 = std::clamp(static_cast<int>((hi_u - umin) / cell_u), 0, res - 1);
      const int iv0 = std::clamp(static_cast<int>((lo_v - vmin) / cell_v), 0, res - 1);
      const int iv1 = std::clamp(static_cast<int>((hi_v - vmin) / cell_v), 0, res - 1);
      for (int iv = iv0; iv <= iv1; iv++)
        for (int iu = iu0; iu <= iu1; iu++)
          cells[static_cast<size_t>(iv) * res + iu].emplace_back(static_cast<uint32_t>(c),
                                                                 static_cast<uint32_t>(f));
    }
  }

  std::vector<std::tuple<Vec3, size_t, size_t>> hits;  // point, chain, frustum
  for (int iv = 0; iv < res; iv++)
  {
    for (int iu = 0; iu < res; iu++)
    {
      const auto &cands = cells[static_cast<size_t>(iv) * res + iu];
      if (cands.empty())
        continue;
      const double u = umin + (iu + 0.5) * cell_u;
      const double v = vmin + (iv + 0.5) * cell_v;
      const Vec3 dir = plane_depth * forward + u * right + v * up;
      Hit hit;
      for (const auto &[c, f] : cands)
      {
        const auto &chain = chains[c];
        const double tau = ray_frustum(view.viewpoint, dir, chain.centres[f], chain.centres[f + 1],
                                       chain.radii[f], chain.radii[f + 1]);
        if (tau < hit.tau)
          hit = Hit{tau, c, f};
      }
      if (!std::isfinite(hit.tau))
        continue;
      hits.emplace_back(view.viewpoint + hit.tau * dir, hit.chain, hit.frustum);
    }
  }
  if (hits.empty())
    throw EmptyView("no ray hit the model");

  // snap frustum hits onto the smooth tube surface
  Cloud surface(hits.size());
  for (size_t i = 0; i < hits.size(); i++)
  {
    const auto &[p, c, f] = hits[i];
    const auto &chain = chains[c];
    const BranchModel &model = *chain.model;
    const double window = 2.0 * (chain.arcs[f + 1] - chain.arcs[f]);
    const double s = closest_arc_near(model, p, 0.5 * (chain.arcs[f] + chain.arcs[f + 1]), window);
    const Vec3 centre = model.centreline(s);
    const Vec3 tangent = model.tangent(s);
    Vec3 radial = (p - centre) - (p - centre).dot(tangent) * tangent;
    if (radial.squaredNorm() <= 0.0)
      radial = any_perpendicular(tangent);
    surface[i] = centre + model.radius_at(s) * radial.normalized();
  }

  // subsample or pad to the exact target count
  Rng rng(seed);
  Cloud out;
  out.reserve(view.target_count);
  if (surface.size() >= view.target_count)
  {
    std::vector<size_t> order(surface.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    for (size_t i = 0; i < view.target_count; i++)
    {
      const size_t j = i + rng.below(order.size() - i);
      std::swap(order[i], order[j]);
      out.push_back(surface[order[i]]);
    }
  }
  else
  {
    out = surface;
    while (out.size() < view.target_count) out.push_back(surface[rng.below(surface.size())]);
  }
  return out;
}
}  // namespace

Cloud render_partial(const BranchModel &model, const ViewConfig &view, uint64_t seed)
{
  std::vector<FrustumChain> chains;
  chains.emplace_back(model);
  return render_chains(chains, view, seed);
}

Cloud render_partial(const TreeModel &model, const ViewConfig &view, uint64_t seed)
{
  std::vector<FrustumChain> chains;
  chains.emplace_back(model.trunk);
  for (const auto &b : model.branches) chains.emplace_back(b.model);
  return render_chains(chains, view, seed);
}

Cloud corrupt_gaps(const Cloud &cloud, const std::vector<Vec3> &gap_centres, double gap_radius)
{
  if (gap_radius <= 0.0)
    throw InvalidParams("gap radius must be positive");
  const double r2 = gap_radius * gap_radius;
  Cloud out;
  out.reserve(cloud.size());
  for (const auto &p : cloud)
  {
    bool inside = false;
    for (const auto &g : gap_centres)
    {
      if ((p - g).squaredNorm() <= r2)
      {
        inside = true;
        break;
      }
    }
    if (!inside)
      out.push_back(p);
  }
  return out;
}

namespace
{
Vec3 rotate_about(const Vec3 &v, const Vec3 &axis, double angle)
{
  return Eigen::AngleAxisd(angle, axis.normalized()) * v;
}
}  // namespace

BranchModel generate_random_branch(const RandomBranchParams &params, uint64_t seed)
{
  if (params.base_radius_min <= 0.0 || params.base_radius_max < params.base_radius_min ||
      params.length_min <= 0.0 || params.length_max < params.length_min || params.control_points_min < 2)
    throw InvalidParams("bad random branch parameters");
  Rng rng(seed);
  const double base_radius = rng.uniform(params.base_radius_min, params.base_radius_max);
  const double length = rng.uniform(params.length_min, params.length_max);
  const int count = params.control_points_min +
                    static_cast<int>(rng.below(static_cast<uint64_t>(params.control_points_max -
                                                                     params.control_points_min + 1)));

  const double elevation = deg2rad(rng.uniform(params.angle_from_trunk_min_deg, params.angle_from_trunk_max_deg));
  const double azimuth = rng.uniform(0.0, 2.0 * kPi);
  Vec3 dir(std::sin(elevation) * std::cos(azimuth), std::sin(elevation) * std::sin(azimuth),
           std::cos(elevation));

  const double step = length / (count - 1);
  std::vector<SkeletalSphere> spheres(static_cast<size_t>(count));
  Vec3 p = Vec3::Zero();
  TaperProfile taper;
  taper.base_radius = base_radius;
  for (int i = 0; i < count; i++)
  {
    spheres[static_cast<size_t>(i)] = SkeletalSphere{p, std::max(taper.radius_at(i * step), 1e-4)};
    const Vec3 perp = rotate_about(any_perpendicular(dir), dir, rng.uniform(0.0, 2.0 * kPi));
    const double turn = deg2rad(params.turn_per_step_deg) * rng.uniform01();
    dir = rotate_about(dir, perp, turn);
    // gentle droop so long branches bend downward like real laterals
    const Vec3 droop_axis = dir.cross(Vec3(0, 0, -1));
    if (droop_axis.norm() > 1e-9)
      dir = rotate_about(dir, droop_axis, deg2rad(0.3 * params.turn_per_step_deg) * rng.uniform01());
    p += step * dir;
  }
  return fit_spline(spheres);
}

TreeModel generate_tree_unit(const TreeUnitParams &params, uint64_t seed)
{
  if (params.depth < 1 || params.branches_per_unit < 0 || params.radius_decay <= 0.0 ||
      params.radius_decay > 1.0 || params.branch_angle_min_deg <= 0.0 ||
      params.branch_angle_max_deg >= 90.0 || params.branch_angle_min_deg > params.branch_angle_max_deg ||
      params.unit_length_min <= 0.0 || params.unit_length_max < params.unit_length_min ||
      params.trunk_base_radius <= 0.0)
    throw InvalidParams("bad tree unit parameters");

  Rng rng(seed);

  // central leader: two sub-segments per unit with a slight random tilt
  std::vector<SkeletalSphere> trunk_spheres;
  std::vector<double> unit_start_arc(static_cast<size_t>(params.depth) + 1, 0.0);
  Vec3 p = Vec3::Zero();
  Vec3 dir(0, 0, 1);
  double chord_arc = 0.0;
  trunk_spheres.push_back(SkeletalSphere{p, params.trunk_base_radius});
  for (int u = 0; u < params.depth; u++)
  {
    unit_start_arc[static_cast<size_t>(u)] = chord_arc;
    const double unit_length = rng.uniform(params.unit_length_min, params.unit_length_max);
    const double radius = params.trunk_base_radius * std::pow(params.radius_decay, u + 1);
    for (int half = 0; half < 2; half++)
    {
      const Vec3 perp = rotate_about(any_perpendicular(dir), dir, rng.uniform(0.0, 2.0 * kPi));
      dir = rotate_about(dir, perp, deg2rad(rng.uniform(0.0, 6.0)));
      p += 0.5 * unit_length * dir;
      chord_arc += 0.5 * unit_length;
      trunk_spheres.push_back(SkeletalSphere{p, std::max(radius, 1e-4)});
    }
  }
  unit_start_arc[static_cast<size_t>(params.depth)] = chord_arc;

  const double tip_radius = params.trunk_base_radius * std::pow(params.radius_decay, params.depth);
  const double trunk_taper_deg =
    rad2deg(std::atan2(tip_radius - params.trunk_base_radius, std::max(chord_arc, 1e-9)));
  BranchModel trunk(CatmullRomSpline([&] {
                      std::vector<Vec3> centres(trunk_spheres.size());
                      for (size_t i = 0; i < trunk_spheres.size(); i++) centres[i] = trunk_spheres[i].centre;
                      return centres;
                    }()),
                    TaperProfile{params.trunk_base_radius, trunk_taper_deg, 1e-4}, "T");

  TreeModel tree;
  tree.trunk = trunk;
  tree.provenance = Provenance{Provenance::TreeUnit, seed};

  const double trunk_length = trunk.length();
  int branch_index = 0;
  for (int u = 0; u < params.depth; u++)
  {
    const double s_lo = unit_start_arc[static_cast<size_t>(u)];
    const double s_hi = unit_start_arc[static_cast<size_t>(u) + 1];
    for (int j = 0; j < params.branches_per_unit; j++)
    {
      const double s_att = std::min(s_lo + rng.uniform(0.15, 0.85) * (s_hi - s_lo), trunk_length);
      const double theta = static_cast<double>(branch_index) * 2.0 * kPi * 0.381966 + rng.uniform(-0.3, 0.3);
      const Vec3 base = trunk.surface_point(s_att, theta);
      const Vec3 tangent = trunk.tangent(s_att);
      Vec3 normal, binormal;
      trunk.frame(s_att, normal, binormal);
      const Vec3 outward = std::cos(theta) * normal + std::sin(theta) * binormal;
      const double depart = deg2rad(rng.uniform(params.branch_angle_min_deg, params.branch_angle_max_deg));
      Vec3 lat_dir = std::cos(depart) * tangent + std::sin(depart) * outward;

      const double lat_length = rng.uniform(0.5, 0.9) * (s_hi - s_lo);
      const double lat_radius = std::max(0.6 * trunk.radius_at(s_att), 2e-3);
      constexpr int kLatPoints = 4;
      std::vector<SkeletalSphere> lat_spheres(kLatPoints);
      Vec3 q = base;
      TaperProfile lat_taper;
      lat_taper.base_radius = lat_radius;
      for (int i = 0; i < kLatPoints; i++)
      {
        const double s_here = lat_length * static_cast<double>(i) / (kLatPoints - 1);
        lat_spheres[static_cast<size_t>(i)] = SkeletalSphere{q, std::max(lat_taper.radius_at(s_here), 1e-4)};
        const Vec3 droop_axis = lat_dir.cross(Vec3(0, 0, -1));
        if (droop_axis.norm() > 1e-9)
          lat_dir = rotate_about(lat_dir, droop_axis, deg2rad(rng.uniform(0.0, 5.0)));
        q += (lat_length / (kLatPoints - 1)) * lat_dir;
      }
      BranchModel lateral = fit_spline(lat_spheres);
      char id[16];
      std::snprintf(id, sizeof(id), "b%02d", branch_index);
      lateral.set_id(id);
      tree.branches.push_back(TreeModel::Attachment{std::move(lateral), s_att / trunk_length});
      branch_index++;
    }
  }
  return tree;
}

}  // namespace branch
