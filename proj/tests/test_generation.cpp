#include <doctest.h>

#include "branch/branch_model.h"
#include "branch/errors.h"
#include "branch/rng.h"
#include "branch/synth.h"
#include "oracles.h"

using namespace branch;

namespace
{
BranchModel straight_cylinder(double radius = 0.01, double length = 1.0)
{
  std::vector<SkeletalSphere> spheres = {SkeletalSphere{Vec3(0, 0, 0), radius},
                                         SkeletalSphere{Vec3(0, 0, length), radius}};
  return fit_spline(spheres, 0.0);
}
}  // namespace

TEST_CASE("fit_spline: two spheres give a straight unit segment")
{
  const BranchModel model = fit_spline(
    {SkeletalSphere{Vec3(0, 0, 0), 0.01}, SkeletalSphere{Vec3(0, 0, 1), 0.01}});
  CHECK(model.length() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model.taper().base_radius == 0.01);
  CHECK(model.taper().taper_angle_deg == doctest::Approx(-0.5));  // default taper
}

TEST_CASE("fit_spline: collinear spheres give a straight spline")
{
  const BranchModel model = fit_spline({SkeletalSphere{Vec3(0, 0, 0), 0.01},
                                        SkeletalSphere{Vec3(0, 0, 0.5), 0.01},
                                        SkeletalSphere{Vec3(0, 0, 1), 0.01}});
  double max_dev = 0.0;
  for (int i = 0; i <= 1000; i++)
  {
    const Vec3 p = model.centreline(model.length() * i / 1000.0);
    max_dev = std::max(max_dev, point_segment_distance(p, Vec3(0, 0, 0), Vec3(0, 0, 1)));
  }
  CHECK(max_dev < 1e-9);
}

TEST_CASE("fit_spline rejects degenerate skeletons")
{
  CHECK_THROWS_AS(fit_spline({SkeletalSphere{Vec3(0, 0, 0), 0.01}}), DegenerateSkeleton);
  CHECK_THROWS_AS(fit_spline({SkeletalSphere{Vec3(0, 0, 0), 0.01}, SkeletalSphere{Vec3(0, 0, 0), 0.01}}),
                  DegenerateSkeleton);
}

TEST_CASE("tube surface: cylinder point sits at the radius")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const Vec3 p = model.surface_point(0.5, 0.0);
  CHECK((p - Vec3(0, 0, 0.5)).norm() == doctest::Approx(0.010).epsilon(1e-9));
}

TEST_CASE("tube surface: taper formula and clamp")
{
  // r(1.0) = 0.02 + tan(-0.5 deg) = 0.02 - 0.0087269...
  std::vector<SkeletalSphere> spheres = {SkeletalSphere{Vec3(0, 0, 0), 0.02},
                                         SkeletalSphere{Vec3(0, 0, 1), 0.02}};
  const BranchModel tapered = fit_spline(spheres, -0.5);
  CHECK(std::tan(deg2rad(-0.5)) == doctest::Approx(-0.0087269).epsilon(1e-4));
  CHECK(tapered.radius_at(1.0) == doctest::Approx(0.02 + std::tan(deg2rad(-0.5))).epsilon(1e-12));
  CHECK(tapered.radius_at(1.0) == doctest::Approx(0.011273).epsilon(1e-4));

  std::vector<SkeletalSphere> thin = {SkeletalSphere{Vec3(0, 0, 0), 0.005},
                                      SkeletalSphere{Vec3(0, 0, 1), 0.005}};
  const BranchModel clamped = fit_spline(thin, -0.5, 0.001);
  CHECK(clamped.radius_at(1.0) == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("tube surface rejects out-of-range stations")
{
  const BranchModel model = straight_cylinder();
  CHECK_THROWS_AS(model.surface_point(-0.1, 0.0), OutOfRange);
  CHECK_THROWS_AS(model.surface_point(model.length() + 0.1, 0.0), OutOfRange);
}

TEST_CASE("sample_complete: points sit on the surface and runs are bitwise identical")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const Cloud cloud = sample_complete(model, 10000, 7);
  REQUIRE(cloud.size() == 10000);
  for (const auto &p : cloud)
  {
    const double axis_dist = std::sqrt(p.x() * p.x() + p.y() * p.y());
    CHECK(axis_dist > 0.01 - 1e-9);
    CHECK(axis_dist < 0.01 + 1e-9);
  }
  const Cloud again = sample_complete(model, 10000, 7);
  REQUIRE(again.size() == cloud.size());
  for (size_t i = 0; i < cloud.size(); i++) CHECK(cloud[i] == again[i]);
}

TEST_CASE("sample_complete: area uniformity over the two halves of a cylinder")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const size_t n = 4000;
  // per-seed counts stay within 4.5 sigma, and the pooled count within 3 sigma
  const double sigma = std::sqrt(n * 0.25);
  size_t pooled = 0;
  for (uint64_t seed = 0; seed < 20; seed++)
  {
    const Cloud cloud = sample_complete(model, n, seed);
    size_t low = 0;
    for (const auto &p : cloud) low += p.z() < 0.5 ? 1 : 0;
    pooled += low;
    CHECK(std::abs(static_cast<double>(low) - n / 2.0) < 4.5 * sigma);
  }
  const double pooled_sigma = std::sqrt(20.0 * n * 0.25);
  CHECK(std::abs(static_cast<double>(pooled) - 20.0 * n / 2.0) < 3.0 * pooled_sigma);
}

TEST_CASE("sample_complete: on-surface within 1e-9 for a curved branch")
{
  Rng rng(9);
  std::vector<SkeletalSphere> spheres;
  Vec3 p(0, 0, 0);
  for (int i = 0; i < 6; i++)
  {
    spheres.push_back(SkeletalSphere{p, 0.015});
    p += Vec3(0.08, rng.uniform(-0.05, 0.05), 0.15);
  }
  const BranchModel model = fit_spline(spheres, -0.5);
  const Cloud cloud = sample_complete(model, 500, 3);
  for (const auto &q : cloud)
  {
    const double s = model.closest_arc(q);
    const double dist = (q - model.centreline(s)).norm();
    CHECK(std::abs(dist - model.radius_at(s)) < 1e-9);
  }
}

TEST_CASE("resample_skeleton: straight segment lands on the uniform stations")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const auto points = resample_skeleton(model, 100);
  REQUIRE(points.size() == 100);
  for (size_t i = 0; i < 100; i++)
  {
    CHECK(points[i].z() == doctest::Approx(static_cast<double>(i) / 99.0).epsilon(1e-9));
    CHECK(std::abs(points[i].x()) < 1e-12);
  }
}

TEST_CASE("resample_skeleton: quarter-circle gaps uniform against the chord oracle")
{
  // quarter circle of radius 1 in the xz-plane, approximated by 33 arc samples
  std::vector<SkeletalSphere> spheres;
  const int m = 33;
  for (int i = 0; i < m; i++)
  {
    const double a = 0.5 * kPi * i / (m - 1);
    spheres.push_back(SkeletalSphere{Vec3(std::sin(a), 0.0, 1.0 - std::cos(a)), 0.01});
  }
  const BranchModel model = fit_spline(spheres);
  const auto points = resample_skeleton(model, 5);
  REQUIRE(points.size() == 5);

  const oracle::ArcLengthOracle ora(model.spline(), 3000);
  const double expected_gap = ora.total() / 4.0;
  CHECK(ora.total() == doctest::Approx(0.5 * kPi).epsilon(2e-4));
  for (size_t i = 0; i + 1 < points.size(); i++)
  {
    const auto [s0, u0] = ora.project(points[i]);
    const auto [s1, u1] = ora.project(points[i + 1]);
    const double gap = ora.arc_at(s1, u1) - ora.arc_at(s0, u0);
    CHECK(std::abs(gap - expected_gap) < 0.001 * expected_gap);
  }
  CHECK((points.front() - model.centreline(0.0)).norm() < 1e-12);
  CHECK((points.back() - model.centreline(model.length())).norm() < 1e-12);
}

TEST_CASE("render_partial: far side of a cylinder is invisible from +x")
{
  const BranchModel model = straight_cylinder(0.02, 1.0);
  ViewConfig view;
  view.viewpoint = Vec3(2.0, 0.0, 0.5);
  view.target_count = 2048;
  view.grid_resolution = 192;
  const Cloud cloud = render_partial(model, view, 1);
  REQUIRE(cloud.size() == 2048);
  for (const auto &p : cloud) CHECK(p.x() >= -1e-9);
}

TEST_CASE("render_partial: points lie on the tube and are first hits")
{
  Rng rng(21);
  std::vector<SkeletalSphere> spheres;
  Vec3 pos(0, 0, 0);
  for (int i = 0; i < 5; i++)
  {
    spheres.push_back(SkeletalSphere{pos, 0.02});
    pos += Vec3(0.1, rng.uniform(-0.08, 0.08), 0.2);
  }
  const BranchModel model = fit_spline(spheres, -0.5);
  ViewConfig view;
  view.viewpoint = Vec3(1.5, 1.2, 0.4);
  view.target_count = 512;
  view.grid_resolution = 128;
  const Cloud cloud = render_partial(model, view, 5);
  REQUIRE(cloud.size() == 512);
  for (const auto &p : cloud)
  {
    const double s = model.closest_arc(p);
    CHECK(std::abs((p - model.centreline(s)).norm() - model.radius_at(s)) < 1e-9);
  }

  // visibility re-cast: approximate the tube by dense spheres on the centreline
  // and check that no entry point sits strictly closer than the returned point
  for (size_t i = 0; i < cloud.size(); i += 16)
  {
    const double s_p = model.closest_arc(cloud[i]);
    const double r_max = model.radius_at(0.0);
    if (s_p < 3.0 * r_max || s_p > model.length() - 3.0 * r_max)
      continue;  // sphere end caps stick out past the open tube ends
    const Vec3 dir = (cloud[i] - view.viewpoint).normalized();
    const double expected = (cloud[i] - view.viewpoint).norm();
    double first_hit = std::numeric_limits<double>::max();
    constexpr int kProbes = 4000;
    for (int k = 0; k <= kProbes; k++)
    {
      const double s = model.length() * k / kProbes;
      const Vec3 c = model.centreline(s);
      const double r = model.radius_at(s);
      const double t_close = (c - view.viewpoint).dot(dir);
      if (t_close <= 0.0)
        continue;
      const double d_min = (view.viewpoint + t_close * dir - c).norm();
      if (d_min <= r)
        first_hit = std::min(first_hit, t_close - std::sqrt(r * r - d_min * d_min));
    }
    REQUIRE(std::isfinite(first_hit));
    CHECK(expected <= first_hit + 1e-3);
  }
}

TEST_CASE("render_partial: empty view raises")
{
  const BranchModel model = straight_cylinder(0.005, 0.2);
  ViewConfig view;
  view.viewpoint = Vec3(4.0, 0, 0.1);
  view.target_count = 64;
  view.grid_resolution = 2;  // grid too coarse to hit a thin tube reliably from afar
  bool threw = false;
  try
  {
    (void)render_partial(model, view, 1);
  }
  catch (const EmptyView &)
  {
    threw = true;
  }
  // with a 2x2 grid over the padded bounds all rays can still hit; accept either
  // outcome but require determinism across repeats
  if (!threw)
  {
    const Cloud a = render_partial(model, view, 1);
    const Cloud b = render_partial(model, view, 1);
    CHECK(a.size() == b.size());
  }
}

TEST_CASE("render_partial rejects a viewpoint inside the model bounds")
{
  const BranchModel model = straight_cylinder(0.02, 1.0);
  ViewConfig view;
  view.viewpoint = Vec3(0.0, 0.0, 0.5);
  CHECK_THROWS_AS(render_partial(model, view, 1), InvalidParams);
}

TEST_CASE("corrupt_gaps: identity, annihilation and never adding points")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const Cloud cloud = sample_complete(model, 2000, 11);

  const Cloud untouched = corrupt_gaps(cloud, {Vec3(5, 5, 5)}, 0.1);
  REQUIRE(untouched.size() == cloud.size());
  for (size_t i = 0; i < cloud.size(); i++) CHECK(untouched[i] == cloud[i]);

  Vec3 centroid = Vec3::Zero();
  for (const auto &p : cloud) centroid += p;
  centroid /= static_cast<double>(cloud.size());
  const Cloud annihilated = corrupt_gaps(cloud, {centroid}, 10.0);
  CHECK(annihilated.empty());

  const Cloud holed = corrupt_gaps(cloud, {cloud[100], cloud[700]}, 0.03);
  CHECK(holed.size() < cloud.size());
  for (const auto &p : holed)
  {
    CHECK((p - cloud[100]).norm() > 0.03);
    CHECK((p - cloud[700]).norm() > 0.03);
  }
}

TEST_CASE("corrupt_gaps: a mid-height gap splits the cylinder in two components")
{
  const BranchModel model = straight_cylinder(0.01, 1.0);
  const Cloud cloud = sample_complete(model, 3000, 13);
  const Cloud holed = corrupt_gaps(cloud, {Vec3(0, 0, 0.5)}, 0.05);
  CHECK(oracle::connected_components(holed, 0.02) == 2);
}

TEST_CASE("generate_tree_unit: counts, monotone radii, surface attachment, determinism")
{
  TreeUnitParams params;
  params.depth = 3;
  params.branches_per_unit = 2;

  const TreeModel tree = generate_tree_unit(params, 99);
  CHECK(tree.branches.size() == 6);  // 2 laterals per unit x 3 units

  TreeUnitParams solo;
  solo.depth = 1;
  solo.branches_per_unit = 0;
  const TreeModel bare = generate_tree_unit(solo, 5);
  CHECK(bare.branches.empty());

  // radii monotonically non-increasing along every root-to-tip path
  for (const auto &att : tree.branches)
  {
    const double s_att = att.attachment_t * tree.trunk.length();
    CHECK(att.model.taper().base_radius <= tree.trunk.radius_at(s_att) + 1e-12);
    CHECK(att.model.radius_at(att.model.length()) <= att.model.radius_at(0.0) + 1e-12);
    CHECK(tree.trunk.radius_at(s_att) <= tree.trunk.radius_at(0.0) + 1e-12);
    // base point on the trunk surface within 1e-6
    const Vec3 base = att.model.centreline(0.0);
    const double s_near = tree.trunk.closest_arc(base);
    const double dist = (base - tree.trunk.centreline(s_near)).norm();
    CHECK(std::abs(dist - tree.trunk.radius_at(s_near)) < 1e-6);
    CHECK(att.attachment_t >= 0.0);
    CHECK(att.attachment_t <= 1.0);
  }

  const TreeModel again = generate_tree_unit(params, 99);
  REQUIRE(again.branches.size() == tree.branches.size());
  for (size_t i = 0; i < tree.branches.size(); i++)
    CHECK(again.branches[i].attachment_t == tree.branches[i].attachment_t);

  TreeUnitParams bad;
  bad.depth = 0;
  CHECK_THROWS_AS(generate_tree_unit(bad, 1), InvalidParams);
  bad = TreeUnitParams{};
  bad.branch_angle_max_deg = 95.0;
  CHECK_THROWS_AS(generate_tree_unit(bad, 1), InvalidParams);
  bad = TreeUnitParams{};
  bad.radius_decay = 0.0;
  CHECK_THROWS_AS(generate_tree_unit(bad, 1), InvalidParams);
}
