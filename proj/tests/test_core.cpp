#include <doctest.h>

#include "branch/errors.h"
#include "branch/knn.h"
#include "branch/maths.h"
#include "branch/rng.h"
#include "branch/spline.h"
#include "oracles.h"

using namespace branch;

TEST_CASE("spline interpolates its control points in order")
{
  Rng rng(11);
  std::vector<Vec3> pts;
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < 7; i++)
  {
    pts.push_back(p);
    p += Vec3(rng.uniform(0.05, 0.3), rng.uniform(-0.2, 0.2), rng.uniform(0.1, 0.4));
  }
  const CatmullRomSpline spline(pts);
  REQUIRE(spline.segment_count() == pts.size() - 1);
  for (size_t i = 0; i + 1 < pts.size(); i++)
  {
    CHECK((spline.eval(i, 0.0) - pts[i]).norm() < 1e-12);
    CHECK((spline.eval(i, 1.0) - pts[i + 1]).norm() < 1e-12);
  }
}

TEST_CASE("two-point spline is the straight segment")
{
  const CatmullRomSpline spline({Vec3(0, 0, 0), Vec3(0, 0, 1)});
  CHECK(spline.length() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i <= 100; i++)
  {
    const Vec3 q = spline.point_at_arc(i / 100.0);
    CHECK(point_segment_distance(q, Vec3(0, 0, 0), Vec3(0, 0, 1)) < 1e-12);
  }
}

TEST_CASE("collinear control points stay on the segment")
{
  const CatmullRomSpline spline({Vec3(0, 0, 0), Vec3(0, 0, 0.5), Vec3(0, 0, 1)});
  double max_dev = 0.0;
  for (int i = 0; i <= 1000; i++)
  {
    const double s = spline.length() * i / 1000.0;
    max_dev = std::max(max_dev, point_segment_distance(spline.point_at_arc(s), Vec3(0, 0, 0), Vec3(0, 0, 1)));
  }
  CHECK(max_dev < 1e-9);
}

TEST_CASE("degenerate inputs are rejected")
{
  CHECK_THROWS_AS(CatmullRomSpline({Vec3(0, 0, 0)}), DegenerateSkeleton);
  CHECK_THROWS_AS(CatmullRomSpline({Vec3(0, 0, 0), Vec3(0, 0, 0)}), DegenerateSkeleton);
  CHECK_THROWS_AS(CatmullRomSpline({Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 1)}), DegenerateSkeleton);
}

TEST_CASE("arc table agrees with the chord oracle")
{
  Rng rng(5);
  for (int trial = 0; trial < 5; trial++)
  {
    std::vector<Vec3> pts;
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < 6; i++)
    {
      pts.push_back(p);
      p += Vec3(rng.uniform(-0.1, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.05, 0.35));
    }
    const CatmullRomSpline spline(pts);
    const oracle::ArcLengthOracle ora(spline, 4000);
    CHECK(std::abs(spline.length() - ora.total()) < 1e-6 * ora.total());

    for (int i = 0; i <= 20; i++)
    {
      const double s = spline.length() * i / 20.0;
      const auto [seg, u] = spline.arc_to_param(s);
      CHECK(std::abs(ora.arc_at(seg, u) - s) < 1e-5 * std::max(1.0, spline.length()));
    }
  }
}

TEST_CASE("kd-tree matches brute force with lowest-index ties")
{
  Rng rng(17);
  Cloud cloud(300);
  for (auto &p : cloud)
    p = Vec3(rng.uniform(0, 1), rng.uniform(0, 1), std::floor(rng.uniform(0, 3)) * 0.25);
  // duplicate some points so ties actually occur
  for (int i = 0; i < 30; i++) cloud[rng.below(300)] = cloud[rng.below(300)];
  const KdTree tree(cloud);
  for (int q = 0; q < 200; q++)
  {
    const Vec3 query(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
    CHECK(tree.nearest(query) == oracle::brute_nearest(cloud, query));
  }
  // knn: ordered by (distance, index), excludes self
  for (size_t self = 0; self < 20; self++)
  {
    const auto got = tree.knn_of_point(self, 5);
    REQUIRE(got.size() == 5);
    std::vector<std::pair<double, size_t>> all;
    for (size_t i = 0; i < cloud.size(); i++)
    {
      if (i != self)
        all.emplace_back((cloud[i] - cloud[self]).squaredNorm(), i);
    }
    std::sort(all.begin(), all.end());
    for (size_t k = 0; k < 5; k++) CHECK(got[k] == all[k].second);
  }
}

TEST_CASE("rng streams are deterministic and name-separated")
{
  Rng a(42), b(42);
  for (int i = 0; i < 1000; i++) CHECK(a.uniform01() == b.uniform01());
  CHECK(derive_seed(1, "branch", 0) != derive_seed(1, "branch", 1));
  CHECK(derive_seed(1, "branch", 0) != derive_seed(2, "branch", 0));
  CHECK(derive_seed(1, "branch", 0) == derive_seed(1, "branch", 0));
  CHECK(derive_seed(1, "view", 3) != derive_seed(1, "render", 3));
}

TEST_CASE("transported frames stay orthonormal")
{
  Rng rng(3);
  Vec3 x0 = Vec3::Zero(), t0 = Vec3(0, 0, 1);
  Vec3 n = any_perpendicular(t0);
  for (int i = 0; i < 200; i++)
  {
    const Vec3 x1 = x0 + 0.01 * (t0 + 0.2 * Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Vec3 t1 = (t0 + 0.1 * Vec3(rng.normal(), rng.normal(), rng.normal())).normalized();
    n = transport_normal(x0, t0, n, x1, t1);
    CHECK(std::abs(n.norm() - 1.0) < 1e-12);
    CHECK(std::abs(n.dot(t1)) < 1e-12);
    x0 = x1;
    t0 = t1;
  }
}
