#include "branch/maths.h"

#include <atomic>
#include <thread>

namespace branch
{
double point_segment_distance(const Vec3 &p, const Vec3 &a, const Vec3 &b)
{
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0)
    return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Vec3 transport_normal(const Vec3 &x0, const Vec3 &t0, const Vec3 &n0, const Vec3 &x1, const Vec3 &t1)
{
  const Vec3 v1 = x1 - x0;
  const double c1 = v1.squaredNorm();
  Vec3 nl = n0, tl = t0;
  if (c1 > 0.0)
  {
    nl = n0 - (2.0 / c1) * v1.dot(n0) * v1;
    tl = t0 - (2.0 / c1) * v1.dot(t0) * v1;
  }
  const Vec3 v2 = t1 - tl;
  const double c2 = v2.squaredNorm();
  Vec3 n1 = nl;
  if (c2 > 0.0)
    n1 = nl - (2.0 / c2) * v2.dot(nl) * v2;
  // re-orthonormalise against numerical drift
  n1 -= n1.dot(t1) * t1;
  return n1.normalized();
}

void parallel_for(size_t count, const std::function<void(size_t)> &fn, int threads)
{
  if (count == 0)
    return;
  size_t worker_count = threads > 0 ? static_cast<size_t>(threads) : std::thread::hardware_concurrency();
  worker_count = std::max<size_t>(1, std::min(worker_count, count));
  if (worker_count == 1)
  {
    for (size_t i = 0; i < count; i++) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (size_t w = 0; w < worker_count; w++)
  {
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto &t : pool) t.join();
}

}  // namespace branch
