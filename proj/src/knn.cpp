#include "branch/knn.h"

#include <algorithm>
#include <numeric>

namespace branch
{
namespace
{
constexpr size_t kLeafSize = 16;
}

KdTree::KdTree(const Cloud &points)
  : points_(points)
{
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), size_t{0});
  if (!points_.empty())
  {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

size_t KdTree::build(size_t begin, size_t end)
{
  const size_t node_index = nodes_.size();
  nodes_.push_back(Node{});
  if (end - begin <= kLeafSize)
  {
    nodes_[node_index].begin = begin;
    nodes_[node_index].end = end;
    return node_index;
  }

  Bounds b;
  for (size_t i = begin; i < end; i++) b.extend(points_[order_[i]]);
  const Vec3 extent = b.max_bound - b.min_bound;
  int axis = 0;
  extent.maxCoeff(&axis);

  const size_t mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](size_t a, size_t c) { return points_[a][axis] < points_[c][axis]; });
  nodes_[node_index].axis = axis;
  nodes_[node_index].split = points_[order_[mid]][axis];
  const size_t left = build(begin, mid);
  const size_t right = build(mid, end);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

void KdTree::search_nearest(size_t node, const Vec3 &query, Best &best) const
{
  const Node &n = nodes_[node];
  if (n.axis < 0)
  {
    for (size_t i = n.begin; i < n.end; i++)
    {
      const size_t index = order_[i];
      const double d2 = (points_[index] - query).squaredNorm();
      if (!best.better_than(d2, index))
      {
        best.d2 = d2;
        best.index = index;
      }
    }
    return;
  }
  const double delta = query[n.axis] - n.split;
  const size_t near_child = delta < 0.0 ? n.left : n.right;
  const size_t far_child = delta < 0.0 ? n.right : n.left;
  search_nearest(near_child, query, best);
  if (delta * delta <= best.d2)
    search_nearest(far_child, query, best);
}

size_t KdTree::nearest(const Vec3 &query) const
{
  Best best{std::numeric_limits<double>::max(), std::numeric_limits<size_t>::max()};
  search_nearest(0, query, best);
  return best.index;
}

template <class Accept>
void KdTree::search_knn(size_t node, const Vec3 &query, size_t k, const Accept &accept,
                        std::vector<std::pair<double, size_t>> &heap) const
{
  const Node &n = nodes_[node];
  if (n.axis < 0)
  {
    for (size_t i = n.begin; i < n.end; i++)
    {
      const size_t index = order_[i];
      if (!accept(index))
        continue;
      const double d2 = (points_[index] - query).squaredNorm();
      const std::pair<double, size_t> cand{d2, index};
      if (heap.size() < k)
      {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      }
      else if (cand < heap.front())
      {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double delta = query[n.axis] - n.split;
  const size_t near_child = delta < 0.0 ? n.left : n.right;
  const size_t far_child = delta < 0.0 ? n.right : n.left;
  search_knn(near_child, query, k, accept, heap);
  if (heap.size() < k || delta * delta <= heap.front().first)
    search_knn(far_child, query, k, accept, heap);
}

std::vector<size_t> KdTree::knn_of_point(size_t self, size_t k) const
{
  std::vector<std::pair<double, size_t>> heap;
  heap.reserve(k + 1);
  search_knn(0, points_[self], k, [self](size_t index) { return index != self; }, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<size_t> result(heap.size());
  for (size_t i = 0; i < heap.size(); i++) result[i] = heap[i].second;
  return result;
}

std::vector<size_t> KdTree::knn(const Vec3 &query, size_t k) const
{
  std::vector<std::pair<double, size_t>> heap;
  heap.reserve(k + 1);
  search_knn(0, query, k, [](size_t) { return true; }, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<size_t> result(heap.size());
  for (size_t i = 0; i < heap.size(); i++) result[i] = heap[i].second;
  return result;
}

}  // namespace branch
