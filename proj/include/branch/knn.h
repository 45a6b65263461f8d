#ifndef BRANCH_KNN_H
#define BRANCH_KNN_H

#include <cstddef>
#include <vector>

#include "branch/maths.h"

namespace branch
{
/// Exact nearest-neighbour search over a fixed point set. Median-split kd-tree
/// with brute force inside leaves. Ties on distance resolve to the lowest
/// point index, which keeps loss subgradients deterministic.
class KdTree
{
public:
  explicit KdTree(const Cloud &points);

  /// Index of the exact nearest point to @p query (lowest index on ties).
  size_t nearest(const Vec3 &query) const;

  /// The k exact nearest points to points_[self], excluding self, ordered by
  /// (distance, index).
  std::vector<size_t> knn_of_point(size_t self, size_t k) const;

  /// The k exact nearest points to an arbitrary query, ordered by (distance, index).
  std::vector<size_t> knn(const Vec3 &query, size_t k) const;

  size_t size() const { return points_.size(); }
  const Cloud &points() const { return points_; }

private:
  struct Node
  {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    size_t left = 0, right = 0;   // child node indices
    size_t begin = 0, end = 0;    // index range for leaves
  };

  struct Best
  {
    double d2;
    size_t index;
    bool better_than(double other_d2, size_t other_index) const
    {
      return d2 < other_d2 || (d2 == other_d2 && index < other_index);
    }
  };

  size_t build(size_t begin, size_t end);
  void search_nearest(size_t node, const Vec3 &query, Best &best) const;
  template <class Accept>
  void search_knn(size_t node, const Vec3 &query, size_t k, const Accept &accept,
                  std::vector<std::pair<double, size_t>> &heap) const;

  Cloud points_;
  std::vector<size_t> order_;  // permutation of point indices, partitioned by the tree
  std::vector<Node> nodes_;
};

}  // namespace branch

#endif  // BRANCH_KNN_H
