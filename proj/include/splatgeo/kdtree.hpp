#pragma once

#include <vector>

#include "splatgeo/core.hpp"

namespace splatgeo {

/// k nearest neighbors of a query, self excluded. Distances ascend; exact
/// ties are broken by ascending point index.
struct NeighborList {
  std::vector<int> indices;
  std::vector<double> distances;

  std::size_t size() const { return indices.size(); }
};

std::vector<std::string> validate(const NeighborList& n);

/// Exact 3D k-d tree (median split). Immutable after construction; concurrent
/// queries are safe.
class KdTree {
 public:
  /// Throws std::invalid_argument on an empty point set.
  explicit KdTree(const std::vector<Vec3>& points);

  int size() const { return static_cast<int>(points_.size()); }

  /// Exact k nearest distinct points, excluding the query point itself.
  /// Returns fewer than k when the cloud is smaller. Throws on bad id.
  NeighborList knn(int query_id, int k) const;

  /// Same query for an arbitrary location; exclude_id < 0 keeps everything.
  NeighborList knn_at(const Vec3& query, int k, int exclude_id = -1) const;

  /// Every point with distance <= radius, excluding the query point, sorted
  /// like knn results.
  NeighborList radius(int query_id, double radius) const;
  NeighborList radius_at(const Vec3& query, double radius, int exclude_id = -1) const;

  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf payload range into order_
    int end = 0;
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Brute-force linear scan with the same contract as KdTree::knn. The serial
/// reference used by differential tests.
NeighborList brute_force_knn(const std::vector<Vec3>& points, const Vec3& query,
                             int k, int exclude_id = -1);

}  // namespace splatgeo
