#include "splatgeo/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splatgeo {

namespace {

constexpr int kLeafSize = 16;

struct Candidate {
  double d2;
  int idx;
};

// "worse" ordering for the bounded max-heap: larger distance first, larger
// index first on exact ties.
inline bool worse(const Candidate& a, const Candidate& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  return a.idx < b.idx;
}

struct BoundedHeap {
  explicit BoundedHeap(int k) : cap(k) { items.reserve(k); }

  void offer(double d2, int idx) {
    if (static_cast<int>(items.size()) < cap) {
      items.push_back({d2, idx});
      std::push_heap(items.begin(), items.end(), worse);
      return;
    }
    const Candidate& top = items.front();
    if (d2 < top.d2 || (d2 == top.d2 && idx < top.idx)) {
      std::pop_heap(items.begin(), items.end(), worse);
      items.back() = {d2, idx};
      std::push_heap(items.begin(), items.end(), worse);
    }
  }

  bool full() const { return static_cast<int>(items.size()) == cap; }
  double worst_d2() const { return items.front().d2; }

  NeighborList finish() {
    std::sort(items.begin(), items.end(), [](const Candidate& a, const Candidate& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      return a.idx < b.idx;
    });
    NeighborList out;
    out.indices.reserve(items.size());
    out.distances.reserve(items.size());
    for (const Candidate& c : items) {
      out.indices.push_back(c.idx);
      out.distances.push_back(std::sqrt(c.d2));
    }
    return out;
  }

  int cap;
  std::vector<Candidate> items;
};

}  // namespace

std::vector<std::string> validate(const NeighborList& n) {
  std::vector<std::string> v;
  if (n.indices.size() != n.distances.size()) v.push_back("length mismatch");
  for (std::size_t i = 0; i + 1 < n.distances.size(); ++i)
    if (n.distances[i] > n.distances[i + 1]) {
      v.push_back("distances not ascending");
      break;
    }
  for (double d : n.distances)
    if (!(d >= 0.0)) {
      v.push_back("negative distance");
      break;
    }
  return v;
}

KdTree::KdTree(const std::vector<Vec3>& points) : points_(points) {
  if (points_.empty()) throw std::invalid_argument("KdTree: empty point set");
  order_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(2 * points_.size() / kLeafSize + 8);
  root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[node_id].begin = begin;
    nodes_[node_id].end = end;
    return node_id;
  }

  // split along the widest axis
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     if (pa != pb) return pa < pb;
                     return a < b;
                   });

  const double split_value = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& n = nodes_[node_id];
  n.axis = axis;
  n.split = split_value;
  n.left = left;
  n.right = right;
  n.begin = n.end = 0;
  return node_id;
}

NeighborList KdTree::knn(int query_id, int k) const {
  if (query_id < 0 || query_id >= size())
    throw std::out_of_range("KdTree::knn: invalid point id");
  return knn_at(points_[query_id], k, query_id);
}

NeighborList KdTree::knn_at(const Vec3& query, int k, int exclude_id) const {
  if (k < 1) throw std::invalid_argument("KdTree::knn: k must be >= 1");
  BoundedHeap heap(std::min<int>(k, exclude_id >= 0 ? size() - 1 : size()));
  if (heap.cap == 0) return {};

  // iterative traversal, nearest child first
  struct Frame {
    int node;
    double plane_d2;
  };
  std::vector<Frame> stack;
  stack.reserve(64);
  stack.push_back({root_, 0.0});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (heap.full() && f.plane_d2 > heap.worst_d2()) continue;
    const Node& n = nodes_[f.node];
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        if (idx == exclude_id) continue;
        const double d2 = (points_[idx] - query).squaredNorm();
        heap.offer(d2, idx);
      }
      continue;
    }
    const double delta = query[n.axis] - n.split;
    const double plane_d2 = std::max(f.plane_d2, delta * delta);
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    stack.push_back({far, plane_d2});
    stack.push_back({near, f.plane_d2});
  }
  return heap.finish();
}

NeighborList KdTree::radius(int query_id, double r) const {
  if (query_id < 0 || query_id >= size())
    throw std::out_of_range("KdTree::radius: invalid point id");
  return radius_at(points_[query_id], r, query_id);
}

NeighborList KdTree::radius_at(const Vec3& query, double r, int exclude_id) const {
  if (!(r >= 0.0)) throw std::invalid_argument("KdTree::radius: negative radius");
  const double r2 = r * r;
  std::vector<Candidate> found;
  std::vector<int> stack;
  stack.reserve(64);
  stack.push_back(root_);
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        if (idx == exclude_id) continue;
        const double d2 = (points_[idx] - query).squaredNorm();
        if (d2 <= r2) found.push_back({d2, idx});
      }
      continue;
    }
    const double delta = query[n.axis] - n.split;
    if (delta <= r) stack.push_back(n.left);
    if (-delta <= r) stack.push_back(n.right);
  }
  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
  });
  NeighborList out;
  out.indices.reserve(found.size());
  out.distances.reserve(found.size());
  for (const Candidate& c : found) {
    out.indices.push_back(c.idx);
    out.distances.push_back(std::sqrt(c.d2));
  }
  return out;
}

NeighborList brute_force_knn(const std::vector<Vec3>& points, const Vec3& query,
                             int k, int exclude_id) {
  std::vector<Candidate> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(i) == exclude_id) continue;
    all.push_back({(points[i] - query).squaredNorm(), static_cast<int>(i)});
  }
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  NeighborList out;
  for (const Candidate& c : all) {
    out.indices.push_back(c.idx);
    out.distances.push_back(std::sqrt(c.d2));
  }
  return out;
}

}  // namespace splatgeo
