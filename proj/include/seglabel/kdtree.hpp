#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "seglabel/geometry.hpp"

namespace seglabel {

// Static 3-d tree over a point array. Queries are deterministic: neighbors
// are ranked by (squared distance, point index).
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points) : pts_(points) {
    idx_.resize(pts_.size());
    for (size_t i = 0; i < idx_.size(); ++i) idx_[i] = static_cast<int>(i);
    nodes_.reserve(pts_.size());
    if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()), 0);
  }

  // k nearest neighbors of `query`. If `exclude` >= 0 that point index is
  // skipped (self-queries). Result sorted ascending by (distance, index).
  std::vector<int> knn(const Vec3& query, int k, int exclude = -1) const {
    using Item = std::pair<double, int>;  // (squared distance, index)
    std::priority_queue<Item> heap;       // max-heap keeps the k best
    search(root_, query, k, exclude, heap);
    std::vector<Item> items;
    items.reserve(heap.size());
    while (!heap.empty()) {
      items.push_back(heap.top());
      heap.pop();
    }
    std::sort(items.begin(), items.end());
    std::vector<int> out;
    out.reserve(items.size());
    for (const auto& [d2, i] : items) out.push_back(i);
    return out;
  }

 private:
  struct Node {
    int point = -1;
    int left = -1, right = -1;
    int axis = 0;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    auto coord = [&](int i) {
      const Vec3& p = pts_[i];
      return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
    };
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) { return coord(a) < coord(b) || (coord(a) == coord(b) && a < b); });
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({idx_[mid], -1, -1, axis});
    const int l = build(lo, mid, depth + 1);
    const int r = build(mid + 1, hi, depth + 1);
    nodes_[node_id].left = l;
    nodes_[node_id].right = r;
    return node_id;
  }

  void search(int node_id, const Vec3& q, int k, int exclude,
              std::priority_queue<std::pair<double, int>>& heap) const {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    const Vec3& p = pts_[node.point];
    if (node.point != exclude) {
      const std::pair<double, int> item{squared_distance(q, p), node.point};
      if (static_cast<int>(heap.size()) < k) {
        heap.push(item);
      } else if (item < heap.top()) {
        heap.pop();
        heap.push(item);
      }
    }
    const double qc = node.axis == 0 ? q.x : (node.axis == 1 ? q.y : q.z);
    const double pc = node.axis == 0 ? p.x : (node.axis == 1 ? p.y : p.z);
    const double diff = qc - pc;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, exclude, heap);
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top().first)
      search(far, q, k, exclude, heap);
  }

  const std::vector<Vec3>& pts_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace seglabel
