#include "seglabel/segmentation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "seglabel/kdtree.hpp"

namespace seglabel {

void SegmentationParams::validate() const {
  if (normal_angle_threshold <= 0.0) throw config_error("normal_angle_threshold must be positive");
  if (continuity_distance <= 0.0) throw config_error("continuity_distance must be positive");
  if (min_segment_points < 1) throw config_error("min_segment_points must be >= 1");
  if (normal_estimation_k < 3) throw config_error("normal_estimation_k must be >= 3");
}

namespace {

Vec3 normal_from_neighbors(const Scene& scene, int point, const std::vector<int>& neighbors) {
  const Vec3 p = scene.points[point].position;
  Vec3 mean = p;
  for (int q : neighbors) mean += scene.points[q].position;
  mean = mean / static_cast<double>(neighbors.size() + 1);

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  auto add = [&](const Vec3& v) {
    Eigen::Vector3d d(v.x - mean.x, v.y - mean.y, v.z - mean.z);
    scatter += d * d.transpose();
  };
  add(p);
  for (int q : neighbors) add(scene.points[q].position);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  const Eigen::Vector3d ev = es.eigenvectors().col(0);
  Vec3 n{ev.x(), ev.y(), ev.z()};

  const Vec3 to_camera = scene.view_by_id(scene.points[point].view_id).origin - p;
  const double d = dot(n, to_camera);
  if (d < 0.0) {
    n = -n;
  } else if (d == 0.0) {
    constexpr double tol = 1e-12;
    if (n.x < -tol || (std::abs(n.x) <= tol && (n.y < -tol || (std::abs(n.y) <= tol && n.z < 0.0))))
      n = -n;
  }
  return normalized(n);
}

std::vector<Vec3> positions_of(const Scene& scene) {
  std::vector<Vec3> pos(scene.points.size());
  for (size_t i = 0; i < pos.size(); ++i) pos[i] = scene.points[i].position;
  return pos;
}

}  // namespace

std::vector<Vec3> estimate_normals(const Scene& scene, int k) {
  const int n = static_cast<int>(scene.points.size());
  if (k < 1) throw config_error("estimate_normals: k must be >= 1");
  if (k >= n) throw data_error("estimate_normals: k exceeds point count");
  const std::vector<Vec3> pos = positions_of(scene);
  KdTree3 tree(pos);
  std::vector<Vec3> normals(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    normals[i] = normal_from_neighbors(scene, i, tree.knn(pos[i], k, i));
  return normals;
}

std::vector<Vec3> estimate_normals_serial(const Scene& scene, int k) {
  const int n = static_cast<int>(scene.points.size());
  if (k < 1) throw config_error("estimate_normals: k must be >= 1");
  if (k >= n) throw data_error("estimate_normals: k exceeds point count");
  const std::vector<Vec3> pos = positions_of(scene);
  KdTree3 tree(pos);
  std::vector<Vec3> normals(n);
  for (int i = 0; i < n; ++i)
    normals[i] = normal_from_neighbors(scene, i, tree.knn(pos[i], k, i));
  return normals;
}

OverSegmentation over_segment(const Scene& scene, const std::vector<Vec3>& normals,
                              const SegmentationParams& params) {
  params.validate();
  const int n = static_cast<int>(scene.points.size());
  if (static_cast<int>(normals.size()) != n)
    throw data_error("over_segment: normals/point count mismatch");

  const std::vector<Vec3> pos = positions_of(scene);
  KdTree3 tree(pos);
  const int k = std::min(params.normal_estimation_k, n - 1);
  std::vector<std::vector<int>> knn(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) knn[i] = tree.knn(pos[i], k, i);

  const double cos_threshold = std::cos(params.normal_angle_threshold);
  const double cont2 = params.continuity_distance * params.continuity_distance;
  auto compatible = [&](int p, int q) {
    return squared_distance(pos[p], pos[q]) <= cont2 && dot(normals[p], normals[q]) >= cos_threshold;
  };

  // Region growing, seeds in ascending point-index order.
  std::vector<int> region(n, -1);
  int region_count = 0;
  for (int seed = 0; seed < n; ++seed) {
    if (region[seed] >= 0) continue;
    const int r = region_count++;
    region[seed] = r;
    std::deque<int> frontier{seed};
    while (!frontier.empty()) {
      const int p = frontier.front();
      frontier.pop_front();
      for (int q : knn[p]) {
        if (region[q] < 0 && compatible(p, q)) {
          region[q] = r;
          frontier.push_back(q);
        }
      }
    }
  }

  std::vector<std::vector<int>> members(region_count);
  for (int i = 0; i < n; ++i) members[region[i]].push_back(i);

  // Adjacency between regions via k-nearest-neighbor pairs within the
  // continuity distance; the recorded distance is the closest such pair.
  std::map<std::pair<int, int>, double> adjacency;
  for (int p = 0; p < n; ++p) {
    for (int q : knn[p]) {
      const int a = region[p], b = region[q];
      if (a == b) continue;
      const double d2 = squared_distance(pos[p], pos[q]);
      if (d2 > cont2) continue;
      const auto key = std::minmax(a, b);
      auto [it, inserted] = adjacency.try_emplace({key.first, key.second}, d2);
      if (!inserted && d2 < it->second) it->second = d2;
    }
  }

  // Merge undersized regions into their closest adjacent region.
  std::vector<int> alias(region_count);
  for (int r = 0; r < region_count; ++r) alias[r] = r;
  auto resolve = [&](int r) {
    while (alias[r] != r) r = alias[r] = alias[alias[r]];
    return r;
  };
  bool merged = true;
  while (merged) {
    merged = false;
    for (int r = 0; r < region_count; ++r) {
      if (resolve(r) != r) continue;
      if (static_cast<int>(members[r].size()) >= params.min_segment_points) continue;
      int best = -1;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (const auto& [key, d2] : adjacency) {
        int other = -1;
        if (resolve(key.first) == r && resolve(key.second) != r) other = resolve(key.second);
        if (resolve(key.second) == r && resolve(key.first) != r) other = resolve(key.first);
        if (other < 0) continue;
        if (d2 < best_d2 || (d2 == best_d2 && other < best)) {
          best = other;
          best_d2 = d2;
        }
      }
      if (best >= 0) {
        alias[r] = best;
        auto& dst = members[best];
        dst.insert(dst.end(), members[r].begin(), members[r].end());
        members[r].clear();
        merged = true;
      }
    }
  }

  OverSegmentation out;
  for (int r = 0; r < region_count; ++r) {
    if (members[r].empty() || resolve(r) != r) continue;
    if (static_cast<int>(members[r].size()) < params.min_segment_points) {
      out.dropped_points.insert(out.dropped_points.end(), members[r].begin(), members[r].end());
      continue;
    }
    std::sort(members[r].begin(), members[r].end());
    out.segments.push_back(make_segment(static_cast<int>(out.segments.size()), members[r], scene));
  }
  std::sort(out.dropped_points.begin(), out.dropped_points.end());
  return out;
}

double min_segment_distance_serial(const Segment& a, const Segment& b, const Scene& scene) {
  double best = std::numeric_limits<double>::infinity();
  for (int pi : a.point_indices) {
    const Vec3 p = scene.points[pi].position;
    for (int qi : b.point_indices) best = std::min(best, squared_distance(p, scene.points[qi].position));
  }
  return std::sqrt(best);
}

double min_segment_distance(const Segment& a, const Segment& b, const Scene& scene) {
  const int na = static_cast<int>(a.point_indices.size());
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : best)
  for (int ii = 0; ii < na; ++ii) {
    const Vec3 p = scene.points[a.point_indices[ii]].position;
    for (int qi : b.point_indices) best = std::min(best, squared_distance(p, scene.points[qi].position));
  }
  return std::sqrt(best);
}

namespace {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  void add(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
};

double aabb_distance(const Aabb& a, const Aabb& b) {
  auto gap = [](double alo, double ahi, double blo, double bhi) {
    if (bhi < alo) return alo - bhi;
    if (ahi < blo) return blo - ahi;
    return 0.0;
  };
  const double dx = gap(a.lo.x, a.hi.x, b.lo.x, b.hi.x);
  const double dy = gap(a.lo.y, a.hi.y, b.lo.y, b.hi.y);
  const double dz = gap(a.lo.z, a.hi.z, b.lo.z, b.hi.z);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

template <typename DistanceFn>
EdgeSet build_graph_impl(const std::vector<Segment>& segments, const Scene& scene,
                         double context_range, bool parallel, DistanceFn distance_fn) {
  if (context_range <= 0.0) throw config_error("build_graph: context_range must be positive");
  const int m = static_cast<int>(segments.size());
  std::vector<Aabb> boxes(m);
  for (int i = 0; i < m; ++i)
    for (int idx : segments[i].point_indices) boxes[i].add(scene.points[idx].position);

  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      // The box gap lower-bounds the true minimum, so this cull is exact.
      if (aabb_distance(boxes[i], boxes[j]) < context_range) candidates.emplace_back(i, j);

  std::vector<double> dist(candidates.size());
  const int nc = static_cast<int>(candidates.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int c = 0; c < nc; ++c)
    dist[c] = distance_fn(segments[candidates[c].first], segments[candidates[c].second], scene);

  EdgeSet out;
  out.context_range = context_range;
  for (int c = 0; c < nc; ++c)
    if (dist[c] < context_range)
      out.edges.push_back({candidates[c].first, candidates[c].second, dist[c]});
  return out;
}

}  // namespace

EdgeSet build_graph(const std::vector<Segment>& segments, const Scene& scene, double context_range) {
  return build_graph_impl(segments, scene, context_range, true, min_segment_distance_serial);
}

EdgeSet build_graph_serial(const std::vector<Segment>& segments, const Scene& scene,
                           double context_range) {
  return build_graph_impl(segments, scene, context_range, false, min_segment_distance_serial);
}

}  // namespace seglabel
