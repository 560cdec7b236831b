#pragma once

#include <vector>

#include "seglabel/scene.hpp"

namespace seglabel {

struct SegmentationParams {
  double normal_angle_threshold = 0.35;  // radians
  double continuity_distance = 0.05;     // meters
  int min_segment_points = 50;
  int normal_estimation_k = 15;

  void validate() const;
};

// Per-point normals from the k-nearest-neighbor scatter matrix (smallest
// eigenvector), oriented toward the point's own camera view origin. The
// parallel kernel and the serial reference return identical output.
std::vector<Vec3> estimate_normals(const Scene& scene, int k);
std::vector<Vec3> estimate_normals_serial(const Scene& scene, int k);

struct OverSegmentation {
  std::vector<Segment> segments;
  std::vector<int> dropped_points;  // members of undersized clusters that could not be merged
};

// Greedy region growing over the k-nearest-neighbor graph: a point joins its
// neighbor's region when the normal angle and point distance are within the
// thresholds. Seeds are visited in ascending point-index order, so the
// partition is deterministic. Undersized clusters are merged into the
// closest adjacent segment, or dropped (and reported) if none is adjacent.
OverSegmentation over_segment(const Scene& scene, const std::vector<Vec3>& normals,
                              const SegmentationParams& params);

// Exact minimum inter-point distance between two segments.
double min_segment_distance(const Segment& a, const Segment& b, const Scene& scene);
double min_segment_distance_serial(const Segment& a, const Segment& b, const Scene& scene);

struct Edge {
  int i = 0, j = 0;         // segment indices, i < j
  double min_distance = 0;  // exact closest-point distance
};

struct EdgeSet {
  double context_range = 0.0;
  std::vector<Edge> edges;  // sorted by (i, j)
};

// One edge per segment pair strictly closer than context_range.
EdgeSet build_graph(const std::vector<Segment>& segments, const Scene& scene, double context_range);
EdgeSet build_graph_serial(const std::vector<Segment>& segments, const Scene& scene,
                           double context_range);

}  // namespace seglabel
