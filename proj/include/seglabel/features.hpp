#pragma once

#include <array>
#include <vector>

#include "seglabel/scene.hpp"
#include "seglabel/segmentation.hpp"

namespace seglabel {

// Node descriptor layout (56 = 48 visual + 8 geometry):
//   visual[0..9]    hue histogram (10 bins, hard-binned, sums to 1)
//   visual[10..11]  saturation histogram (2 bins, sums to 1)
//   visual[12..13]  value histogram (2 bins, sums to 1)
//   visual[14..16]  mean H (circular), mean S, mean V
//   visual[17..47]  intensity-gradient orientation histogram (31 bins over
//                   [0,pi), soft-binned, magnitude weighted, sums to 1)
//   geometry[0..7]  linearness, planarness, scatter, normal-z, centroid
//                   height, bbox vertical extent, horizontal extent
//                   (diameter of the horizontal projection), distance from
//                   the scene's horizontal boundary
inline constexpr int kVisualDim = 48;
inline constexpr int kGeometryDim = 8;
inline constexpr int kNodeDim = kVisualDim + kGeometryDim;

// Edge descriptors. Object-associative block (5): |dH| (circular), |dS|,
// |dV|, coplanarity, convexity — all symmetric under endpoint swap.
// Non-associative block (6), direction-ordered for the stored edge (i, j):
//   [0] horizontal centroid distance        (symmetric)
//   [1] vertical displacement c_iz - c_jz   (antisymmetric)
//   [2] normal dot product                  (symmetric)
//   [3] acos(n_iz) - acos(n_jz)             (antisymmetric)
//   [4] closest-point distance              (symmetric)
//   [5] in-front-of sign(|rh_i| - |rh_j|)   (antisymmetric, {-1,0,+1} with a
//       1 cm dead zone)
inline constexpr int kOaDim = 5;
inline constexpr int kNaDim = 6;

struct FeatureParams {
  double coplanarity_alpha = 0.2;        // radians; parallel-normal threshold
  double convexity_tau = 0.1;            // meters; closest-distance gate
  double coplanarity_min_distance = 0.01;  // meters; caps 1/d at 100
  double infront_dead_zone = 0.01;       // meters on |rh_i| - |rh_j|
  int gradient_knn = 8;                  // neighbors for the intensity gradient fit

  void validate() const;
};

struct NodeFeatures {
  std::array<double, kVisualDim> visual{};
  std::array<double, kGeometryDim> geometry{};

  std::vector<double> concatenated() const;
};

struct EdgeFeatures {
  std::array<double, kOaDim> object_associative{};
  std::array<double, kNaDim> non_associative{};
};

// Eigenvalues of the segment's scatter (covariance) matrix, ascending.
std::array<double, 3> scatter_eigenvalues(const Segment& segment, const Scene& scene);

// `scene_hull` is the convex hull of the horizontal projection of all scene
// points (see scene_horizontal_hull); it feeds the boundary-distance feature.
NodeFeatures compute_node_features(const Segment& segment, const Scene& scene,
                                   const std::vector<Vec2>& scene_hull,
                                   const FeatureParams& params = {});

// Direction-ordered features for the edge (a, b); min_distance is the exact
// closest-point distance between the two segments.
EdgeFeatures compute_edge_features(const Segment& a, const Segment& b, const Scene& scene,
                                   double min_distance, const FeatureParams& params = {});

std::vector<Vec2> scene_horizontal_hull(const Scene& scene);

// Feature-annotated segment graph: the unit every model/inference call
// consumes. Building one extracts all node and edge descriptors (OpenMP
// batch kernels; `parallel=false` selects the serial reference path).
struct SceneGraph {
  Scene scene;
  EdgeSet edges;
  std::vector<std::vector<double>> node_features;  // node_dim each
  std::vector<EdgeFeatures> edge_features;         // aligned with edges.edges
  int node_dim = kNodeDim;

  int num_segments() const { return static_cast<int>(scene.segments.size()); }
  // Edge lookup by segment pair; throws data_error when (i,j) is not an edge.
  const EdgeFeatures& edge_between(int i, int j) const;

  static SceneGraph build(Scene scene, double context_range, const FeatureParams& params = {},
                          bool parallel = true);
};

}  // namespace seglabel
