#include "seglabel/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "seglabel/kdtree.hpp"

namespace seglabel {

void FeatureParams::validate() const {
  if (coplanarity_alpha <= 0.0 || convexity_tau <= 0.0 || coplanarity_min_distance <= 0.0 ||
      infront_dead_zone < 0.0 || gradient_knn < 2)
    throw config_error("invalid feature parameters");
}

namespace {

struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

Hsv rgb_to_hsv(const std::array<double, 3>& rgb) {
  const double r = rgb[0], g = rgb[1], b = rgb[2];
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d > 0.0) {
    double h;
    if (mx == r)
      h = (g - b) / d;
    else if (mx == g)
      h = 2.0 + (b - r) / d;
    else
      h = 4.0 + (r - g) / d;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    out.h = h >= 1.0 ? 0.0 : h;
  }
  return out;
}

// Circular mean of hue values (period 1); falls back to 0 when the mean
// direction degenerates.
double circular_mean_hue(const std::vector<Hsv>& hsv) {
  double cs = 0.0, sn = 0.0;
  for (const auto& c : hsv) {
    cs += std::cos(2.0 * M_PI * c.h);
    sn += std::sin(2.0 * M_PI * c.h);
  }
  if (cs * cs + sn * sn < 1e-24) return 0.0;
  double h = std::atan2(sn, cs) / (2.0 * M_PI);
  if (h < 0.0) h += 1.0;
  return h >= 1.0 ? 0.0 : h;
}

double circular_hue_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

Hsv mean_hsv_of(const Segment& seg, const Scene& scene) {
  std::vector<Hsv> hsv;
  hsv.reserve(seg.point_indices.size());
  for (int idx : seg.point_indices) hsv.push_back(rgb_to_hsv(scene.points[idx].rgb));
  Hsv mean;
  for (const auto& c : hsv) {
    mean.s += c.s;
    mean.v += c.v;
  }
  const double n = static_cast<double>(hsv.size());
  mean.s /= n;
  mean.v /= n;
  mean.h = circular_mean_hue(hsv);
  return mean;
}

struct ScatterEigen {
  std::array<double, 3> values{};  // ascending
  std::array<Vec3, 3> vectors{};
};

ScatterEigen scatter_eigen(const Segment& seg, const Scene& scene) {
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int idx : seg.point_indices) {
    const Vec3 d = scene.points[idx].position - seg.centroid;
    Eigen::Vector3d v(d.x, d.y, d.z);
    scatter += v * v.transpose();
  }
  scatter /= static_cast<double>(seg.point_indices.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  ScatterEigen out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = es.eigenvalues()(i);
    const Eigen::Vector3d v = es.eigenvectors().col(i);
    out.vectors[i] = {v.x(), v.y(), v.z()};
  }
  return out;
}

double point_intensity(const Point& p) { return (p.rgb[0] + p.rgb[1] + p.rgb[2]) / 3.0; }

// 31-bin histogram of per-point intensity-gradient orientations in the
// segment's tangent plane. The reference direction is the principal scatter
// direction projected into the plane, so the histogram follows the segment
// under rigid motion; orientations are taken modulo pi and soft-binned so the
// descriptor varies continuously with the geometry.
void gradient_orientation_histogram(const Segment& seg, const Scene& scene,
                                    const ScatterEigen& eig, int gradient_knn, double* out31) {
  constexpr int kBins = 31;
  for (int b = 0; b < kBins; ++b) out31[b] = 0.0;

  const Vec3 n = seg.unit_normal;
  Vec3 e1{0, 0, 0};
  for (int cand = 2; cand >= 1; --cand) {
    const Vec3 v = eig.vectors[cand];
    const Vec3 proj = v - n * dot(v, n);
    if (norm(proj) > 1e-8) {
      e1 = normalized(proj);
      break;
    }
  }
  const int npts = static_cast<int>(seg.point_indices.size());
  if (squared_norm(e1) == 0.0 || npts < 3) {
    for (int b = 0; b < kBins; ++b) out31[b] = 1.0 / kBins;
    return;
  }
  const Vec3 e2 = normalized(cross(n, e1));

  std::vector<Vec3> pos(npts);
  for (int i = 0; i < npts; ++i) pos[i] = scene.points[seg.point_indices[i]].position;
  KdTree3 tree(pos);
  const int k = std::min(gradient_knn, npts - 1);

  double total = 0.0;
  for (int i = 0; i < npts; ++i) {
    const double ip = point_intensity(scene.points[seg.point_indices[i]]);
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (int j : tree.knn(pos[i], k, i)) {
      const Vec3 d = pos[j] - pos[i];
      const double u = dot(d, e1), v = dot(d, e2);
      const double di = point_intensity(scene.points[seg.point_indices[j]]) - ip;
      a11 += u * u;
      a12 += u * v;
      a22 += v * v;
      b1 += u * di;
      b2 += v * di;
    }
    const double det = a11 * a22 - a12 * a12;
    if (std::abs(det) < 1e-18) continue;
    const double gu = (a22 * b1 - a12 * b2) / det;
    const double gv = (a11 * b2 - a12 * b1) / det;
    const double mag = std::sqrt(gu * gu + gv * gv);
    if (mag < 1e-12) continue;
    double angle = std::atan2(gv, gu);  // (-pi, pi]
    if (angle < 0.0) angle += M_PI;     // orientation modulo pi
    if (angle >= M_PI) angle -= M_PI;
    const double p = angle / M_PI * kBins - 0.5;
    int b0 = static_cast<int>(std::floor(p));
    const double frac = p - b0;
    b0 = ((b0 % kBins) + kBins) % kBins;
    const int b1i = (b0 + 1) % kBins;
    out31[b0] += (1.0 - frac) * mag;
    out31[b1i] += frac * mag;
    total += mag;
  }
  if (total < 1e-12) {
    for (int b = 0; b < kBins; ++b) out31[b] = 1.0 / kBins;
  } else {
    for (int b = 0; b < kBins; ++b) out31[b] /= total;
  }
}

}  // namespace

std::array<double, 3> scatter_eigenvalues(const Segment& segment, const Scene& scene) {
  return scatter_eigen(segment, scene).values;
}

std::vector<Vec2> scene_horizontal_hull(const Scene& scene) {
  std::vector<Vec2> pts;
  pts.reserve(scene.points.size());
  for (const auto& p : scene.points) pts.push_back(horizontal(p.position));
  return convex_hull_2d(std::move(pts));
}

NodeFeatures compute_node_features(const Segment& segment, const Scene& scene,
                                   const std::vector<Vec2>& scene_hull, const FeatureParams& params) {
  params.validate();
  if (segment.point_indices.empty()) throw data_error("compute_node_features: empty segment");
  NodeFeatures f;

  // --- visual block ---
  std::vector<Hsv> hsv;
  hsv.reserve(segment.point_indices.size());
  for (int idx : segment.point_indices) hsv.push_back(rgb_to_hsv(scene.points[idx].rgb));
  const double inv_n = 1.0 / static_cast<double>(hsv.size());
  for (const auto& c : hsv) {
    const int hb = std::min(static_cast<int>(c.h * 10.0), 9);
    f.visual[hb] += inv_n;
    f.visual[10 + (c.s < 0.5 ? 0 : 1)] += inv_n;
    f.visual[12 + (c.v < 0.5 ? 0 : 1)] += inv_n;
  }
  const Hsv mean = mean_hsv_of(segment, scene);
  f.visual[14] = mean.h;
  f.visual[15] = mean.s;
  f.visual[16] = mean.v;

  const ScatterEigen eig = scatter_eigen(segment, scene);
  gradient_orientation_histogram(segment, scene, eig, params.gradient_knn, f.visual.data() + 17);

  // --- geometry block ---
  f.geometry[0] = eig.values[2] - eig.values[1];  // linearness
  f.geometry[1] = eig.values[1] - eig.values[0];  // planarness
  f.geometry[2] = eig.values[0];                  // scatter
  f.geometry[3] = segment.unit_normal.z;
  f.geometry[4] = segment.centroid.z;

  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
  std::vector<Vec2> flat;
  flat.reserve(segment.point_indices.size());
  for (int idx : segment.point_indices) {
    const Vec3& p = scene.points[idx].position;
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
    flat.push_back(horizontal(p));
  }
  f.geometry[5] = zmax - zmin;
  f.geometry[6] = max_pairwise_distance(convex_hull_2d(std::move(flat)));
  f.geometry[7] = distance_to_hull_boundary(horizontal(segment.centroid), scene_hull);
  return f;
}

EdgeFeatures compute_edge_features(const Segment& a, const Segment& b, const Scene& scene,
                                   double min_distance, const FeatureParams& params) {
  params.validate();
  EdgeFeatures f;

  const Hsv ca = mean_hsv_of(a, scene);
  const Hsv cb = mean_hsv_of(b, scene);
  f.object_associative[0] = circular_hue_distance(ca.h, cb.h);
  f.object_associative[1] = std::abs(ca.s - cb.s);
  f.object_associative[2] = std::abs(ca.v - cb.v);

  const double cos_alpha = std::cos(params.coplanarity_alpha);
  const double ndot = dot(a.unit_normal, b.unit_normal);
  const Vec3 dc = a.centroid - b.centroid;
  if (ndot >= cos_alpha) {
    // Plane offset, symmetrized over the two normals, capped where the
    // patches are closer than coplanarity_min_distance.
    const double d = 0.5 * (std::abs(dot(dc, a.unit_normal)) + std::abs(dot(dc, b.unit_normal)));
    f.object_associative[3] =
        d < params.coplanarity_min_distance ? 1.0 / params.coplanarity_min_distance : 1.0 / d;
  } else {
    f.object_associative[3] = -1.0;
  }

  const bool facing_each_other =
      dot(a.unit_normal, b.centroid - a.centroid) <= 0.0 && dot(b.unit_normal, a.centroid - b.centroid) <= 0.0;
  f.object_associative[4] =
      (min_distance < params.convexity_tau && (facing_each_other || ndot >= cos_alpha)) ? 1.0 : 0.0;

  f.non_associative[0] = std::hypot(dc.x, dc.y);
  f.non_associative[1] = a.centroid.z - b.centroid.z;
  f.non_associative[2] = ndot;
  f.non_associative[3] = std::acos(std::clamp(a.unit_normal.z, -1.0, 1.0)) -
                         std::acos(std::clamp(b.unit_normal.z, -1.0, 1.0));
  f.non_associative[4] = min_distance;
  const double rh_a = std::hypot(a.horizontal_ray.x, a.horizontal_ray.y);
  const double rh_b = std::hypot(b.horizontal_ray.x, b.horizontal_ray.y);
  const double diff = rh_a - rh_b;
  f.non_associative[5] = std::abs(diff) <= params.infront_dead_zone ? 0.0 : (diff > 0.0 ? 1.0 : -1.0);
  return f;
}

std::vector<double> NodeFeatures::concatenated() const {
  std::vector<double> out;
  out.reserve(kNodeDim);
  out.insert(out.end(), visual.begin(), visual.end());
  out.insert(out.end(), geometry.begin(), geometry.end());
  return out;
}

const EdgeFeatures& SceneGraph::edge_between(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (size_t e = 0; e < edges.edges.size(); ++e)
    if (edges.edges[e].i == i && edges.edges[e].j == j) return edge_features[e];
  throw data_error("no edge between segments " + std::to_string(i) + " and " + std::to_string(j));
}

SceneGraph SceneGraph::build(Scene scene, double context_range, const FeatureParams& params,
                             bool parallel) {
  params.validate();
  scene.validate();
  if (scene.segments.empty()) throw data_error("SceneGraph::build: scene has no segments");

  for (const auto& [id, vec] : scene.precomputed_visual)
    if (static_cast<int>(vec.size()) != kVisualDim)
      throw data_error("precomputed visual vector for segment " + std::to_string(id) +
                       " has wrong dimension");

  SceneGraph g;
  g.edges = parallel ? build_graph(scene.segments, scene, context_range)
                     : build_graph_serial(scene.segments, scene, context_range);

  const std::vector<Vec2> hull = scene_horizontal_hull(scene);
  const int n = static_cast<int>(scene.segments.size());
  g.node_features.resize(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    NodeFeatures f = compute_node_features(scene.segments[i], scene, hull, params);
    auto it = scene.precomputed_visual.find(scene.segments[i].id);
    if (it != scene.precomputed_visual.end())
      std::copy(it->second.begin(), it->second.end(), f.visual.begin());
    g.node_features[i] = f.concatenated();
  }

  const int ne = static_cast<int>(g.edges.edges.size());
  g.edge_features.resize(ne);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = g.edges.edges[e];
    g.edge_features[e] = compute_edge_features(scene.segments[edge.i], scene.segments[edge.j], scene,
                                               edge.min_distance, params);
  }

  g.scene = std::move(scene);
  return g;
}

}  // namespace seglabel
