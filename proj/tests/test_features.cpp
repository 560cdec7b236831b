#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scene_builders.hpp"
#include "seglabel/errors.hpp"
#include "seglabel/features.hpp"
#include "seglabel/rng.hpp"
#include "seglabel/segmentation.hpp"

using namespace seglabel;

namespace {

// Jittered colored patch, pushed directly so color can vary per point.
const Segment& add_random_patch(Scene& scene, Rng& rng, Vec3 center, bool vertical) {
  const double yaw = rng.uniform(0.0, 2.0 * M_PI);
  std::vector<int> indices;
  for (int ix = 0; ix < 7; ++ix)
    for (int iy = 0; iy < 7; ++iy) {
      Vec3 local{(ix / 6.0 - 0.5) * 0.4 + rng.normal(0.0, 0.004),
                 (iy / 6.0 - 0.5) * 0.4 + rng.normal(0.0, 0.004), rng.normal(0.0, 0.004)};
      if (vertical) local = {local.x, local.z, local.y};
      const Vec3 p = center + rotate_z(local, yaw);
      indices.push_back(static_cast<int>(scene.points.size()));
      scene.points.push_back(Point{
          p, {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}, 0});
    }
  scene.segments.push_back(make_segment(static_cast<int>(scene.segments.size()), indices, scene));
  return scene.segments.back();
}

}  // namespace

TEST_CASE("scatter eigenvalues separate plane, line, point and volume") {
  Scene scene = builders::empty_scene({0, 0, 4});

  SUBCASE("planar patch has one vanishing eigenvalue") {
    builders::add_patch_segment(scene, {0, 0, 0}, 1.0, 0.6, 9, 9, {0.5, 0.5, 0.5});
    const auto ev = scatter_eigenvalues(scene.segments[0], scene);
    CHECK(std::abs(ev[0]) < 1e-12);
    CHECK(ev[1] > 1e-3);
    CHECK(ev[2] > ev[1]);
  }

  SUBCASE("collinear points have two vanishing eigenvalues") {
    std::vector<int> indices;
    for (int i = 0; i < 50; ++i) {
      indices.push_back(static_cast<int>(scene.points.size()));
      scene.points.push_back(Point{{i * 0.01, 0.0, 0.3}, {0, 0, 0}, 0});
    }
    scene.segments.push_back(make_segment(0, indices, scene));
    const auto ev = scatter_eigenvalues(scene.segments[0], scene);
    CHECK(std::abs(ev[0]) < 1e-12);
    CHECK(std::abs(ev[1]) < 1e-12);
    CHECK(ev[2] > 1e-5);
  }

  SUBCASE("single point has all-zero scatter") {
    scene.points.push_back(Point{{0.3, 0.2, 0.1}, {0, 0, 0}, 0});
    scene.segments.push_back(make_segment(0, {0}, scene));
    const auto ev = scatter_eigenvalues(scene.segments[0], scene);
    for (double v : ev) CHECK(std::abs(v) < 1e-15);
  }

  SUBCASE("uniform cube matches the analytic variance 1/12 per axis") {
    Rng rng(7);
    std::vector<int> indices;
    for (int i = 0; i < 10000; ++i) {
      indices.push_back(static_cast<int>(scene.points.size()));
      scene.points.push_back(
          Point{{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}, {0, 0, 0}, 0});
    }
    scene.segments.push_back(make_segment(0, indices, scene));
    const auto ev = scatter_eigenvalues(scene.segments[0], scene);
    for (double v : ev) CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(0.12));
  }
}

TEST_CASE("node features: color histograms land in the constructed bins") {
  Scene scene = builders::empty_scene({0, 0, 3});
  builders::add_patch_segment(scene, {0, 0, 0}, 0.5, 0.5, 6, 6, {1.0, 0.0, 0.0});  // pure red
  const auto hull = scene_horizontal_hull(scene);
  const NodeFeatures f = compute_node_features(scene.segments[0], scene, hull);

  CHECK(f.visual[0] == doctest::Approx(1.0).epsilon(1e-9));  // hue 0 -> first bin
  for (int b = 1; b < 10; ++b) CHECK(f.visual[b] == 0.0);
  CHECK(f.visual[10] == 0.0);  // saturation 1 -> high bin
  CHECK(f.visual[11] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.visual[12] == 0.0);  // value 1 -> high bin
  CHECK(f.visual[13] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.visual[14] == 0.0);  // mean hue: every point sits at hue zero
  CHECK(f.visual[15] == doctest::Approx(1.0).epsilon(1e-9));            // mean saturation
  CHECK(f.visual[16] == doctest::Approx(1.0).epsilon(1e-9));            // mean value

  SUBCASE("cyan lands in the middle hue bin") {
    Scene cyan = builders::empty_scene({0, 0, 3});
    builders::add_patch_segment(cyan, {0, 0, 0}, 0.5, 0.5, 6, 6, {0.0, 1.0, 1.0});
    const NodeFeatures g =
        compute_node_features(cyan.segments[0], cyan, scene_horizontal_hull(cyan));
    CHECK(g.visual[5] == doctest::Approx(1.0).epsilon(1e-9));  // hue 0.5 -> bin 5
    CHECK(g.visual[14] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("node features: all four histogram blocks are L1-normalized") {
  Rng rng(11);
  Scene scene = builders::empty_scene({0.5, -0.5, 2.5});
  add_random_patch(scene, rng, {0, 0, 0.4}, false);
  add_random_patch(scene, rng, {0.7, 0.2, 0.9}, true);
  const auto hull = scene_horizontal_hull(scene);
  for (const Segment& seg : scene.segments) {
    const NodeFeatures f = compute_node_features(seg, scene, hull);
    auto block_sum = [&](int lo, int hi) {
      double s = 0.0;
      for (int b = lo; b < hi; ++b) s += f.visual[b];
      return s;
    };
    CHECK(block_sum(0, 10) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(block_sum(10, 12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(block_sum(12, 14) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(block_sum(17, 48) == doctest::Approx(1.0).epsilon(1e-9));
    for (int b = 17; b < 48; ++b) CHECK(f.visual[b] >= 0.0);
  }
}

TEST_CASE("node features: geometry block matches constructed scenes") {
  SUBCASE("tabletop: upward normal at table height, zero vertical extent") {
    Scene scene = builders::empty_scene({0, 0, 3});
    builders::add_patch_segment(scene, {0, 0, 0.72}, 1.0, 0.6, 8, 8, {0.4, 0.3, 0.2});
    const NodeFeatures f =
        compute_node_features(scene.segments[0], scene, scene_horizontal_hull(scene));
    CHECK(f.geometry[3] == doctest::Approx(1.0).epsilon(1e-9));   // normal z
    CHECK(f.geometry[4] == doctest::Approx(0.72).epsilon(1e-9));  // centroid height
    CHECK(f.geometry[5] == 0.0);  // vertical extent: all points share one z
    // Horizontal extent: the diagonal of the 1.0 x 0.6 rectangle.
    CHECK(f.geometry[6] == doctest::Approx(std::hypot(1.0, 0.6)).epsilon(1e-9));
  }

  SUBCASE("wall patch: horizontal normal, full height as vertical extent") {
    Scene scene = builders::empty_scene({0, -3, 1.5});
    builders::add_patch_segment(scene, {0, 0, 1.5}, 2.0, 1.0, 10, 10, {0.8, 0.8, 0.8}, true, 0.0);
    const NodeFeatures f =
        compute_node_features(scene.segments[0], scene, scene_horizontal_hull(scene));
    CHECK(std::abs(f.geometry[3]) < 1e-6);                       // normal z ~ 0
    CHECK(f.geometry[4] == doctest::Approx(1.5).epsilon(1e-9));  // centroid height
    CHECK(f.geometry[5] == doctest::Approx(1.0).epsilon(1e-9));  // vertical extent = height
    CHECK(f.geometry[6] == doctest::Approx(2.0).epsilon(1e-9));  // width in projection
  }

  SUBCASE("boundary distance: lone square's centroid sits half a side in") {
    Scene scene = builders::empty_scene({0, 0, 3});
    builders::add_patch_segment(scene, {0, 0, 0}, 1.0, 1.0, 9, 9, {0.5, 0.5, 0.5});
    const NodeFeatures f =
        compute_node_features(scene.segments[0], scene, scene_horizontal_hull(scene));
    CHECK(f.geometry[7] == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("linearness/planarness/scatter are the eigenvalue gaps") {
    Rng rng(3);
    Scene scene = builders::empty_scene({0, 0, 3});
    add_random_patch(scene, rng, {0, 0, 0.5}, false);
    const auto ev = scatter_eigenvalues(scene.segments[0], scene);
    const NodeFeatures f =
        compute_node_features(scene.segments[0], scene, scene_horizontal_hull(scene));
    CHECK(f.geometry[0] == doctest::Approx(ev[2] - ev[1]).epsilon(1e-12));
    CHECK(f.geometry[1] == doctest::Approx(ev[1] - ev[0]).epsilon(1e-12));
    CHECK(f.geometry[2] == doctest::Approx(ev[0]).epsilon(1e-12));
  }
}

TEST_CASE("edge features: identical twin segments") {
  Scene scene = builders::empty_scene({0, 0, 3});
  builders::add_patch_segment(scene, {0.4, 0.1, 0.3}, 0.5, 0.5, 6, 6, {0.8, 0.3, 0.3});
  builders::add_patch_segment(scene, {0.4, 0.1, 0.3}, 0.5, 0.5, 6, 6, {0.8, 0.3, 0.3});
  const Segment a = scene.segments[0];
  const Segment b = scene.segments[1];
  const double md = min_segment_distance(a, b, scene);
  CHECK(md == 0.0);
  const EdgeFeatures f = compute_edge_features(a, b, scene, md);

  CHECK(f.object_associative[0] == 0.0);  // same mean hue
  CHECK(f.object_associative[1] == 0.0);  // same mean saturation
  CHECK(f.object_associative[2] == 0.0);  // same mean value
  // Zero plane offset hits the 1/min_distance cap.
  CHECK(f.object_associative[3] == doctest::Approx(100.0));
  CHECK(f.object_associative[4] == 1.0);  // touching and parallel -> convex

  CHECK(f.non_associative[0] == 0.0);                          // horizontal centroid distance
  CHECK(f.non_associative[1] == 0.0);                          // vertical displacement
  CHECK(f.non_associative[2] == doctest::Approx(1.0));         // normal dot
  CHECK(f.non_associative[3] == 0.0);                          // angle-to-vertical difference
  CHECK(f.non_associative[4] == 0.0);                          // closest-point distance
  CHECK(f.non_associative[5] == 0.0);                          // same horizontal range
}

TEST_CASE("edge features: monitor above table reads +0.3 vertical displacement") {
  Scene scene = builders::empty_scene({0, -2, 1.2});
  builders::add_patch_segment(scene, {0, 0, 0.72}, 1.0, 0.6, 8, 8, {0.4, 0.3, 0.2});  // table
  builders::add_patch_segment(scene, {0, 0.2, 1.02}, 0.5, 0.3, 6, 6, {0.1, 0.1, 0.1}, true,
                              0.0);  // monitor face
  const Segment table = scene.segments[0];
  const Segment monitor = scene.segments[1];
  const double md = min_segment_distance(monitor, table, scene);
  const EdgeFeatures f = compute_edge_features(monitor, table, scene, md);
  CHECK(f.non_associative[1] == doctest::Approx(0.3).epsilon(1e-9));
  const EdgeFeatures r = compute_edge_features(table, monitor, scene, md);
  CHECK(r.non_associative[1] == doctest::Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("edge features: coplanar side-by-side patches score the cap and convexity") {
  Scene scene = builders::empty_scene({0, 0, 3});
  builders::add_patch_segment(scene, {-0.26, 0, 0.4}, 0.5, 0.5, 6, 6, {0.5, 0.5, 0.5});
  builders::add_patch_segment(scene, {0.26, 0, 0.4}, 0.5, 0.5, 6, 6, {0.5, 0.5, 0.5});
  const Segment a = scene.segments[0];
  const Segment b = scene.segments[1];
  const double md = min_segment_distance(a, b, scene);
  CHECK(md == doctest::Approx(0.02).epsilon(1e-9));
  const EdgeFeatures f = compute_edge_features(a, b, scene, md);
  CHECK(f.object_associative[3] == doctest::Approx(100.0));  // coplanar -> capped offset
  CHECK(f.object_associative[4] == 1.0);                     // near and parallel -> convex
}

TEST_CASE("edge features: non-parallel normals mark the coplanarity feature -1") {
  Scene scene = builders::empty_scene({0, -2, 2});
  builders::add_patch_segment(scene, {0, 0, 0.4}, 0.5, 0.5, 6, 6, {0.5, 0.5, 0.5});       // horizontal
  builders::add_patch_segment(scene, {0, 0.5, 0.65}, 0.5, 0.5, 6, 6, {0.5, 0.5, 0.5}, true,
                              0.0);  // vertical
  const double md = min_segment_distance(scene.segments[0], scene.segments[1], scene);
  const EdgeFeatures f = compute_edge_features(scene.segments[0], scene.segments[1], scene, md);
  CHECK(f.object_associative[3] == -1.0);
  CHECK(std::abs(f.non_associative[2]) < 1e-6);
}

TEST_CASE("edge features: in-front-of sign tracks horizontal viewing range") {
  Scene scene = builders::empty_scene({0, 0, 1.0});
  builders::add_patch_segment(scene, {1.0, 0, 0.2}, 0.3, 0.3, 5, 5, {0.5, 0.5, 0.5});
  builders::add_patch_segment(scene, {2.0, 0, 0.2}, 0.3, 0.3, 5, 5, {0.5, 0.5, 0.5});
  const double md = min_segment_distance(scene.segments[0], scene.segments[1], scene);
  // Segment 0 is horizontally nearer the camera: rh 1.0 versus 2.0.
  const EdgeFeatures f = compute_edge_features(scene.segments[0], scene.segments[1], scene, md);
  CHECK(f.non_associative[5] == -1.0);
  const EdgeFeatures r = compute_edge_features(scene.segments[1], scene.segments[0], scene, md);
  CHECK(r.non_associative[5] == 1.0);

  SUBCASE("a 1 cm dead zone suppresses the sign") {
    Scene near = builders::empty_scene({0, 0, 1.0});
    builders::add_patch_segment(near, {1.0, 0, 0.2}, 0.3, 0.3, 5, 5, {0.5, 0.5, 0.5});
    builders::add_patch_segment(near, {1.005, 0, 0.2}, 0.3, 0.3, 5, 5, {0.5, 0.5, 0.5});
    const double nd = min_segment_distance(near.segments[0], near.segments[1], near);
    const EdgeFeatures g = compute_edge_features(near.segments[0], near.segments[1], near, nd);
    CHECK(g.non_associative[5] == 0.0);
  }
}

TEST_CASE("edge features: endpoint swap negates exactly the direction-ordered entries") {
  Rng rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    Scene scene = builders::empty_scene({rng.uniform(-1, 1), rng.uniform(-1, 1), 2.5});
    add_random_patch(scene, rng,
                     {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.0, 1.5)},
                     rng.uniform() < 0.5);
    add_random_patch(scene, rng,
                     {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.0, 1.5)},
                     rng.uniform() < 0.5);
    const Segment a = scene.segments[0];
    const Segment b = scene.segments[1];
    const double md = min_segment_distance(a, b, scene);
    const EdgeFeatures fab = compute_edge_features(a, b, scene, md);
    const EdgeFeatures fba = compute_edge_features(b, a, scene, md);

    // Object-associative entries are exactly symmetric.
    for (int t = 0; t < kOaDim; ++t) CHECK(fab.object_associative[t] == fba.object_associative[t]);
    // Symmetric non-associative entries are bitwise equal; direction-ordered
    // ones negate bitwise (IEEE subtraction is antisymmetric).
    CHECK(fab.non_associative[0] == fba.non_associative[0]);
    CHECK(fab.non_associative[1] == -fba.non_associative[1]);
    CHECK(fab.non_associative[2] == fba.non_associative[2]);
    CHECK(fab.non_associative[3] == -fba.non_associative[3]);
    CHECK(fab.non_associative[4] == fba.non_associative[4]);
    CHECK(fab.non_associative[5] == -fba.non_associative[5]);
  }
}

namespace {

Scene transformed(const Scene& scene, double yaw, Vec3 t) {
  Scene out = scene;
  for (Point& p : out.points) p.position = rotate_z(p.position, yaw) + t;
  for (CameraView& v : out.views) v.origin = rotate_z(v.origin, yaw) + t;
  // Re-derive segments so all cached quantities match the moved points.
  for (Segment& s : out.segments) s = make_segment(s.id, s.point_indices, out);
  return out;
}

}  // namespace

TEST_CASE("features are invariant to horizontal rigid motion") {
  Rng rng(91);
  Scene scene = builders::empty_scene({0.3, -0.9, 2.4});
  add_random_patch(scene, rng, {0.2, 0.1, 0.45}, false);
  add_random_patch(scene, rng, {0.8, -0.3, 0.9}, true);
  const Scene moved = transformed(scene, 0.7, {1.3, -0.8, 0.0});

  const auto hull_a = scene_horizontal_hull(scene);
  const auto hull_b = scene_horizontal_hull(moved);
  for (size_t s = 0; s < scene.segments.size(); ++s) {
    const auto fa = compute_node_features(scene.segments[s], scene, hull_a).concatenated();
    const auto fb = compute_node_features(moved.segments[s], moved, hull_b).concatenated();
    REQUIRE(fa.size() == fb.size());
    for (size_t d = 0; d < fa.size(); ++d) CHECK(std::abs(fa[d] - fb[d]) < 1e-6);
  }

  const double md_a = min_segment_distance(scene.segments[0], scene.segments[1], scene);
  const double md_b = min_segment_distance(moved.segments[0], moved.segments[1], moved);
  CHECK(std::abs(md_a - md_b) < 1e-9);
  const EdgeFeatures ea = compute_edge_features(scene.segments[0], scene.segments[1], scene, md_a);
  const EdgeFeatures eb = compute_edge_features(moved.segments[0], moved.segments[1], moved, md_b);
  for (int t = 0; t < kOaDim; ++t)
    CHECK(std::abs(ea.object_associative[t] - eb.object_associative[t]) < 1e-6);
  for (int t = 0; t < kNaDim; ++t)
    CHECK(std::abs(ea.non_associative[t] - eb.non_associative[t]) < 1e-6);
}

TEST_CASE("vertical translation shifts only the centroid-height feature") {
  Rng rng(17);
  Scene scene = builders::empty_scene({0.0, -1.0, 2.0});
  add_random_patch(scene, rng, {0.0, 0.0, 0.5}, false);
  const double dz = 0.37;
  const Scene lifted = transformed(scene, 0.0, {0.0, 0.0, dz});

  const auto fa =
      compute_node_features(scene.segments[0], scene, scene_horizontal_hull(scene)).concatenated();
  const auto fb =
      compute_node_features(lifted.segments[0], lifted, scene_horizontal_hull(lifted)).concatenated();
  for (size_t d = 0; d < fa.size(); ++d) {
    if (d == static_cast<size_t>(kVisualDim) + 4)
      CHECK(fb[d] - fa[d] == doctest::Approx(dz).epsilon(1e-9));
    else
      CHECK(std::abs(fb[d] - fa[d]) < 1e-9);
  }
}

TEST_CASE("SceneGraph::build wires features to the edge set") {
  Scene scene = builders::empty_scene({0, 0, 3});
  builders::add_patch_segment(scene, {0, 0, 0.4}, 0.4, 0.4, 5, 5, {0.9, 0.1, 0.1});
  builders::add_patch_segment(scene, {0, 0, 0.8}, 0.4, 0.4, 5, 5, {0.1, 0.9, 0.1});
  builders::add_patch_segment(scene, {3, 0, 0.4}, 0.4, 0.4, 5, 5, {0.1, 0.1, 0.9});

  const SceneGraph g = SceneGraph::build(scene, 0.6);
  CHECK(g.num_segments() == 3);
  CHECK(g.node_dim == kNodeDim);
  REQUIRE(g.node_features.size() == 3);
  for (const auto& nf : g.node_features) CHECK(static_cast<int>(nf.size()) == kNodeDim);
  REQUIRE(g.edges.edges.size() == 1);  // only the stacked pair is within range
  REQUIRE(g.edge_features.size() == 1);

  // edge_between returns the stored features regardless of argument order.
  const EdgeFeatures& e01 = g.edge_between(0, 1);
  const EdgeFeatures& e10 = g.edge_between(1, 0);
  CHECK(&e01 == &e10);
  CHECK_THROWS_AS(g.edge_between(0, 2), data_error);

  // Features content agrees with direct computation.
  const auto hull = scene_horizontal_hull(scene);
  const auto direct = compute_node_features(scene.segments[1], scene, hull).concatenated();
  for (int d = 0; d < kNodeDim; ++d) CHECK(g.node_features[1][d] == direct[d]);

  SUBCASE("precomputed visual descriptors override the computed block") {
    Scene pre = scene;
    std::vector<double> custom(kVisualDim, 0.25);
    pre.precomputed_visual[pre.segments[0].id] = custom;
    const SceneGraph gp = SceneGraph::build(pre, 0.6);
    for (int d = 0; d < kVisualDim; ++d) CHECK(gp.node_features[0][d] == 0.25);
    // Geometry block still computed.
    for (int d = kVisualDim; d < kNodeDim; ++d)
      CHECK(gp.node_features[0][d] == g.node_features[0][d]);

    Scene bad = scene;
    bad.precomputed_visual[bad.segments[0].id] = std::vector<double>(kVisualDim - 1, 0.0);
    CHECK_THROWS_AS(SceneGraph::build(bad, 0.6), data_error);
  }
}

TEST_CASE("feature parameter validation rejects non-positive knobs") {
  FeatureParams p;
  p.coplanarity_alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), config_error);
  p = FeatureParams{};
  p.convexity_tau = -0.1;
  CHECK_THROWS_AS(p.validate(), config_error);
  p = FeatureParams{};
  p.gradient_knn = 1;
  CHECK_THROWS_AS(p.validate(), config_error);
  CHECK_NOTHROW(FeatureParams{}.validate());
}
