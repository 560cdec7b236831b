// Compares the OpenMP batch kernels against their serial reference
// implementations on a generated scene: normal estimation, graph
// construction, and full feature extraction. Prints wall times, speedup,
// and whether the outputs agree bit-for-bit.
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seglabel/features.hpp"
#include "seglabel/segmentation.hpp"
#include "seglabel/synthgen.hpp"

using namespace seglabel;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_seconds(F&& f, int repeats = 3) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock_type::now();
    f();
    best = std::min(best, std::chrono::duration<double>(clock_type::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, bool identical) {
  std::cout << "  " << std::left << std::setw(22) << name << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << serial << " s" << std::setw(10)
            << parallel << " s" << std::setw(9) << std::setprecision(2)
            << (parallel > 0 ? serial / parallel : 0.0) << "x   "
            << (identical ? "identical" : "MISMATCH") << "\n";
}

}  // namespace

int main() {
  SceneSpec spec = preset_separable();
  spec.points_per_part = 400;  // larger patches so the kernels have real work
  spec.seed = 42;
  const LabeledScene scene = generate_scene(spec);
  const double range = 0.3;

#ifdef _OPENMP
  std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "OpenMP not enabled; both columns run serially.\n";
#endif
  std::cout << "Scene: " << scene.scene.points.size() << " points, "
            << scene.scene.segments.size() << " segments\n\n";
  std::cout << "  " << std::left << std::setw(22) << "kernel" << std::right << std::setw(12)
            << "serial" << std::setw(12) << "parallel" << std::setw(10) << "speedup"
            << "   outputs\n";

  std::vector<Vec3> normals_serial, normals_parallel;
  const double t_ns = time_seconds([&] { normals_serial = estimate_normals_serial(scene.scene, 15); });
  const double t_np = time_seconds([&] { normals_parallel = estimate_normals(scene.scene, 15); });
  bool same = normals_serial.size() == normals_parallel.size();
  for (size_t i = 0; same && i < normals_serial.size(); ++i)
    same = normals_serial[i].x == normals_parallel[i].x &&
           normals_serial[i].y == normals_parallel[i].y &&
           normals_serial[i].z == normals_parallel[i].z;
  row("normal estimation", t_ns, t_np, same);

  EdgeSet edges_serial, edges_parallel;
  const double t_gs = time_seconds(
      [&] { edges_serial = build_graph_serial(scene.scene.segments, scene.scene, range); });
  const double t_gp =
      time_seconds([&] { edges_parallel = build_graph(scene.scene.segments, scene.scene, range); });
  same = edges_serial.edges.size() == edges_parallel.edges.size();
  for (size_t i = 0; same && i < edges_serial.edges.size(); ++i)
    same = edges_serial.edges[i].i == edges_parallel.edges[i].i &&
           edges_serial.edges[i].j == edges_parallel.edges[i].j &&
           edges_serial.edges[i].min_distance == edges_parallel.edges[i].min_distance;
  row("graph construction", t_gs, t_gp, same);

  SceneGraph graph_serial, graph_parallel;
  const double t_fs = time_seconds(
      [&] { graph_serial = SceneGraph::build(scene.scene, range, {}, /*parallel=*/false); });
  const double t_fp = time_seconds(
      [&] { graph_parallel = SceneGraph::build(scene.scene, range, {}, /*parallel=*/true); });
  same = graph_serial.node_features == graph_parallel.node_features &&
         graph_serial.edge_features.size() == graph_parallel.edge_features.size();
  for (size_t e = 0; same && e < graph_serial.edge_features.size(); ++e)
    same = graph_serial.edge_features[e].object_associative ==
               graph_parallel.edge_features[e].object_associative &&
           graph_serial.edge_features[e].non_associative ==
               graph_parallel.edge_features[e].non_associative;
  row("feature extraction", t_fs, t_fp, same);

  return 0;
}
