#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seglabel/errors.hpp"
#include "seglabel/geometry.hpp"

namespace seglabel {

struct Point {
  Vec3 position;
  std::array<double, 3> rgb{0.0, 0.0, 0.0};  // each in [0,1]
  int view_id = 0;
};

struct CameraView {
  int view_id = 0;
  Vec3 origin;
};

// A contiguous patch of points with the derived quantities every downstream
// module keys off: centroid c, unit normal n (oriented toward the camera that
// captured the patch, so ray . n < 0), the capture ray r = c - camera_origin
// and its horizontal projection rh.
struct Segment {
  int id = 0;
  std::vector<int> point_indices;
  int view_id = 0;
  Vec3 centroid;
  Vec3 unit_normal;
  Vec3 capture_ray;
  Vec2 horizontal_ray;
};

struct Scene {
  std::vector<CameraView> views;
  std::vector<Point> points;
  std::vector<Segment> segments;
  Vec3 gravity_up{0.0, 0.0, 1.0};
  // Optional externally computed 48-dim visual descriptors, keyed by segment id.
  std::map<int, std::vector<double>> precomputed_visual;

  const CameraView& view_by_id(int view_id) const;
  // Throws data_error on out-of-range indices, unknown view ids or segments
  // sharing points.
  void validate() const;
};

// Computes centroid, normal (smallest scatter eigenvector; degenerate
// fallbacks below), capture ray and horizontal ray for a point subset.
// Degenerate cases: a single point uses -normalize(ray); perfectly collinear
// sets take any perpendicular deterministically. The normal sign is flipped
// so dot(ray, normal) < 0; an exact zero dot keeps the lexicographically
// positive orientation.
Segment make_segment(int id, std::vector<int> point_indices, const Scene& scene);

enum class LabelMode { Exclusive, MultiLabel };

// K class names plus the part->object grouping used by object-associative
// edge potentials.
struct LabelSpace {
  std::vector<std::string> class_names;
  // object name -> class names of its parts. Classes absent from every object
  // are treated as singleton objects of their own.
  std::map<std::string, std::vector<std::string>> objects;
  LabelMode mode = LabelMode::Exclusive;

  int size() const { return static_cast<int>(class_names.size()); }
  int index_of(const std::string& name) const;  // -1 if unknown
  void validate() const;
};

// N x K assignment matrix. Entries are 0/1 for integral labelings; the
// relaxation additionally produces 0.5 entries.
class Labeling {
 public:
  Labeling() = default;
  Labeling(int n, int k) : n_(n), k_(k), v_(static_cast<size_t>(n) * k, 0.0) {}

  static Labeling from_classes(const std::vector<int>& classes, int k);

  int rows() const { return n_; }
  int cols() const { return k_; }
  double at(int i, int c) const { return v_[static_cast<size_t>(i) * k_ + c]; }
  double& at(int i, int c) { return v_[static_cast<size_t>(i) * k_ + c]; }
  const std::vector<double>& values() const { return v_; }

  bool is_integral() const;
  // Index of the single 1 in row i, -1 if the row is not one-hot.
  int class_of(int i) const;
  bool row_is_zero(int i) const;

  bool operator==(const Labeling& o) const { return n_ == o.n_ && k_ == o.k_ && v_ == o.v_; }

 private:
  int n_ = 0, k_ = 0;
  std::vector<double> v_;
};

struct ValidationReport {
  bool ok = true;
  std::vector<int> offending_segments;
};

// Checks mode constraints row by row: Exclusive requires exactly one 1 per
// row, MultiLabel requires binary entries. Dimension mismatch against the
// label space throws data_error (structural, not a per-row violation).
ValidationReport validate_labeling(const Labeling& labeling, const LabelSpace& space);

// Exclusive: number of segments whose class differs. MultiLabel: number of
// differing entries. Both labelings must be integral and same-shaped.
double hamming_loss(const Labeling& truth, const Labeling& predicted, LabelMode mode);

// A scene with ground-truth labels: the unit datasets are made of.
struct LabeledScene {
  Scene scene;
  Labeling truth;
  std::string id;
};

}  // namespace seglabel
