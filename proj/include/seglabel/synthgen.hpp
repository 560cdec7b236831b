#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seglabel/scene.hpp"

namespace seglabel {

// Per-class HSV color distribution (hue circular in [0,1)).
struct ColorModel {
  double mean_h = 0.5;
  double mean_s = 0.5;
  double mean_v = 0.5;
  double sigma = 0.05;
};

// One rectangular patch of points inside an assembly, becoming one segment.
struct PartSpec {
  std::string class_name;
  std::vector<std::string> extra_classes;  // further positives (MultiLabel mode)
  double width = 0.4;
  double depth = 0.4;
  bool vertical = false;  // horizontal (normal +-z) unless set
  double yaw = 0.0;       // in-plane heading / facing angle, radians
  double dz = 0.0;        // part center height above the assembly base
  double dz_jitter = 0.0;
  double horizontal_jitter = 0.0;  // +- offset from the assembly anchor, per axis
};

// A group of parts placed around one anchor; `count` instances per scene.
struct AssemblySpec {
  std::string name;
  std::vector<PartSpec> parts;
  int count = 1;
};

// Planted relation: every above_class segment must have some below_class
// segment whose centroid sits dz_min..dz_max below it within max_horizontal
// horizontally. The generator enforces a strictly stronger within-assembly
// form (every pair, band shrunk by a safety margin); the audit re-checks the
// emitted geometry against the stated form.
struct RelationRule {
  std::string name;
  std::string above_class;
  std::string below_class;
  double dz_min = 0.0;
  double dz_max = 0.0;
  double max_horizontal = 0.3;
};

struct SceneSpec {
  uint64_t seed = 1;
  LabelSpace label_space;
  std::vector<AssemblySpec> assemblies;
  std::vector<RelationRule> rules;
  std::map<std::string, ColorModel> colors;  // keyed by class name
  double sigma = 0.005;                      // point jitter stddev, meters
  int points_per_part = 60;                  // approximate; grid-rounded
  double spacing = 1.5;                      // anchor grid pitch
  double base_z_min = 0.0;
  double base_z_max = 0.0;
  int num_views = 1;
  bool separable = false;  // declares the linear-separability construction
  int retry_budget = 1000;

  // Structural checks; `separable` additionally requires color means spaced
  // >= 4 sigma (circular hue) and pairwise-disjoint rule bands.
  void validate() const;
};

// Deterministic generation: same spec (including seed) -> byte-identical
// scene. Every emitted scene satisfies the spec's rules by construction;
// exhausting the retry budget raises generation_error naming the rule.
LabeledScene generate_scene(const SceneSpec& spec, const std::string& id = "scene");

// n_scenes scenes with per-scene seeds derived from master_seed; ids
// "scene-000", "scene-001", ...
std::vector<LabeledScene> generate_dataset(const SceneSpec& spec, int n_scenes,
                                           uint64_t master_seed);

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Re-checks an emitted scene against the spec's relation rules using segment
// centroids and the ground-truth classes.
AuditReport audit_scene(const Scene& scene, const Labeling& truth, const SceneSpec& spec);

// Office-like, 6 classes, color-separable, with planted monitor/keyboard
// above-table relations; ~18 segments per scene.
SceneSpec preset_separable();

// `stacks` vertical 4-slab stacks per scene (classes slabA..slabD bottom-up,
// gap meters apart) at a random base height, with identical color models and
// patch shapes: node features carry no class signal, the vertical relations
// carry all of it.
SceneSpec preset_stacks(int stacks = 2, double gap = 0.2);

// Two-class vertical chains alternating slabB, slabA bottom-up. length = 2
// plants the "slabA above slabB" rule; length >= 3 declares no rules and the
// alternation demanded by pair potentials becomes unsatisfiable (frustrated).
SceneSpec preset_chain(int length, double gap = 0.2);

}  // namespace seglabel
