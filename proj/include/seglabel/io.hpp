#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seglabel/model.hpp"
#include "seglabel/scene.hpp"
#include "seglabel/synthgen.hpp"

namespace seglabel {

inline constexpr int kSceneFormatVersion = 1;
inline constexpr int kLabelSpaceFormatVersion = 1;
inline constexpr int kSceneSpecFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
// Version of the flat weight-vector layout inside model files.
inline constexpr int kModelLayoutVersion = 1;

// In-memory image of a scene file. Label blocks are stored by class name and
// segment id so files stay meaningful without a label space at hand; ground
// truth and predictions live under distinct keys.
struct SceneFileContents {
  Scene scene;
  std::map<int, std::vector<std::string>> labels;     // ground truth
  std::map<int, std::vector<std::string>> predicted;  // model output
  bool has_generator = false;
  std::string generator_name;
  uint64_t generator_seed = 0;
};

// Errors: malformed JSON -> format_error; format_version mismatch ->
// version_error; out-of-range indices or inconsistent blocks -> data_error.
SceneFileContents load_scene_file(const std::string& path);
// Atomic (write-temp-then-rename); numbers round-trip at full precision.
void save_scene_file(const std::string& path, const SceneFileContents& contents);

// Name-block <-> matrix conversion. Segments absent from the block get
// all-zero rows (unlabeled); all-zero rows are omitted when converting back.
// Unknown class names raise data_error.
Labeling labels_to_labeling(const std::map<int, std::vector<std::string>>& labels,
                            const Scene& scene, const LabelSpace& space);
std::map<int, std::vector<std::string>> labeling_to_labels(const Labeling& labeling,
                                                           const Scene& scene,
                                                           const LabelSpace& space);

LabelSpace load_label_space(const std::string& path);
void save_label_space(const std::string& path, const LabelSpace& space);

// Model files embed the full config (including the label space) plus the
// flat weight vector; the layout version pins the vector's interpretation.
Weights load_model(const std::string& path);
void save_model(const std::string& path, const Weights& weights);

// Generator spec files (the seed comes from the caller, not the file).
SceneSpec load_scene_spec(const std::string& path);
void save_scene_spec(const std::string& path, const SceneSpec& spec);

}  // namespace seglabel
