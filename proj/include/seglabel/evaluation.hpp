#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seglabel/learning.hpp"

namespace seglabel {

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  long support = 0;    // truth positives
  long predicted = 0;  // predicted positives
  long correct = 0;    // true positives
};

struct PRReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::string> excluded_classes;  // zero truth support in this set
  long total_positives = 0;
  long predicted_positives = 0;
  long correct_positives = 0;
};

// Pooled micro and per-class macro precision/recall over a scene set.
// Exclusive mode counts one-hot rows; an all-zero predicted row is an
// abstention (allowed only when the flag is set) and counts against recall
// only. All-zero truth rows mark unlabeled segments and are skipped. Macro
// averages run over classes with nonzero truth support; the rest are listed
// as excluded. A class predicted zero times scores precision 0.
PRReport score(const std::vector<Labeling>& truth, const std::vector<Labeling>& predicted,
               const LabelSpace& space, bool allow_abstentions);

// Deterministic scene-granularity folds: ids are shuffled by the seed and
// dealt round-robin, so fold sizes differ by at most one. Folds are returned
// with ids sorted. Throws config_error when k < 1 or k > ids.
std::vector<std::vector<std::string>> kfold_split(const std::vector<std::string>& scene_ids,
                                                  int k, uint64_t seed);

enum class InferenceMethod { Exact, Mip, GraphCut };

InferenceMethod inference_method_from_string(const std::string& name);
std::string to_string(InferenceMethod method);

// Labels one scene graph: Exact enumerates (small instances only), Mip runs
// branch and bound, GraphCut rounds the half-integral relaxation under the
// given policy.
Labeling predict(const SceneGraph& graph, const Weights& weights, InferenceMethod method,
                 RoundingPolicy rounding = RoundingPolicy::ExhaustFractional);

struct CrossValResult {
  std::vector<PRReport> fold_reports;
  double mean_micro_precision = 0.0;
  double mean_micro_recall = 0.0;
  double mean_macro_precision = 0.0;
  double mean_macro_recall = 0.0;
};

// k-fold cross-validation at scene granularity: trains on k-1 folds, labels
// the held-out fold, scores each fold, and averages fold metrics.
CrossValResult cross_validate(const std::vector<LabeledScene>& dataset,
                              const ModelConfig& config, const TrainOptions& train_options,
                              int folds, uint64_t seed, InferenceMethod method,
                              RoundingPolicy rounding, const FeatureParams& features = {});

struct SweepRow {
  double range = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  long edge_count = 0;        // total edges across the dataset at this range
  double train_seconds = 0.0;
};

// Retrains and evaluates at each context range (ranges positive, ascending).
// folds >= 2 cross-validates; folds == 1 trains and scores on the full set.
std::vector<SweepRow> context_sweep(const std::vector<LabeledScene>& dataset,
                                    const std::vector<double>& ranges,
                                    const ModelConfig& config_template,
                                    const TrainOptions& train_options, int folds, uint64_t seed,
                                    InferenceMethod method, RoundingPolicy rounding,
                                    const FeatureParams& features = {});

}  // namespace seglabel
