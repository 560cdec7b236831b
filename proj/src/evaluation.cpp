#include "seglabel/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "seglabel/errors.hpp"
#include "seglabel/rng.hpp"

namespace seglabel {

PRReport score(const std::vector<Labeling>& truth, const std::vector<Labeling>& predicted,
               const LabelSpace& space, bool allow_abstentions) {
  if (truth.size() != predicted.size()) throw data_error("score: scene count mismatch");
  const int k = space.size();
  PRReport report;
  report.per_class.resize(k);
  for (int c = 0; c < k; ++c) report.per_class[c].name = space.class_names[c];

  for (size_t s = 0; s < truth.size(); ++s) {
    const Labeling& t = truth[s];
    const Labeling& p = predicted[s];
    if (t.cols() != k || p.cols() != k) throw data_error("score: label-space mismatch");
    if (t.rows() != p.rows()) throw data_error("score: segment count mismatch");
    if (!t.is_integral() || !p.is_integral())
      throw data_error("score: labelings must be integral");
    for (int i = 0; i < t.rows(); ++i) {
      if (space.mode == LabelMode::Exclusive) {
        if (t.row_is_zero(i)) continue;  // unlabeled ground truth: skipped
        if (t.class_of(i) < 0) throw data_error("score: truth row is not one-hot");
        if (p.class_of(i) < 0) {
          if (!p.row_is_zero(i) || !allow_abstentions)
            throw data_error("score: predicted row is neither one-hot nor an abstention");
        }
      }
      for (int c = 0; c < k; ++c) {
        const bool tp = t.at(i, c) == 1.0;
        const bool pp = p.at(i, c) == 1.0;
        if (tp) ++report.per_class[c].support;
        if (pp) ++report.per_class[c].predicted;
        if (tp && pp) ++report.per_class[c].correct;
      }
    }
  }

  long supported = 0;
  for (int c = 0; c < k; ++c) {
    ClassMetrics& m = report.per_class[c];
    report.total_positives += m.support;
    report.predicted_positives += m.predicted;
    report.correct_positives += m.correct;
    m.precision = m.predicted > 0 ? static_cast<double>(m.correct) / m.predicted : 0.0;
    m.recall = m.support > 0 ? static_cast<double>(m.correct) / m.support : 0.0;
    if (m.support > 0) {
      ++supported;
      report.macro_precision += m.precision;
      report.macro_recall += m.recall;
    } else {
      report.excluded_classes.push_back(m.name);
    }
  }
  if (supported > 0) {
    report.macro_precision /= supported;
    report.macro_recall /= supported;
  }
  report.micro_precision = report.predicted_positives > 0
                               ? static_cast<double>(report.correct_positives) /
                                     report.predicted_positives
                               : 0.0;
  report.micro_recall =
      report.total_positives > 0
          ? static_cast<double>(report.correct_positives) / report.total_positives
          : 0.0;
  return report;
}

std::vector<std::vector<std::string>> kfold_split(const std::vector<std::string>& scene_ids,
                                                  int k, uint64_t seed) {
  if (k < 1) throw config_error("kfold_split: fold count must be >= 1");
  if (static_cast<size_t>(k) > scene_ids.size())
    throw config_error("kfold_split: more folds than scenes");
  std::vector<std::string> shuffled = scene_ids;
  Rng rng(seed);
  for (size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  std::vector<std::vector<std::string>> folds(k);
  for (size_t i = 0; i < shuffled.size(); ++i)
    folds[i % k].push_back(std::move(shuffled[i]));
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

InferenceMethod inference_method_from_string(const std::string& name) {
  if (name == "exact") return InferenceMethod::Exact;
  if (name == "mip") return InferenceMethod::Mip;
  if (name == "graphcut") return InferenceMethod::GraphCut;
  throw config_error("unknown inference method '" + name + "'");
}

std::string to_string(InferenceMethod method) {
  switch (method) {
    case InferenceMethod::Exact: return "exact";
    case InferenceMethod::Mip: return "mip";
    case InferenceMethod::GraphCut: return "graphcut";
  }
  return "?";
}

Labeling predict(const SceneGraph& graph, const Weights& weights, InferenceMethod method,
                 RoundingPolicy rounding) {
  const LabelMode mode = weights.config().label_space.mode;
  const QPInstance qp = compile_qp(graph, weights);
  switch (method) {
    case InferenceMethod::Exact:
      return infer_exact(qp, mode).labeling;
    case InferenceMethod::Mip:
      return infer_mip(qp, mode).labeling;
    case InferenceMethod::GraphCut: {
      const RelaxedSolution relaxed = infer_relaxed(qp);
      return round_relaxed(relaxed, qp, mode, rounding);
    }
  }
  throw config_error("predict: unknown inference method");
}

namespace {

std::vector<TrainingExample> to_examples(
    const std::vector<LabeledScene>& dataset,
    const std::vector<std::shared_ptr<const SceneGraph>>& graphs,
    const std::set<std::string>& exclude_ids) {
  std::vector<TrainingExample> out;
  for (size_t i = 0; i < dataset.size(); ++i)
    if (!exclude_ids.count(dataset[i].id))
      out.push_back({graphs[i], dataset[i].truth, dataset[i].id});
  return out;
}

}  // namespace

CrossValResult cross_validate(const std::vector<LabeledScene>& dataset,
                              const ModelConfig& config, const TrainOptions& train_options,
                              int folds, uint64_t seed, InferenceMethod method,
                              RoundingPolicy rounding, const FeatureParams& features) {
  if (dataset.empty()) throw data_error("cross_validate: empty dataset");
  std::vector<std::string> ids;
  ids.reserve(dataset.size());
  for (const LabeledScene& s : dataset) ids.push_back(s.id);
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
    throw data_error("cross_validate: duplicate scene ids");
  const auto fold_ids = kfold_split(ids, folds, seed);

  std::vector<std::shared_ptr<const SceneGraph>> graphs;
  graphs.reserve(dataset.size());
  for (const LabeledScene& s : dataset)
    graphs.push_back(std::make_shared<SceneGraph>(
        SceneGraph::build(s.scene, config.context_range, features)));

  const bool allow_abstentions = method == InferenceMethod::GraphCut &&
                                 rounding == RoundingPolicy::AbstainOnFractional;
  CrossValResult result;
  for (const auto& held_out : fold_ids) {
    const std::set<std::string> test_ids(held_out.begin(), held_out.end());
    const auto train_set = to_examples(dataset, graphs, test_ids);
    if (train_set.empty()) throw config_error("cross_validate: a fold exhausts the train set");
    const TrainResult trained = train(train_set, config, train_options);

    std::vector<Labeling> truths, preds;
    for (size_t i = 0; i < dataset.size(); ++i) {
      if (!test_ids.count(dataset[i].id)) continue;
      truths.push_back(dataset[i].truth);
      preds.push_back(predict(*graphs[i], trained.weights, method, rounding));
    }
    result.fold_reports.push_back(
        score(truths, preds, config.label_space, allow_abstentions));
  }
  for (const PRReport& r : result.fold_reports) {
    result.mean_micro_precision += r.micro_precision / result.fold_reports.size();
    result.mean_micro_recall += r.micro_recall / result.fold_reports.size();
    result.mean_macro_precision += r.macro_precision / result.fold_reports.size();
    result.mean_macro_recall += r.macro_recall / result.fold_reports.size();
  }
  return result;
}

std::vector<SweepRow> context_sweep(const std::vector<LabeledScene>& dataset,
                                    const std::vector<double>& ranges,
                                    const ModelConfig& config_template,
                                    const TrainOptions& train_options, int folds, uint64_t seed,
                                    InferenceMethod method, RoundingPolicy rounding,
                                    const FeatureParams& features) {
  if (ranges.empty()) throw config_error("context_sweep: at least one range is required");
  if (!std::is_sorted(ranges.begin(), ranges.end()))
    throw config_error("context_sweep: ranges must be ascending");
  for (double r : ranges)
    if (!(r > 0.0)) throw config_error("context_sweep: ranges must be positive");

  std::vector<SweepRow> table;
  for (double range : ranges) {
    ModelConfig config = config_template;
    config.context_range = range;
    SweepRow row;
    row.range = range;
    for (const LabeledScene& s : dataset) {
      // Edge counts come from the graph alone; cheap relative to training.
      const EdgeSet edges = build_graph(s.scene.segments, s.scene, range);
      row.edge_count += static_cast<long>(edges.edges.size());
    }
    const auto start = std::chrono::steady_clock::now();
    if (folds >= 2) {
      const CrossValResult cv =
          cross_validate(dataset, config, train_options, folds, seed, method, rounding);
      row.micro_precision = cv.mean_micro_precision;
      row.micro_recall = cv.mean_micro_recall;
    } else {
      std::vector<TrainingExample> examples;
      std::vector<std::shared_ptr<const SceneGraph>> graphs;
      for (const LabeledScene& s : dataset) {
        graphs.push_back(
            std::make_shared<SceneGraph>(SceneGraph::build(s.scene, range, features)));
        examples.push_back({graphs.back(), s.truth, s.id});
      }
      const TrainResult trained = train(examples, config, train_options);
      std::vector<Labeling> truths, preds;
      for (size_t i = 0; i < dataset.size(); ++i) {
        truths.push_back(dataset[i].truth);
        preds.push_back(predict(*graphs[i], trained.weights, method, rounding));
      }
      const bool allow_abstentions = method == InferenceMethod::GraphCut &&
                                     rounding == RoundingPolicy::AbstainOnFractional;
      const PRReport report = score(truths, preds, config.label_space, allow_abstentions);
      row.micro_precision = report.micro_precision;
      row.micro_recall = report.micro_recall;
    }
    row.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    table.push_back(row);
  }
  return table;
}

}  // namespace seglabel
