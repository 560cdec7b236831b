// Command-line surface for the segment-labeling pipeline:
//   gen        synthesize labeled scenes from a generator spec or preset
//   segment    over-segment a raw point cloud into labeled-ready segments
//   featurize  dump node/edge descriptors for a scene
//   train      cutting-plane training (optionally k-fold CV and a C sweep)
//   predict    label a scene with a trained model
//   eval       micro/macro precision-recall over predicted scenes
//   sweep      retrain/evaluate across context ranges
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seglabel/errors.hpp"
#include "seglabel/evaluation.hpp"
#include "seglabel/io.hpp"
#include "seglabel/learning.hpp"
#include "seglabel/rng.hpp"
#include "seglabel/segmentation.hpp"
#include "seglabel/synthgen.hpp"

namespace {

using namespace seglabel;

std::vector<std::string> scene_files_in(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    throw data_error("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("scene-", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw data_error("no scene-*.json files in '" + dir + "'");
  return files;
}

std::vector<std::string> gather_scene_files(const std::string& data_dir,
                                            const std::vector<std::string>& scene_paths) {
  std::vector<std::string> files = scene_paths;
  if (!data_dir.empty()) {
    const auto found = scene_files_in(data_dir);
    files.insert(files.end(), found.begin(), found.end());
  }
  if (files.empty()) throw config_error("no input scenes: pass --data or scene files");
  return files;
}

std::vector<LabeledScene> load_dataset(const std::vector<std::string>& files,
                                       const LabelSpace& space, bool require_full_labels) {
  std::vector<LabeledScene> out;
  for (const std::string& path : files) {
    SceneFileContents contents = load_scene_file(path);
    if (contents.scene.segments.empty())
      throw data_error("'" + path + "' has no segments; run `segment` first");
    Labeling truth = labels_to_labeling(contents.labels, contents.scene, space);
    if (require_full_labels)
      for (int i = 0; i < truth.rows(); ++i)
        if (truth.row_is_zero(i))
          throw data_error("'" + path + "': training needs fully labeled ground truth (segment " +
                           std::to_string(contents.scene.segments[i].id) + " is unlabeled)");
    out.push_back({std::move(contents.scene), std::move(truth),
                   std::filesystem::path(path).stem().string()});
  }
  return out;
}

RoundingPolicy rounding_from_string(const std::string& name) {
  if (name == "abstain") return RoundingPolicy::AbstainOnFractional;
  if (name == "exhaust") return RoundingPolicy::ExhaustFractional;
  throw config_error("unknown rounding policy '" + name + "' (abstain|exhaust)");
}

SeparationOracle oracle_for(InferenceMethod method) {
  return method == InferenceMethod::GraphCut ? SeparationOracle::Relaxed
                                             : SeparationOracle::Exact;
}

void print_report(const PRReport& report) {
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "\n  micro precision " << report.micro_precision << "   micro recall "
            << report.micro_recall << "\n  macro precision " << report.macro_precision
            << "   macro recall " << report.macro_recall << "\n\n  "
            << std::left << std::setw(16) << "class" << std::right << std::setw(10)
            << "precision" << std::setw(10) << "recall" << std::setw(10) << "support"
            << std::setw(10) << "predicted" << "\n";
  for (const ClassMetrics& m : report.per_class) {
    if (m.support == 0) continue;
    std::cout << "  " << std::left << std::setw(16) << m.name << std::right << std::setw(10)
              << m.precision << std::setw(10) << m.recall << std::setw(10) << m.support
              << std::setw(10) << m.predicted << "\n";
  }
  if (!report.excluded_classes.empty()) {
    std::cout << "  excluded (zero support):";
    for (const std::string& name : report.excluded_classes) std::cout << ' ' << name;
    std::cout << "\n";
  }
  std::cout << "\n";
  std::cout.unsetf(std::ios::fixed);
  std::cout << std::setprecision(12);
  std::cout << "report micro_precision=" << report.micro_precision
            << " micro_recall=" << report.micro_recall
            << " macro_precision=" << report.macro_precision
            << " macro_recall=" << report.macro_recall << "\n";
  for (const ClassMetrics& m : report.per_class)
    std::cout << "class name=" << m.name << " precision=" << m.precision
              << " recall=" << m.recall << " support=" << m.support
              << " predicted=" << m.predicted << " correct=" << m.correct << "\n";
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec_path, preset, out_dir, spec_out;
  int n = 8;
  uint64_t seed = 7;
};

SceneSpec resolve_spec(const GenArgs& args, std::string& generator_name) {
  if (args.spec_path.empty() == args.preset.empty())
    throw config_error("gen: pass exactly one of --spec or --preset");
  if (!args.spec_path.empty()) {
    generator_name = std::filesystem::path(args.spec_path).stem().string();
    return load_scene_spec(args.spec_path);
  }
  generator_name = args.preset;
  if (args.preset == "separable") return preset_separable();
  if (args.preset == "stacks") return preset_stacks();
  if (args.preset == "stacks-wide") return preset_stacks(2, 0.3);
  if (args.preset == "chain-pairs") return preset_chain(2);
  if (args.preset == "chain-triples") return preset_chain(3);
  throw config_error(
      "gen: unknown preset '" + args.preset +
      "' (separable|stacks|stacks-wide|chain-pairs|chain-triples)");
}

void run_gen(const GenArgs& args) {
  std::string generator_name;
  const SceneSpec spec = resolve_spec(args, generator_name);
  std::filesystem::create_directories(args.out_dir);
  const auto dataset = generate_dataset(spec, args.n, args.seed);
  for (size_t i = 0; i < dataset.size(); ++i) {
    SceneFileContents contents;
    contents.scene = dataset[i].scene;
    contents.labels = labeling_to_labels(dataset[i].truth, dataset[i].scene, spec.label_space);
    contents.has_generator = true;
    contents.generator_name = generator_name;
    contents.generator_seed = derive_seed(args.seed, i);
    save_scene_file(args.out_dir + "/" + dataset[i].id + ".json", contents);
  }
  save_label_space(args.out_dir + "/label_space.json", spec.label_space);
  if (!args.spec_out.empty()) save_scene_spec(args.spec_out, spec);
  std::cout << "gen scenes=" << dataset.size() << " out_dir=" << args.out_dir
            << " seed=" << args.seed << " generator=" << generator_name << "\n";
}

struct SegmentArgs {
  std::string in_path, out_path;
  SegmentationParams params;
};

void run_segment(const SegmentArgs& args) {
  SceneFileContents contents = load_scene_file(args.in_path);
  if (!contents.labels.empty() || !contents.predicted.empty())
    std::cout << "note: existing label blocks dropped (segments are being rebuilt)\n";
  contents.labels.clear();
  contents.predicted.clear();
  contents.scene.segments.clear();
  contents.scene.precomputed_visual.clear();
  const auto normals = estimate_normals(contents.scene, args.params.normal_estimation_k);
  OverSegmentation seg = over_segment(contents.scene, normals, args.params);
  contents.scene.segments = std::move(seg.segments);
  save_scene_file(args.out_path, contents);
  std::cout << "segment segments=" << contents.scene.segments.size()
            << " dropped_points=" << seg.dropped_points.size() << " out=" << args.out_path
            << "\n";
}

struct FeaturizeArgs {
  std::string in_path, out_path;
  double context_range = 0.3;
};

void run_featurize(const FeaturizeArgs& args) {
  const SceneFileContents contents = load_scene_file(args.in_path);
  if (contents.scene.segments.empty())
    throw data_error("'" + args.in_path + "' has no segments; run `segment` first");
  const SceneGraph graph = SceneGraph::build(contents.scene, args.context_range);
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["context_range"] = args.context_range;
  nlohmann::json nodes = nlohmann::json::object();
  for (int i = 0; i < graph.num_segments(); ++i)
    nodes[std::to_string(graph.scene.segments[i].id)] = graph.node_features[i];
  doc["node_features"] = nodes;
  doc["edges"] = nlohmann::json::array();
  for (size_t e = 0; e < graph.edges.edges.size(); ++e) {
    const Edge& edge = graph.edges.edges[e];
    const EdgeFeatures& f = graph.edge_features[e];
    doc["edges"].push_back(
        {{"i", graph.scene.segments[edge.i].id},
         {"j", graph.scene.segments[edge.j].id},
         {"min_distance", edge.min_distance},
         {"object_associative",
          std::vector<double>(f.object_associative.begin(), f.object_associative.end())},
         {"non_associative",
          std::vector<double>(f.non_associative.begin(), f.non_associative.end())}});
  }
  std::ofstream out(args.out_path);
  if (!out) throw data_error("cannot write '" + args.out_path + "'");
  out << doc.dump(1) << '\n';
  std::cout << "featurize segments=" << graph.num_segments()
            << " edges=" << graph.edges.edges.size() << " out=" << args.out_path << "\n";
}

struct TrainArgs {
  std::string data_dir, label_space_path, model_out = "model.json";
  std::vector<std::string> scene_paths;
  std::string scheme = "parsimon", inference = "mip";
  double context_range = 0.3, C = 1.0, eps = 0.1;
  bool c_given = false;
  uint64_t seed = 7;
  int folds = 1;
};

void run_train(const TrainArgs& args) {
  const LabelSpace space = load_label_space(args.label_space_path);
  const auto files = gather_scene_files(args.data_dir, args.scene_paths);
  const auto dataset = load_dataset(files, space, /*require_full_labels=*/true);

  ModelConfig config;
  config.scheme = scheme_from_string(args.scheme);
  config.label_space = space;
  config.context_range = args.context_range;
  const InferenceMethod method = inference_method_from_string(args.inference);

  TrainOptions options;
  options.eps = args.eps;
  options.oracle = oracle_for(method);
  options.log = &std::cout;

  std::cout << std::setprecision(12);
  double chosen_C = args.C;
  if (!args.c_given && args.folds >= 2) {
    // No C given: pick it by cross-validation over the standard grid.
    double best_recall = -1.0;
    for (double candidate : {0.01, 0.1, 1.0, 10.0}) {
      ModelConfig cv_config = config;
      cv_config.C = candidate;
      TrainOptions cv_options = options;
      cv_options.C = candidate;
      cv_options.log = nullptr;
      const CrossValResult cv =
          cross_validate(dataset, cv_config, cv_options, args.folds, args.seed, method,
                         RoundingPolicy::ExhaustFractional);
      std::cout << "cv_C C=" << candidate << " micro_precision=" << cv.mean_micro_precision
                << " micro_recall=" << cv.mean_micro_recall << "\n";
      if (cv.mean_micro_recall > best_recall + 1e-12) {
        best_recall = cv.mean_micro_recall;
        chosen_C = candidate;
      }
    }
    std::cout << "chosen_C=" << chosen_C << "\n";
  }
  config.C = chosen_C;
  options.C = chosen_C;

  if (args.folds >= 2) {
    TrainOptions cv_options = options;
    cv_options.log = nullptr;
    const CrossValResult cv = cross_validate(dataset, config, cv_options, args.folds, args.seed,
                                             method, RoundingPolicy::ExhaustFractional);
    for (size_t f = 0; f < cv.fold_reports.size(); ++f)
      std::cout << "fold index=" << f
                << " micro_precision=" << cv.fold_reports[f].micro_precision
                << " micro_recall=" << cv.fold_reports[f].micro_recall
                << " macro_precision=" << cv.fold_reports[f].macro_precision
                << " macro_recall=" << cv.fold_reports[f].macro_recall << "\n";
    std::cout << "cv_mean micro_precision=" << cv.mean_micro_precision
              << " micro_recall=" << cv.mean_micro_recall
              << " macro_precision=" << cv.mean_macro_precision
              << " macro_recall=" << cv.mean_macro_recall << " folds=" << args.folds << "\n";
  }

  std::vector<TrainingExample> examples;
  for (const LabeledScene& s : dataset)
    examples.push_back({std::make_shared<SceneGraph>(
                            SceneGraph::build(s.scene, config.context_range)),
                        s.truth, s.id});
  const TrainResult result = train(examples, config, options);
  save_model(args.model_out, result.weights);
  std::cout << "trained iterations=" << result.iterations << " converged=" << result.converged
            << " certified=" << result.oracle_certified
            << " primal=" << result.primal_objective << " slack=" << result.slack
            << " parameters=" << result.weights.size() << " model=" << args.model_out << "\n";
}

struct PredictArgs {
  std::string in_path, model_path, out_path;
  std::string inference = "graphcut", rounding = "exhaust";
};

void run_predict(const PredictArgs& args) {
  const Weights weights = load_model(args.model_path);
  SceneFileContents contents = load_scene_file(args.in_path);
  if (contents.scene.segments.empty())
    throw data_error("'" + args.in_path + "' has no segments; run `segment` first");
  const SceneGraph graph =
      SceneGraph::build(contents.scene, weights.config().context_range);
  const InferenceMethod method = inference_method_from_string(args.inference);
  const Labeling predicted =
      predict(graph, weights, method, rounding_from_string(args.rounding));

  contents.predicted =
      labeling_to_labels(predicted, contents.scene, weights.config().label_space);
  int unlabeled = 0;
  for (const Segment& s : contents.scene.segments)
    if (!contents.predicted.count(s.id)) {
      contents.predicted[s.id] = {};  // explicit "unlabeled" marker
      ++unlabeled;
    }
  save_scene_file(args.out_path, contents);
  std::cout << "predict segments=" << contents.scene.segments.size()
            << " unlabeled=" << unlabeled << " inference=" << args.inference
            << " out=" << args.out_path << "\n";
}

struct EvalArgs {
  std::string data_dir, label_space_path;
  std::vector<std::string> scene_paths;
};

void run_eval(const EvalArgs& args) {
  const LabelSpace space = load_label_space(args.label_space_path);
  const auto files = gather_scene_files(args.data_dir, args.scene_paths);
  std::vector<Labeling> truths, preds;
  for (const std::string& path : files) {
    const SceneFileContents contents = load_scene_file(path);
    if (contents.predicted.empty())
      throw data_error("'" + path + "' has no predicted block; run `predict` first");
    truths.push_back(labels_to_labeling(contents.labels, contents.scene, space));
    preds.push_back(labels_to_labeling(contents.predicted, contents.scene, space));
  }
  print_report(score(truths, preds, space, /*allow_abstentions=*/true));
}

struct SweepArgs {
  std::string data_dir, label_space_path, out_path = "sweep.tsv";
  std::vector<std::string> scene_paths;
  std::vector<double> ranges{0.05, 0.1, 0.2, 0.3, 0.4};
  std::string scheme = "parsimon", inference = "mip";
  double C = 1.0, eps = 0.1;
  uint64_t seed = 7;
  int folds = 1;
};

void run_sweep(const SweepArgs& args) {
  const LabelSpace space = load_label_space(args.label_space_path);
  const auto files = gather_scene_files(args.data_dir, args.scene_paths);
  const auto dataset = load_dataset(files, space, /*require_full_labels=*/true);

  ModelConfig config;
  config.scheme = scheme_from_string(args.scheme);
  config.label_space = space;
  config.C = args.C;
  const InferenceMethod method = inference_method_from_string(args.inference);
  TrainOptions options;
  options.C = args.C;
  options.eps = args.eps;
  options.oracle = oracle_for(method);

  const auto table = context_sweep(dataset, args.ranges, config, options, args.folds, args.seed,
                                   method, RoundingPolicy::ExhaustFractional);
  std::ofstream out(args.out_path);
  if (!out) throw data_error("cannot write '" + args.out_path + "'");
  out << std::setprecision(12)
      << "range\tmicro_precision\tmicro_recall\tedge_count\ttrain_seconds\n";
  std::cout << std::setprecision(12);
  for (const SweepRow& row : table) {
    out << row.range << '\t' << row.micro_precision << '\t' << row.micro_recall << '\t'
        << row.edge_count << '\t' << row.train_seconds << '\n';
    std::cout << "sweep range=" << row.range << " micro_precision=" << row.micro_precision
              << " micro_recall=" << row.micro_recall << " edge_count=" << row.edge_count
              << " train_seconds=" << row.train_seconds << "\n";
  }
  std::cout << "sweep_table out=" << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual segment labeling for 3D indoor scenes"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate synthetic labeled scenes");
  g->add_option("--spec", gen.spec_path, "Generator spec JSON")->check(CLI::ExistingFile);
  g->add_option("--preset", gen.preset,
                "Built-in spec: separable|stacks|stacks-wide|chain-pairs|chain-triples");
  g->add_option("--n", gen.n, "Number of scenes")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--out-dir", gen.out_dir, "Output directory")->required();
  g->add_option("--spec-out", gen.spec_out, "Also write the resolved spec JSON here");
  g->callback([&] { run_gen(gen); });

  SegmentArgs seg;
  auto* s = app.add_subcommand("segment", "Over-segment a point cloud");
  s->add_option("--in", seg.in_path, "Input scene JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out", seg.out_path, "Output scene JSON")->required();
  s->add_option("--normal-angle", seg.params.normal_angle_threshold,
                "Region-growing normal angle threshold (rad)");
  s->add_option("--continuity", seg.params.continuity_distance,
                "Region-growing point distance threshold (m)");
  s->add_option("--min-points", seg.params.min_segment_points, "Minimum points per segment");
  s->add_option("--knn", seg.params.normal_estimation_k, "Neighbors for normal estimation");
  s->callback([&] { run_segment(seg); });

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "Dump node and edge descriptors");
  f->add_option("--in", feat.in_path, "Input scene JSON")->required()->check(CLI::ExistingFile);
  f->add_option("--out", feat.out_path, "Output features JSON")->required();
  f->add_option("--context-range", feat.context_range, "Edge distance threshold (m)");
  f->callback([&] { run_featurize(feat); });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Cutting-plane max-margin training");
  t->add_option("--data", tr.data_dir, "Directory of scene-*.json files");
  t->add_option("--scene", tr.scene_paths, "Individual scene files");
  t->add_option("--label-space", tr.label_space_path, "Label space JSON")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--scheme", tr.scheme, "node_only|assoc|nonassoc|parsimon");
  t->add_option("--context-range", tr.context_range, "Edge distance threshold (m)");
  auto* c_opt = t->add_option("--C", tr.C, "Regularization tradeoff (swept by CV when absent)");
  t->add_option("--eps", tr.eps, "Cutting-plane tolerance");
  t->add_option("--inference", tr.inference, "exact|mip|graphcut (separation oracle + CV)");
  t->add_option("--seed", tr.seed, "Fold split seed");
  t->add_option("--folds", tr.folds, "Cross-validation folds (1 = none)");
  t->add_option("--model-out", tr.model_out, "Trained model path");
  t->callback([&] {
    tr.c_given = c_opt->count() > 0;
    run_train(tr);
  });

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Label a scene with a trained model");
  p->add_option("--in", pr.in_path, "Input scene JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--model", pr.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pr.out_path, "Output scene JSON (copy with predictions)")->required();
  p->add_option("--inference", pr.inference, "exact|mip|graphcut");
  p->add_option("--rounding", pr.rounding, "abstain|exhaust (graphcut only)");
  p->callback([&] { run_predict(pr); });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predicted scenes against ground truth");
  e->add_option("--data", ev.data_dir, "Directory of scene-*.json files");
  e->add_option("--scene", ev.scene_paths, "Individual scene files");
  e->add_option("--label-space", ev.label_space_path, "Label space JSON")
      ->required()
      ->check(CLI::ExistingFile);
  e->callback([&] { run_eval(ev); });

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Context-range sweep (retrains per range)");
  w->add_option("--data", sw.data_dir, "Directory of scene-*.json files");
  w->add_option("--scene", sw.scene_paths, "Individual scene files");
  w->add_option("--label-space", sw.label_space_path, "Label space JSON")
      ->required()
      ->check(CLI::ExistingFile);
  w->add_option("--ranges", sw.ranges, "Context ranges in meters, ascending")->delimiter(',');
  w->add_option("--scheme", sw.scheme, "node_only|assoc|nonassoc|parsimon");
  w->add_option("--C", sw.C, "Regularization tradeoff");
  w->add_option("--eps", sw.eps, "Cutting-plane tolerance");
  w->add_option("--inference", sw.inference, "exact|mip|graphcut");
  w->add_option("--seed", sw.seed, "Fold split seed");
  w->add_option("--folds", sw.folds, "Cross-validation folds (1 = train-set metrics)");
  w->add_option("--out", sw.out_path, "Sweep table (TSV)");
  w->callback([&] { run_sweep(sw); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::usage;
  } catch (const format_error& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return exit_code::format;
  } catch (const version_error& e) {
    std::cerr << "version error: " << e.what() << "\n";
    return exit_code::version;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_code::data;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const generation_error& e) {
    std::cerr << "generation error: " << e.what() << "\n";
    return exit_code::generation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
  return exit_code::ok;
}
