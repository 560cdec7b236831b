#include "seglabel/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "seglabel/errors.hpp"

namespace seglabel {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw format_error("malformed JSON in '" + path + "': " + e.what());
  }
}

void check_version(const json& doc, int expected, const std::string& path) {
  if (!doc.is_object() || !doc.contains("format_version") ||
      !doc["format_version"].is_number_integer())
    throw format_error("'" + path + "' lacks a format_version field");
  const int got = doc["format_version"].get<int>();
  if (got != expected)
    throw version_error("'" + path + "': format_version " + std::to_string(got) +
                        ", expected " + std::to_string(expected));
}

// Write-temp-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const json& doc) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw data_error("cannot write '" + tmp.string() + "'");
    out << doc.dump(1) << '\n';
    if (!out) throw data_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw data_error("cannot rename '" + tmp.string() + "' to '" + path + "'");
}

std::map<int, std::vector<std::string>> read_label_block(const json& block,
                                                         const std::string& path,
                                                         const std::string& key) {
  std::map<int, std::vector<std::string>> out;
  if (!block.is_object())
    throw format_error("'" + path + "': " + key + " must map segment ids to class lists");
  for (const auto& [id_text, names] : block.items()) {
    int id = 0;
    try {
      id = std::stoi(id_text);
    } catch (const std::exception&) {
      throw format_error("'" + path + "': non-numeric segment id '" + id_text + "' in " + key);
    }
    if (!names.is_array())
      throw format_error("'" + path + "': " + key + "[" + id_text + "] must be a list");
    out[id] = names.get<std::vector<std::string>>();
  }
  return out;
}

LabelMode mode_from_string(const std::string& name, const std::string& path) {
  if (name == "exclusive") return LabelMode::Exclusive;
  if (name == "multilabel") return LabelMode::MultiLabel;
  throw format_error("'" + path + "': unknown label mode '" + name + "'");
}

std::string mode_to_string(LabelMode mode) {
  return mode == LabelMode::Exclusive ? "exclusive" : "multilabel";
}

LabelSpace label_space_from_json(const json& doc, const std::string& path) {
  LabelSpace space;
  if (!doc.contains("classes") || !doc["classes"].is_array())
    throw format_error("'" + path + "': label space needs a classes list");
  space.class_names = doc["classes"].get<std::vector<std::string>>();
  if (doc.contains("objects")) {
    if (!doc["objects"].is_object())
      throw format_error("'" + path + "': objects must map object names to part lists");
    for (const auto& [name, parts] : doc["objects"].items())
      space.objects[name] = parts.get<std::vector<std::string>>();
  }
  space.mode = mode_from_string(doc.value("mode", "exclusive"), path);
  try {
    space.validate();
  } catch (const error& e) {
    throw data_error("'" + path + "': " + e.what());
  }
  return space;
}

json label_space_to_json(const LabelSpace& space) {
  json doc;
  doc["classes"] = space.class_names;
  json objects = json::object();
  for (const auto& [name, parts] : space.objects) objects[name] = parts;
  doc["objects"] = objects;
  doc["mode"] = mode_to_string(space.mode);
  return doc;
}

}  // namespace

SceneFileContents load_scene_file(const std::string& path) {
  const json doc = parse_file(path);
  check_version(doc, kSceneFormatVersion, path);

  SceneFileContents contents;
  Scene& scene = contents.scene;
  if (!doc.contains("views") || !doc["views"].is_array())
    throw format_error("'" + path + "': missing views");
  for (const json& v : doc["views"]) {
    CameraView view;
    view.view_id = v.at("view_id").get<int>();
    const auto origin = v.at("origin").get<std::vector<double>>();
    if (origin.size() != 3) throw format_error("'" + path + "': view origin must have 3 entries");
    view.origin = {origin[0], origin[1], origin[2]};
    scene.views.push_back(view);
  }
  if (!doc.contains("points") || !doc["points"].is_array())
    throw format_error("'" + path + "': missing points");
  for (const json& p : doc["points"]) {
    const auto row = p.get<std::vector<double>>();
    if (row.size() != 7)
      throw format_error("'" + path + "': each point needs [x,y,z,r,g,b,view_id]");
    Point point;
    point.position = {row[0], row[1], row[2]};
    point.rgb = {row[3], row[4], row[5]};
    point.view_id = static_cast<int>(row[6]);
    scene.points.push_back(point);
  }
  if (doc.contains("segments")) {
    if (!doc["segments"].is_array()) throw format_error("'" + path + "': segments must be a list");
    for (const json& s : doc["segments"]) {
      const int id = s.at("id").get<int>();
      auto indices = s.at("point_indices").get<std::vector<int>>();
      for (int index : indices)
        if (index < 0 || index >= static_cast<int>(scene.points.size()))
          throw data_error("'" + path + "': segment " + std::to_string(id) +
                           " references point " + std::to_string(index) + " out of range");
      scene.segments.push_back(make_segment(id, std::move(indices), scene));
    }
  }
  if (doc.contains("precomputed_visual")) {
    for (const auto& [id_text, values] : doc["precomputed_visual"].items()) {
      int id = 0;
      try {
        id = std::stoi(id_text);
      } catch (const std::exception&) {
        throw format_error("'" + path + "': non-numeric segment id in precomputed_visual");
      }
      scene.precomputed_visual[id] = values.get<std::vector<double>>();
    }
  }
  if (doc.contains("labels")) contents.labels = read_label_block(doc["labels"], path, "labels");
  if (doc.contains("predicted"))
    contents.predicted = read_label_block(doc["predicted"], path, "predicted");
  if (doc.contains("generator")) {
    contents.has_generator = true;
    contents.generator_name = doc["generator"].value("name", "");
    contents.generator_seed = doc["generator"].value("seed", uint64_t{0});
  }
  try {
    scene.validate();
  } catch (const error& e) {
    throw data_error("'" + path + "': " + e.what());
  }
  const std::set<int> segment_ids = [&] {
    std::set<int> ids;
    for (const Segment& s : scene.segments) ids.insert(s.id);
    return ids;
  }();
  for (const auto& block : {contents.labels, contents.predicted})
    for (const auto& [id, names] : block)
      if (!segment_ids.count(id))
        throw data_error("'" + path + "': labels reference unknown segment " +
                         std::to_string(id));
  return contents;
}

void save_scene_file(const std::string& path, const SceneFileContents& contents) {
  const Scene& scene = contents.scene;
  json doc;
  doc["format_version"] = kSceneFormatVersion;
  doc["views"] = json::array();
  for (const CameraView& v : scene.views)
    doc["views"].push_back({{"view_id", v.view_id},
                            {"origin", {v.origin.x, v.origin.y, v.origin.z}}});
  doc["points"] = json::array();
  for (const Point& p : scene.points)
    doc["points"].push_back({p.position.x, p.position.y, p.position.z, p.rgb[0], p.rgb[1],
                             p.rgb[2], static_cast<double>(p.view_id)});
  if (!scene.segments.empty()) {
    doc["segments"] = json::array();
    for (const Segment& s : scene.segments)
      doc["segments"].push_back({{"id", s.id}, {"point_indices", s.point_indices}});
  }
  if (!scene.precomputed_visual.empty()) {
    json block = json::object();
    for (const auto& [id, values] : scene.precomputed_visual)
      block[std::to_string(id)] = values;
    doc["precomputed_visual"] = block;
  }
  auto emit_block = [](const std::map<int, std::vector<std::string>>& block) {
    json out = json::object();
    for (const auto& [id, names] : block) out[std::to_string(id)] = names;
    return out;
  };
  if (!contents.labels.empty()) doc["labels"] = emit_block(contents.labels);
  if (!contents.predicted.empty()) doc["predicted"] = emit_block(contents.predicted);
  if (contents.has_generator)
    doc["generator"] = {{"name", contents.generator_name}, {"seed", contents.generator_seed}};
  atomic_write(path, doc);
}

Labeling labels_to_labeling(const std::map<int, std::vector<std::string>>& labels,
                            const Scene& scene, const LabelSpace& space) {
  Labeling out(static_cast<int>(scene.segments.size()), space.size());
  for (size_t row = 0; row < scene.segments.size(); ++row) {
    const auto it = labels.find(scene.segments[row].id);
    if (it == labels.end()) continue;  // unlabeled segment: all-zero row
    for (const std::string& name : it->second) {
      const int k = space.index_of(name);
      if (k < 0)
        throw data_error("label block uses unknown class '" + name + "' on segment " +
                         std::to_string(scene.segments[row].id));
      out.at(static_cast<int>(row), k) = 1.0;
    }
  }
  return out;
}

std::map<int, std::vector<std::string>> labeling_to_labels(const Labeling& labeling,
                                                           const Scene& scene,
                                                           const LabelSpace& space) {
  if (labeling.rows() != static_cast<int>(scene.segments.size()) ||
      labeling.cols() != space.size())
    throw data_error("labeling_to_labels: shape mismatch");
  std::map<int, std::vector<std::string>> out;
  for (int row = 0; row < labeling.rows(); ++row) {
    std::vector<std::string> names;
    for (int k = 0; k < space.size(); ++k)
      if (labeling.at(row, k) == 1.0) names.push_back(space.class_names[k]);
    if (!names.empty()) out[scene.segments[row].id] = std::move(names);
  }
  return out;
}

LabelSpace load_label_space(const std::string& path) {
  const json doc = parse_file(path);
  check_version(doc, kLabelSpaceFormatVersion, path);
  return label_space_from_json(doc, path);
}

void save_label_space(const std::string& path, const LabelSpace& space) {
  json doc = label_space_to_json(space);
  doc["format_version"] = kLabelSpaceFormatVersion;
  atomic_write(path, doc);
}

Weights load_model(const std::string& path) {
  const json doc = parse_file(path);
  check_version(doc, kModelFormatVersion, path);
  if (!doc.contains("layout_version") || doc["layout_version"].get<int>() != kModelLayoutVersion)
    throw version_error("'" + path + "': unsupported weight layout version");
  if (!doc.contains("config") || !doc.contains("weights"))
    throw format_error("'" + path + "': model file needs config and weights");
  const json& c = doc["config"];
  ModelConfig config;
  config.scheme = scheme_from_string(c.value("scheme", "parsimon"));
  config.context_range = c.value("context_range", 0.3);
  config.C = c.value("C", 1.0);
  config.node_dim = c.value("node_dim", kNodeDim);
  config.oa_dim = c.value("oa_dim", kOaDim);
  config.na_dim = c.value("na_dim", kNaDim);
  if (!c.contains("label_space"))
    throw format_error("'" + path + "': model config lacks its label space");
  config.label_space = label_space_from_json(c["label_space"], path);
  try {
    config.validate();
  } catch (const error& e) {
    throw data_error("'" + path + "': " + e.what());
  }
  Weights weights(config);
  const auto values = doc["weights"].get<std::vector<double>>();
  if (values.size() != weights.size())
    throw data_error("'" + path + "': weight vector has " + std::to_string(values.size()) +
                     " entries, layout expects " + std::to_string(weights.size()));
  weights.data = values;
  return weights;
}

SceneSpec load_scene_spec(const std::string& path) {
  const json doc = parse_file(path);
  check_version(doc, kSceneSpecFormatVersion, path);
  SceneSpec spec;
  if (!doc.contains("label_space"))
    throw format_error("'" + path + "': scene spec needs a label_space");
  spec.label_space = label_space_from_json(doc["label_space"], path);
  if (!doc.contains("assemblies") || !doc["assemblies"].is_array())
    throw format_error("'" + path + "': scene spec needs assemblies");
  for (const json& a : doc["assemblies"]) {
    AssemblySpec assembly;
    assembly.name = a.value("name", "assembly");
    assembly.count = a.value("count", 1);
    if (!a.contains("parts") || !a["parts"].is_array())
      throw format_error("'" + path + "': assembly '" + assembly.name + "' needs parts");
    for (const json& p : a["parts"]) {
      PartSpec part;
      part.class_name = p.at("class").get<std::string>();
      if (p.contains("extra_classes"))
        part.extra_classes = p["extra_classes"].get<std::vector<std::string>>();
      part.width = p.value("width", 0.4);
      part.depth = p.value("depth", 0.4);
      part.vertical = p.value("vertical", false);
      part.yaw = p.value("yaw", 0.0);
      part.dz = p.value("dz", 0.0);
      part.dz_jitter = p.value("dz_jitter", 0.0);
      part.horizontal_jitter = p.value("horizontal_jitter", 0.0);
      assembly.parts.push_back(std::move(part));
    }
    spec.assemblies.push_back(std::move(assembly));
  }
  if (doc.contains("rules"))
    for (const json& r : doc["rules"])
      spec.rules.push_back({r.at("name").get<std::string>(), r.at("above").get<std::string>(),
                            r.at("below").get<std::string>(), r.at("dz_min").get<double>(),
                            r.at("dz_max").get<double>(), r.value("max_horizontal", 0.3)});
  if (doc.contains("colors"))
    for (const auto& [name, c] : doc["colors"].items())
      spec.colors[name] = {c.value("h", 0.5), c.value("s", 0.5), c.value("v", 0.5),
                           c.value("sigma", 0.05)};
  spec.sigma = doc.value("sigma", 0.005);
  spec.points_per_part = doc.value("points_per_part", 60);
  spec.spacing = doc.value("spacing", 1.5);
  spec.base_z_min = doc.value("base_z_min", 0.0);
  spec.base_z_max = doc.value("base_z_max", 0.0);
  spec.num_views = doc.value("num_views", 1);
  spec.separable = doc.value("separable", false);
  spec.retry_budget = doc.value("retry_budget", 1000);
  try {
    spec.validate();
  } catch (const error& e) {
    throw data_error("'" + path + "': " + e.what());
  }
  return spec;
}

void save_scene_spec(const std::string& path, const SceneSpec& spec) {
  json doc;
  doc["format_version"] = kSceneSpecFormatVersion;
  doc["label_space"] = label_space_to_json(spec.label_space);
  doc["assemblies"] = json::array();
  for (const AssemblySpec& a : spec.assemblies) {
    json assembly{{"name", a.name}, {"count", a.count}, {"parts", json::array()}};
    for (const PartSpec& p : a.parts) {
      json part{{"class", p.class_name}, {"width", p.width},
                {"depth", p.depth},      {"vertical", p.vertical},
                {"yaw", p.yaw},          {"dz", p.dz},
                {"dz_jitter", p.dz_jitter}, {"horizontal_jitter", p.horizontal_jitter}};
      if (!p.extra_classes.empty()) part["extra_classes"] = p.extra_classes;
      assembly["parts"].push_back(part);
    }
    doc["assemblies"].push_back(assembly);
  }
  if (!spec.rules.empty()) {
    doc["rules"] = json::array();
    for (const RelationRule& r : spec.rules)
      doc["rules"].push_back({{"name", r.name},
                              {"above", r.above_class},
                              {"below", r.below_class},
                              {"dz_min", r.dz_min},
                              {"dz_max", r.dz_max},
                              {"max_horizontal", r.max_horizontal}});
  }
  if (!spec.colors.empty()) {
    json colors = json::object();
    for (const auto& [name, c] : spec.colors)
      colors[name] = {{"h", c.mean_h}, {"s", c.mean_s}, {"v", c.mean_v}, {"sigma", c.sigma}};
    doc["colors"] = colors;
  }
  doc["sigma"] = spec.sigma;
  doc["points_per_part"] = spec.points_per_part;
  doc["spacing"] = spec.spacing;
  doc["base_z_min"] = spec.base_z_min;
  doc["base_z_max"] = spec.base_z_max;
  doc["num_views"] = spec.num_views;
  doc["separable"] = spec.separable;
  doc["retry_budget"] = spec.retry_budget;
  atomic_write(path, doc);
}

void save_model(const std::string& path, const Weights& weights) {
  const ModelConfig& config = weights.config();
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["layout_version"] = kModelLayoutVersion;
  doc["config"] = {{"scheme", to_string(config.scheme)},
                   {"context_range", config.context_range},
                   {"C", config.C},
                   {"node_dim", config.node_dim},
                   {"oa_dim", config.oa_dim},
                   {"na_dim", config.na_dim},
                   {"label_space", label_space_to_json(config.label_space)}};
  doc["weights"] = weights.data;
  atomic_write(path, doc);
}

}  // namespace seglabel
