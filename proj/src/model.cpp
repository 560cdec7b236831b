#include "seglabel/model.hpp"

#include <algorithm>
#include <set>

namespace seglabel {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::NodeOnly: return "node_only";
    case Scheme::Assoc: return "assoc";
    case Scheme::NonAssoc: return "nonassoc";
    case Scheme::Parsimon: return "parsimon";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "node_only" || name == "nodeonly" || name == "node") return Scheme::NodeOnly;
  if (name == "assoc") return Scheme::Assoc;
  if (name == "nonassoc") return Scheme::NonAssoc;
  if (name == "parsimon") return Scheme::Parsimon;
  throw config_error("unknown scheme '" + name + "'");
}

void ModelConfig::validate() const {
  label_space.validate();
  if (node_dim < 1) throw config_error("node_dim must be >= 1");
  if (oa_dim < 0 || na_dim < 0) throw config_error("edge feature dims must be >= 0");
  if (context_range <= 0.0) throw config_error("context_range must be positive");
  if (C <= 0.0) throw config_error("C must be positive");
}

int group_dim(EdgeFeatureGroup group, const ModelConfig& config) {
  switch (group) {
    case EdgeFeatureGroup::ObjectAssociative: return config.oa_dim;
    case EdgeFeatureGroup::NonAssociative: return config.na_dim;
    case EdgeFeatureGroup::All: return config.oa_dim + config.na_dim;
  }
  return 0;
}

void gather_edge_features(const EdgeFeatures& f, EdgeFeatureGroup group, double* out) {
  switch (group) {
    case EdgeFeatureGroup::ObjectAssociative:
      std::copy(f.object_associative.begin(), f.object_associative.end(), out);
      break;
    case EdgeFeatureGroup::NonAssociative:
      std::copy(f.non_associative.begin(), f.non_associative.end(), out);
      break;
    case EdgeFeatureGroup::All:
      std::copy(f.object_associative.begin(), f.object_associative.end(), out);
      std::copy(f.non_associative.begin(), f.non_associative.end(), out + f.object_associative.size());
      break;
  }
}

namespace {

EdgeTypeGraph make_type(EdgeFeatureGroup group, PairSet pair_set, const ModelConfig& config) {
  const int k = config.label_space.size();
  EdgeTypeGraph t;
  t.group = group;
  t.pair_set = pair_set;
  t.feature_dim = group_dim(group, config);

  std::set<std::pair<int, int>> pairs;
  switch (pair_set) {
    case PairSet::Diagonal:
      for (int c = 0; c < k; ++c) pairs.insert({c, c});
      break;
    case PairSet::Full:
      for (int l = 0; l < k; ++l)
        for (int c = 0; c < k; ++c) pairs.insert({l, c});
      break;
    case PairSet::ObjectParts: {
      std::vector<char> in_object(k, 0);
      for (const auto& [object, parts] : config.label_space.objects) {
        std::vector<int> ids;
        for (const auto& part : parts) {
          const int id = config.label_space.index_of(part);
          ids.push_back(id);
          in_object[id] = 1;
        }
        for (int l : ids)
          for (int c : ids) pairs.insert({l, c});
      }
      // Classes not claimed by any object act as singleton objects.
      for (int c = 0; c < k; ++c)
        if (!in_object[c]) pairs.insert({c, c});
      break;
    }
  }
  t.pairs.assign(pairs.begin(), pairs.end());  // std::set iterates lexicographically
  t.slot.assign(static_cast<size_t>(k) * k, -1);
  for (size_t s = 0; s < t.pairs.size(); ++s)
    t.slot[static_cast<size_t>(t.pairs[s].first) * k + t.pairs[s].second] = static_cast<int>(s);
  return t;
}

}  // namespace

std::vector<EdgeTypeGraph> build_edge_type_graphs(const ModelConfig& config) {
  config.validate();
  switch (config.scheme) {
    case Scheme::NodeOnly: return {};
    case Scheme::Assoc: return {make_type(EdgeFeatureGroup::All, PairSet::Diagonal, config)};
    case Scheme::NonAssoc: return {make_type(EdgeFeatureGroup::All, PairSet::Full, config)};
    case Scheme::Parsimon:
      if (config.label_space.objects.empty())
        throw config_error("parsimon scheme requires an object-part grouping");
      return {make_type(EdgeFeatureGroup::ObjectAssociative, PairSet::ObjectParts, config),
              make_type(EdgeFeatureGroup::NonAssociative, PairSet::Full, config)};
  }
  return {};
}

Weights::Weights(const ModelConfig& config) : config_(config) {
  config_.validate();
  types_ = build_edge_type_graphs(config_);
  size_t total = static_cast<size_t>(config_.label_space.size()) * config_.node_dim;
  for (const auto& t : types_) {
    type_offset_.push_back(total);
    total += t.pairs.size() * static_cast<size_t>(t.feature_dim);
  }
  data.assign(total, 0.0);
}

double* Weights::edge_block(int t, int l, int k) {
  const int s = types_[t].slot_of(l, k, num_classes());
  if (s < 0) return nullptr;
  return data.data() + type_offset_[t] + static_cast<size_t>(s) * types_[t].feature_dim;
}

const double* Weights::edge_block(int t, int l, int k) const {
  return const_cast<Weights*>(this)->edge_block(t, l, k);
}

size_t parameter_count(const ModelConfig& config) {
  config.validate();
  size_t total = static_cast<size_t>(config.label_space.size()) * config.node_dim;
  for (const auto& t : build_edge_type_graphs(config))
    total += t.pairs.size() * static_cast<size_t>(t.feature_dim);
  return total;
}

namespace {

void check_dims(const SceneGraph& graph, const ModelConfig& config) {
  if (config.node_dim != graph.node_dim || config.oa_dim != kOaDim || config.na_dim != kNaDim)
    throw data_error("model config feature dimensions do not match the scene graph");
}

void check_labeling(const SceneGraph& graph, const Labeling& labeling, const ModelConfig& config) {
  if (labeling.rows() != graph.num_segments() || labeling.cols() != config.label_space.size())
    throw data_error("labeling shape does not match graph/label space");
}

// Nonzero (class, value) entries per row; integral labelings make the edge
// loops sparse.
std::vector<std::vector<std::pair<int, double>>> active_classes(const Labeling& labeling) {
  std::vector<std::vector<std::pair<int, double>>> active(labeling.rows());
  for (int i = 0; i < labeling.rows(); ++i)
    for (int c = 0; c < labeling.cols(); ++c)
      if (labeling.at(i, c) != 0.0) active[i].push_back({c, labeling.at(i, c)});
  return active;
}

double dot_n(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double discriminant(const SceneGraph& graph, const Labeling& labeling, const Weights& weights) {
  const ModelConfig& config = weights.config();
  check_dims(graph, config);
  check_labeling(graph, labeling, config);

  double score = 0.0;
  for (int i = 0; i < labeling.rows(); ++i)
    for (int c = 0; c < labeling.cols(); ++c) {
      const double y = labeling.at(i, c);
      if (y != 0.0)
        score += y * dot_n(weights.node_block(c), graph.node_features[i].data(), config.node_dim);
    }

  const auto& types = weights.edge_types();
  if (types.empty()) return score;
  const auto active = active_classes(labeling);
  std::vector<double> buf(static_cast<size_t>(config.oa_dim + config.na_dim));
  for (size_t e = 0; e < graph.edges.edges.size(); ++e) {
    const Edge& edge = graph.edges.edges[e];
    for (size_t t = 0; t < types.size(); ++t) {
      gather_edge_features(graph.edge_features[e], types[t].group, buf.data());
      for (const auto& [l, yl] : active[edge.i])
        for (const auto& [k, yk] : active[edge.j]) {
          const double* w = weights.edge_block(static_cast<int>(t), l, k);
          if (w) score += yl * yk * dot_n(w, buf.data(), types[t].feature_dim);
        }
    }
  }
  return score;
}

std::vector<double> joint_feature_map(const SceneGraph& graph, const Labeling& labeling,
                                      const ModelConfig& config) {
  Weights layout(config);  // reuse the layout bookkeeping
  check_dims(graph, config);
  check_labeling(graph, labeling, config);

  std::vector<double> psi(layout.size(), 0.0);
  for (int i = 0; i < labeling.rows(); ++i)
    for (int c = 0; c < labeling.cols(); ++c) {
      const double y = labeling.at(i, c);
      if (y == 0.0) continue;
      double* block = psi.data() + (layout.node_block(c) - layout.data.data());
      for (int d = 0; d < config.node_dim; ++d) block[d] += y * graph.node_features[i][d];
    }

  const auto& types = layout.edge_types();
  if (types.empty()) return psi;
  const auto active = active_classes(labeling);
  std::vector<double> buf(static_cast<size_t>(config.oa_dim + config.na_dim));
  for (size_t e = 0; e < graph.edges.edges.size(); ++e) {
    const Edge& edge = graph.edges.edges[e];
    for (size_t t = 0; t < types.size(); ++t) {
      gather_edge_features(graph.edge_features[e], types[t].group, buf.data());
      for (const auto& [l, yl] : active[edge.i])
        for (const auto& [k, yk] : active[edge.j]) {
          const double* w = layout.edge_block(static_cast<int>(t), l, k);
          if (!w) continue;
          double* block = psi.data() + (w - layout.data.data());
          const double scale = yl * yk;
          for (int d = 0; d < types[t].feature_dim; ++d) block[d] += scale * buf[d];
        }
    }
  }
  return psi;
}

}  // namespace seglabel
