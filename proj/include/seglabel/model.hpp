#pragma once

#include <string>
#include <vector>

#include "seglabel/features.hpp"
#include "seglabel/scene.hpp"

namespace seglabel {

// Which feature group an edge type consumes.
enum class EdgeFeatureGroup { ObjectAssociative, NonAssociative, All };

// Which (class, class) pairs an edge type may connect.
enum class PairSet { Diagonal, ObjectParts, Full };

enum class Scheme { NodeOnly, Assoc, NonAssoc, Parsimon };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct ModelConfig {
  Scheme scheme = Scheme::Parsimon;
  LabelSpace label_space;
  int node_dim = kNodeDim;
  int oa_dim = kOaDim;
  int na_dim = kNaDim;
  double context_range = 0.3;
  double C = 1.0;

  void validate() const;
};

// One edge potential family: the ordered (l, k) pairs it models and the
// feature block it reads. Pairs are sorted lexicographically; `slot_of`
// gives a pair's position in that order (-1 when absent).
struct EdgeTypeGraph {
  EdgeFeatureGroup group = EdgeFeatureGroup::All;
  PairSet pair_set = PairSet::Full;
  int feature_dim = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> slot;  // K*K lookup, -1 where the pair is absent

  int slot_of(int l, int k, int num_classes) const { return slot[l * num_classes + k]; }
};

// Edge types for a scheme:
//   NodeOnly  -> none
//   Assoc     -> all edge features over the diagonal pairs {(k,k)}
//   NonAssoc  -> all edge features over all K^2 ordered pairs
//   Parsimon  -> object-associative features over pairs of classes sharing an
//                object, plus non-associative features over all K^2 pairs
std::vector<EdgeTypeGraph> build_edge_type_graphs(const ModelConfig& config);

// Flat weight vector bound to its layout: per-class node blocks first
// (class-index order), then one block per edge type, pairs in lexicographic
// order. The layout is a pure function of the config.
struct Weights {
  explicit Weights(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<EdgeTypeGraph>& edge_types() const { return types_; }
  int num_classes() const { return config_.label_space.size(); }

  size_t size() const { return data.size(); }
  double* node_block(int k) { return data.data() + static_cast<size_t>(k) * config_.node_dim; }
  const double* node_block(int k) const {
    return data.data() + static_cast<size_t>(k) * config_.node_dim;
  }
  // Weight vector of edge type t for the ordered class pair (l, k); nullptr
  // when the pair is outside the type's pair set.
  double* edge_block(int t, int l, int k);
  const double* edge_block(int t, int l, int k) const;

  std::vector<double> data;

 private:
  ModelConfig config_;
  std::vector<EdgeTypeGraph> types_;
  std::vector<size_t> type_offset_;
};

size_t parameter_count(const ModelConfig& config);

// Score of a labeling under the log-linear model: the sum of selected node
// potentials plus, per edge and edge type, the potentials of every active
// ordered class pair. Evaluates bilinearly, so half-integral labelings are
// accepted.
double discriminant(const SceneGraph& graph, const Labeling& labeling, const Weights& weights);

// Feature map with the same layout as Weights: dot(weights, psi) equals the
// discriminant. Linear in the labeling.
std::vector<double> joint_feature_map(const SceneGraph& graph, const Labeling& labeling,
                                      const ModelConfig& config);

// The slice of an edge's descriptors a type reads, in layout order.
void gather_edge_features(const EdgeFeatures& f, EdgeFeatureGroup group, double* out);
int group_dim(EdgeFeatureGroup group, const ModelConfig& config);

}  // namespace seglabel
