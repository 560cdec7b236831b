#pragma once

#include <cstdint>
#include <vector>

#include "seglabel/model.hpp"
#include "seglabel/scene.hpp"

namespace seglabel {

// Compiled labeling problem: maximize
//   sum_i sum_k unary[i*K+k] y_i^k + sum_blocks sum_{l,k} theta[l*K+k] y_i^l y_j^k
// over binary y (MultiLabel), optionally with one 1 per row (Exclusive).
struct QPInstance {
  int n = 0, k = 0;
  std::vector<double> unary;  // n*k, row-major
  struct PairBlock {
    int i = 0, j = 0;           // segment indices, i < j
    std::vector<double> theta;  // k*k, [l*k + m] couples (i=l, j=m)
  };
  std::vector<PairBlock> pairs;

  double unary_at(int i, int c) const { return unary[static_cast<size_t>(i) * k + c]; }
};

// Folds weights and features into coefficients: unary from node potentials,
// pairwise from every edge type containing the ordered class pair.
QPInstance compile_qp(const SceneGraph& graph, const Weights& weights);

// Bilinear objective of a labeling under the instance.
double qp_objective(const QPInstance& qp, const Labeling& labeling);

struct ExactResult {
  Labeling labeling;
  double objective = 0.0;
};

// Exhaustive argmax. Guard: K^N (Exclusive) or 2^(N*K) (MultiLabel) must not
// exceed 10^7. Ties resolve to the lexicographically smallest labeling —
// per-segment class indices in Exclusive mode, the row-major binary matrix in
// MultiLabel mode.
ExactResult infer_exact(const QPInstance& qp, LabelMode mode);

struct MipOptions {
  long node_budget = 100000;
};

struct MipResult {
  Labeling labeling;
  double objective = 0.0;
  bool optimal = false;
  long nodes_expanded = 0;
};

// Branch-and-bound over the linearized problem. Bounds come from the
// roof-duality relaxation of the conditioned subproblem; branching fixes the
// fractional variable with the largest |unary| (Exclusive one-hot rows are
// enforced by propagation when a variable is fixed to 1). Exhausting the
// node budget returns the incumbent flagged non-optimal.
MipResult infer_mip(const QPInstance& qp, LabelMode mode, const MipOptions& options = {});

struct RelaxedSolution {
  int n = 0, k = 0;
  std::vector<double> values;            // n*k in {0, 0.5, 1}
  std::vector<std::uint8_t> persistent;  // strong-persistency mask
  double objective = 0.0;                // relaxation optimum, >= integral optimum

  double at(int i, int c) const { return values[static_cast<size_t>(i) * k + c]; }
  bool is_persistent(int i, int c) const { return persistent[static_cast<size_t>(i) * k + c] != 0; }
};

// Half-integral relaxation via graph cuts (single-threaded; deterministic).
// MultiLabel semantics: the one-per-row constraint is not imposed.
RelaxedSolution infer_relaxed(const QPInstance& qp);

enum class RoundingPolicy {
  AbstainOnFractional,  // any row that is not integral-one-hot (Exclusive) or
                        // not integral (MultiLabel) becomes all-zero
  ExhaustFractional,    // enumerate undecided rows/entries exactly when the
                        // joint space is <= 10^6, else best-unary fallback
};

Labeling round_relaxed(const RelaxedSolution& relaxed, const QPInstance& qp, LabelMode mode,
                       RoundingPolicy policy);

}  // namespace seglabel
