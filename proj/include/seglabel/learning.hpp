#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "seglabel/features.hpp"
#include "seglabel/inference.hpp"
#include "seglabel/model.hpp"

namespace seglabel {

struct TrainingExample {
  std::shared_ptr<const SceneGraph> graph;
  Labeling truth;
  std::string scene_id;
};

// Separation oracle used to find the most violated labeling per example.
// Exact keeps the upper-bound guarantee; Relaxed trades it for speed by
// rounding the half-integral relaxation (ExhaustFractional).
enum class SeparationOracle { Exact, Relaxed };

struct LossAugmentedResult {
  Labeling labeling;
  double loss = 0.0;        // Hamming loss of the returned labeling
  double violation = 0.0;   // loss + f(labeling) - f(truth)
  bool certified = false;   // argmax certified (exact oracle within budget)
};

// argmax_y [hamming(truth, y) + f(x, y, w)], found by adding per-node loss
// offsets to the unary scores of the compiled instance.
LossAugmentedResult loss_augmented_infer(const QPInstance& qp, const Labeling& truth,
                                         LabelMode mode, SeparationOracle oracle,
                                         const MipOptions& options = {});

// One aggregated cutting-plane constraint: w . psi_diff >= loss - slack.
struct Constraint {
  std::vector<double> psi_diff;  // mean over examples of Psi(truth) - Psi(yhat)
  double loss = 0.0;             // mean Hamming loss of the yhat's
};

struct CuttingPlaneState {
  std::vector<Constraint> constraints;
  std::vector<double> alpha;      // one dual variable per constraint, >= 0
  std::vector<double> weights;    // = sum_c alpha_c * psi_diff_c
  double C = 1.0;

  double dual_objective() const;
  double slack() const;           // max(0, max_c loss_c - w . psi_diff_c)
  double primal_objective() const;  // 0.5 |w|^2 + C * slack over the working set
};

// Dual coordinate ascent on the working-set QP (max sum_c L_c a_c -
// 0.5 |sum_c a_c g_c|^2 subject to a >= 0, sum a <= C). Terminates when the
// KKT residual is <= 1e-6 * C and the subproblem primal-dual gap is
// <= 1e-4 * C. Single-coordinate steps are complemented by pairwise
// exchanges once the sum constraint is active.
void solve_qp_subproblem(CuttingPlaneState& state);

struct IterationLog {
  int iteration = 0;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  double violation = 0.0;
  double slack = 0.0;
  double wall_seconds = 0.0;
};

struct TrainOptions {
  double C = 1.0;
  double eps = 0.1;
  SeparationOracle oracle = SeparationOracle::Exact;
  MipOptions mip;
  int max_iterations = 500;
  bool parallel = true;
  std::ostream* log = nullptr;  // one key=value line per iteration
};

struct TrainResult {
  TrainResult(const ModelConfig& config) : weights(config) {}
  Weights weights;
  int iterations = 0;
  bool converged = false;        // 1-slack certificate reached
  bool oracle_certified = true;  // false if any separation call was uncertified
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double slack = 0.0;
  double final_violation = 0.0;
  std::vector<IterationLog> trace;
};

// 1-slack margin-rescaling cutting plane: repeatedly finds the most violated
// aggregated constraint, stops once its violation is within eps of the
// current slack, otherwise adds it and re-solves the working-set QP.
TrainResult train(const std::vector<TrainingExample>& dataset, const ModelConfig& config,
                  const TrainOptions& options = {});

// Mean training Hamming loss of `weights` on `dataset` under the given
// inference method (exact MIP by default).
double training_loss(const std::vector<TrainingExample>& dataset, const Weights& weights,
                     SeparationOracle oracle = SeparationOracle::Exact);

}  // namespace seglabel
