#include "seglabel/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seglabel/errors.hpp"

namespace seglabel {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Adds the per-node Hamming-loss offsets to the unary block so that the
// instance objective becomes f(y) + hamming(truth, y) - constant.
QPInstance loss_augment(const QPInstance& qp, const Labeling& truth, LabelMode mode) {
  QPInstance out = qp;
  for (int i = 0; i < qp.n; ++i)
    for (int k = 0; k < qp.k; ++k) {
      const double t = truth.at(i, k);
      if (mode == LabelMode::Exclusive)
        out.unary[static_cast<size_t>(i) * qp.k + k] += t == 1.0 ? 0.0 : 1.0;
      else
        out.unary[static_cast<size_t>(i) * qp.k + k] += 1.0 - 2.0 * t;
    }
  return out;
}

}  // namespace

LossAugmentedResult loss_augmented_infer(const QPInstance& qp, const Labeling& truth,
                                         LabelMode mode, SeparationOracle oracle,
                                         const MipOptions& options) {
  if (truth.rows() != qp.n || truth.cols() != qp.k)
    throw data_error("loss_augmented_infer: truth shape mismatch");
  const QPInstance augmented = loss_augment(qp, truth, mode);

  LossAugmentedResult result;
  if (oracle == SeparationOracle::Exact) {
    MipResult mip = infer_mip(augmented, mode, options);
    result.labeling = std::move(mip.labeling);
    result.certified = mip.optimal;
  } else {
    RelaxedSolution relaxed = infer_relaxed(augmented);
    result.labeling =
        round_relaxed(relaxed, augmented, mode, RoundingPolicy::ExhaustFractional);
    result.certified = false;
  }
  result.loss = hamming_loss(truth, result.labeling, mode);
  result.violation =
      result.loss + qp_objective(qp, result.labeling) - qp_objective(qp, truth);
  return result;
}

double CuttingPlaneState::dual_objective() const {
  double s = 0.0;
  for (size_t c = 0; c < constraints.size(); ++c) s += alpha[c] * constraints[c].loss;
  return s - 0.5 * dot(weights, weights);
}

double CuttingPlaneState::slack() const {
  double xi = 0.0;
  for (const Constraint& c : constraints)
    xi = std::max(xi, c.loss - dot(weights, c.psi_diff));
  return xi;
}

double CuttingPlaneState::primal_objective() const {
  return 0.5 * dot(weights, weights) + C * slack();
}

void solve_qp_subproblem(CuttingPlaneState& state) {
  const size_t m = state.constraints.size();
  if (m == 0) throw data_error("solve_qp_subproblem: empty working set");
  if (state.alpha.size() != m) state.alpha.resize(m, 0.0);
  const size_t dim = state.constraints[0].psi_diff.size();
  if (state.weights.size() != dim) state.weights.assign(dim, 0.0);

  // Rebuild w from alpha so the dual-primal link holds exactly on entry.
  std::fill(state.weights.begin(), state.weights.end(), 0.0);
  for (size_t c = 0; c < m; ++c) {
    if (state.alpha[c] == 0.0) continue;
    const auto& g = state.constraints[c].psi_diff;
    for (size_t d = 0; d < dim; ++d) state.weights[d] += state.alpha[c] * g[d];
  }

  std::vector<double> diag(m);
  for (size_t c = 0; c < m; ++c)
    diag[c] = dot(state.constraints[c].psi_diff, state.constraints[c].psi_diff);

  auto gradient = [&](size_t c) {
    return state.constraints[c].loss - dot(state.weights, state.constraints[c].psi_diff);
  };
  auto add_to_w = [&](size_t c, double delta) {
    if (delta == 0.0) return;
    const auto& g = state.constraints[c].psi_diff;
    for (size_t d = 0; d < dim; ++d) state.weights[d] += delta * g[d];
  };
  auto sum_alpha = [&] {
    double s = 0.0;
    for (double a : state.alpha) s += a;
    return s;
  };

  const double kkt_tol = 1e-6 * state.C;
  const double gap_tol = 1e-4 * state.C;
  const int max_sweeps = 100000;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Single-coordinate ascent steps, capped by the remaining sum budget.
    for (size_t c = 0; c < m; ++c) {
      if (diag[c] <= 0.0) {
        // Zero constraint vector: objective is linear in alpha_c; push to a
        // boundary (budget if the loss is positive, zero otherwise).
        const double budget = state.C - (sum_alpha() - state.alpha[c]);
        const double target = state.constraints[c].loss > 0.0 ? std::max(0.0, budget) : 0.0;
        state.alpha[c] = target;
        continue;
      }
      const double step = gradient(c) / diag[c];
      const double budget = state.C - (sum_alpha() - state.alpha[c]);
      const double target = std::clamp(state.alpha[c] + step, 0.0, std::max(0.0, budget));
      const double delta = target - state.alpha[c];
      state.alpha[c] = target;
      add_to_w(c, delta);
    }

    // Pairwise exchanges keep the sum fixed; essential when the budget
    // constraint is active and mass must move between constraints.
    if (m > 1 && sum_alpha() >= state.C * (1.0 - 1e-12)) {
      for (size_t c = 0; c < m; ++c)
        for (size_t d = 0; d < m; ++d) {
          if (c == d || state.alpha[d] <= 0.0) continue;
          std::vector<double> diff(dim);
          const auto& gc = state.constraints[c].psi_diff;
          const auto& gd = state.constraints[d].psi_diff;
          for (size_t e = 0; e < dim; ++e) diff[e] = gc[e] - gd[e];
          const double denom = dot(diff, diff);
          if (denom <= 0.0) continue;
          double delta = (gradient(c) - gradient(d)) / denom;
          delta = std::clamp(delta, -state.alpha[c], state.alpha[d]);
          if (delta == 0.0) continue;
          state.alpha[c] += delta;
          state.alpha[d] -= delta;
          for (size_t e = 0; e < dim; ++e) state.weights[e] += delta * diff[e];
        }
    }

    // Termination: KKT residual and primal-dual gap of the subproblem.
    const double total = sum_alpha();
    const bool at_budget = total >= state.C * (1.0 - 1e-12);
    double mu = 0.0;
    if (at_budget)
      for (size_t c = 0; c < m; ++c)
        if (state.alpha[c] > 0.0) mu = std::max(mu, gradient(c));
    double residual = 0.0;
    for (size_t c = 0; c < m; ++c) {
      const double g = gradient(c);
      if (state.alpha[c] > 0.0)
        residual = std::max(residual, std::abs(g - mu));
      else
        residual = std::max(residual, std::max(0.0, g - mu));
    }
    const double gap = state.primal_objective() - state.dual_objective();
    if (residual <= kkt_tol && gap <= gap_tol) return;
  }
}

TrainResult train(const std::vector<TrainingExample>& dataset, const ModelConfig& config,
                  const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw data_error("train: empty dataset");
  if (!(options.C > 0.0) || !(options.eps > 0.0))
    throw config_error("train: C and eps must be positive");
  const LabelMode mode = config.label_space.mode;
  const size_t n = dataset.size();

  TrainResult result(config);
  const size_t dim = result.weights.size();

  // Per-example truth feature maps; their mean anchors every constraint.
  std::vector<std::vector<double>> psi_true(n);
  for (size_t i = 0; i < n; ++i) {
    const TrainingExample& ex = dataset[i];
    if (!ex.graph) throw data_error("train: example without a scene graph");
    const ValidationReport report = validate_labeling(ex.truth, config.label_space);
    if (!report.ok || !ex.truth.is_integral())
      throw data_error("train: invalid ground truth in example '" + ex.scene_id + "'");
    psi_true[i] = joint_feature_map(*ex.graph, ex.truth, config);
    for (double v : psi_true[i])
      if (!std::isfinite(v))
        throw data_error("train: non-finite feature value in example '" + ex.scene_id + "'");
  }
  std::vector<double> mean_psi_true(dim, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t d = 0; d < dim; ++d) mean_psi_true[d] += psi_true[i][d] / static_cast<double>(n);

  CuttingPlaneState state;
  state.C = options.C;
  state.weights.assign(dim, 0.0);

  const auto start = std::chrono::steady_clock::now();
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    // Separation oracle: most violated labeling per example, in parallel.
    std::vector<std::vector<double>> psi_hat(n);
    std::vector<double> losses(n, 0.0);
    std::vector<char> certified(n, 1);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (long i = 0; i < static_cast<long>(n); ++i) {
      try {
        const TrainingExample& ex = dataset[i];
        QPInstance qp = compile_qp(*ex.graph, result.weights);
        LossAugmentedResult sep =
            loss_augmented_infer(qp, ex.truth, mode, options.oracle, options.mip);
        psi_hat[i] = joint_feature_map(*ex.graph, sep.labeling, config);
        losses[i] = sep.loss;
        certified[i] = sep.certified ? 1 : 0;
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (size_t i = 0; i < n; ++i)
      if (!certified[i]) result.oracle_certified = false;

    Constraint constraint;
    constraint.psi_diff.assign(dim, 0.0);
    for (size_t i = 0; i < n; ++i) {
      constraint.loss += losses[i] / static_cast<double>(n);
      for (size_t d = 0; d < dim; ++d)
        constraint.psi_diff[d] += (psi_true[i][d] - psi_hat[i][d]) / static_cast<double>(n);
    }

    const double violation = constraint.loss - dot(state.weights, constraint.psi_diff);
    const double xi = state.slack();
    result.iterations = iteration;
    result.final_violation = violation;

    if (violation <= xi + options.eps) {
      result.converged = true;
      IterationLog log{iteration, state.dual_objective(), state.primal_objective(), violation,
                       xi, std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                               .count()};
      result.trace.push_back(log);
      if (options.log)
        *options.log << "iter=" << log.iteration << " dual=" << log.dual_objective
                     << " primal=" << log.primal_objective << " violation=" << log.violation
                     << " slack=" << log.slack << " wall=" << log.wall_seconds
                     << " converged=1" << std::endl;
      break;
    }

    state.constraints.push_back(std::move(constraint));
    state.alpha.push_back(0.0);
    solve_qp_subproblem(state);
    std::copy(state.weights.begin(), state.weights.end(), result.weights.data.begin());

    IterationLog log{iteration, state.dual_objective(), state.primal_objective(), violation, xi,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count()};
    result.trace.push_back(log);
    if (options.log)
      *options.log << "iter=" << log.iteration << " dual=" << log.dual_objective
                   << " primal=" << log.primal_objective << " violation=" << log.violation
                   << " slack=" << log.slack << " wall=" << log.wall_seconds << " converged=0" << std::endl;
  }

  result.primal_objective = state.primal_objective();
  result.dual_objective = state.dual_objective();
  result.slack = state.slack();
  return result;
}

double training_loss(const std::vector<TrainingExample>& dataset, const Weights& weights,
                     SeparationOracle oracle) {
  if (dataset.empty()) throw data_error("training_loss: empty dataset");
  const LabelMode mode = weights.config().label_space.mode;
  double total = 0.0;
  for (const TrainingExample& ex : dataset) {
    QPInstance qp = compile_qp(*ex.graph, weights);
    Labeling predicted(0, 0);
    if (oracle == SeparationOracle::Exact) {
      predicted = infer_mip(qp, mode).labeling;
    } else {
      RelaxedSolution relaxed = infer_relaxed(qp);
      predicted = round_relaxed(relaxed, qp, mode, RoundingPolicy::ExhaustFractional);
    }
    total += hamming_loss(ex.truth, predicted, mode);
  }
  return total / static_cast<double>(dataset.size());
}

}  // namespace seglabel
