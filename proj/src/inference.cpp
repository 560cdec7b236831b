#include "seglabel/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <queue>

#include "seglabel/qpbo.hpp"

namespace seglabel {

QPInstance compile_qp(const SceneGraph& graph, const Weights& weights) {
  const ModelConfig& config = weights.config();
  const int n = graph.num_segments();
  const int k = config.label_space.size();

  QPInstance qp;
  qp.n = n;
  qp.k = k;
  qp.unary.assign(static_cast<size_t>(n) * k, 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) {
      double s = 0.0;
      const double* w = weights.node_block(c);
      for (int d = 0; d < config.node_dim; ++d) s += w[d] * graph.node_features[i][d];
      qp.unary[static_cast<size_t>(i) * k + c] = s;
    }

  const auto& types = weights.edge_types();
  if (types.empty()) return qp;
  std::vector<double> buf(static_cast<size_t>(config.oa_dim + config.na_dim));
  qp.pairs.reserve(graph.edges.edges.size());
  for (size_t e = 0; e < graph.edges.edges.size(); ++e) {
    QPInstance::PairBlock block;
    block.i = graph.edges.edges[e].i;
    block.j = graph.edges.edges[e].j;
    block.theta.assign(static_cast<size_t>(k) * k, 0.0);
    for (size_t t = 0; t < types.size(); ++t) {
      gather_edge_features(graph.edge_features[e], types[t].group, buf.data());
      for (const auto& [l, m] : types[t].pairs) {
        const double* w = weights.edge_block(static_cast<int>(t), l, m);
        double s = 0.0;
        for (int d = 0; d < types[t].feature_dim; ++d) s += w[d] * buf[d];
        block.theta[static_cast<size_t>(l) * k + m] += s;
      }
    }
    qp.pairs.push_back(std::move(block));
  }
  return qp;
}

double qp_objective(const QPInstance& qp, const Labeling& labeling) {
  if (labeling.rows() != qp.n || labeling.cols() != qp.k)
    throw data_error("qp_objective: labeling shape mismatch");
  double s = 0.0;
  for (int i = 0; i < qp.n; ++i)
    for (int c = 0; c < qp.k; ++c) {
      const double y = labeling.at(i, c);
      if (y != 0.0) s += y * qp.unary_at(i, c);
    }
  for (const auto& block : qp.pairs)
    for (int l = 0; l < qp.k; ++l) {
      const double yl = labeling.at(block.i, l);
      if (yl == 0.0) continue;
      for (int m = 0; m < qp.k; ++m) {
        const double ym = labeling.at(block.j, m);
        if (ym != 0.0) s += yl * ym * block.theta[static_cast<size_t>(l) * qp.k + m];
      }
    }
  return s;
}

namespace {

constexpr double kEnumerationGuard = 1e7;

double exclusive_objective(const QPInstance& qp, const std::vector<int>& classes) {
  double s = 0.0;
  for (int i = 0; i < qp.n; ++i) s += qp.unary_at(i, classes[i]);
  for (const auto& block : qp.pairs)
    s += block.theta[static_cast<size_t>(classes[block.i]) * qp.k + classes[block.j]];
  return s;
}

ExactResult infer_exact_exclusive(const QPInstance& qp) {
  std::vector<int> classes(qp.n, 0), best(qp.n, 0);
  double best_obj = exclusive_objective(qp, classes);
  while (true) {
    // Odometer step: the rightmost digit is least significant, so candidates
    // appear in ascending lexicographic order of the class sequence.
    int pos = qp.n - 1;
    while (pos >= 0 && classes[pos] == qp.k - 1) classes[pos--] = 0;
    if (pos < 0) break;
    ++classes[pos];
    const double obj = exclusive_objective(qp, classes);
    if (obj > best_obj) {
      best_obj = obj;
      best = classes;
    }
  }
  return {Labeling::from_classes(best, qp.k), best_obj};
}

ExactResult infer_exact_multilabel(const QPInstance& qp) {
  const int bits = qp.n * qp.k;
  Labeling candidate(qp.n, qp.k), best(qp.n, qp.k);
  double best_obj = 0.0;  // all-zero labeling scores 0
  const uint64_t count = 1ULL << bits;
  for (uint64_t m = 1; m < count; ++m) {
    for (int b = 0; b < bits; ++b) {
      // Entry (0,0) is the most significant bit: ascending m is ascending
      // row-major lexicographic order.
      const int shift = bits - 1 - b;
      candidate.at(b / qp.k, b % qp.k) = static_cast<double>((m >> shift) & 1ULL);
    }
    const double obj = qp_objective(qp, candidate);
    if (obj > best_obj) {
      best_obj = obj;
      best = candidate;
    }
  }
  return {best, best_obj};
}

}  // namespace

ExactResult infer_exact(const QPInstance& qp, LabelMode mode) {
  if (qp.n <= 0 || qp.k <= 0) throw data_error("infer_exact: empty instance");
  if (mode == LabelMode::Exclusive) {
    if (std::pow(static_cast<double>(qp.k), qp.n) > kEnumerationGuard)
      throw config_error("infer_exact: K^N exceeds the enumeration guard");
    return infer_exact_exclusive(qp);
  }
  if (std::pow(2.0, static_cast<double>(qp.n) * qp.k) > kEnumerationGuard)
    throw config_error("infer_exact: 2^(N*K) exceeds the enumeration guard");
  return infer_exact_multilabel(qp);
}

RelaxedSolution infer_relaxed(const QPInstance& qp) {
  for (double u : qp.unary)
    if (!std::isfinite(u)) throw data_error("infer_relaxed: non-finite unary coefficient");
  BinaryQuadratic problem;
  problem.n = qp.n * qp.k;
  problem.linear = qp.unary;
  for (const auto& block : qp.pairs)
    for (int l = 0; l < qp.k; ++l)
      for (int m = 0; m < qp.k; ++m) {
        const double theta = block.theta[static_cast<size_t>(l) * qp.k + m];
        if (!std::isfinite(theta)) throw data_error("infer_relaxed: non-finite pair coefficient");
        if (theta != 0.0)
          problem.quadratic.emplace_back(block.i * qp.k + l, block.j * qp.k + m, theta);
      }
  QpboResult r = solve_qpbo(problem);
  RelaxedSolution out;
  out.n = qp.n;
  out.k = qp.k;
  out.values = std::move(r.values);
  out.persistent = std::move(r.persistent);
  out.objective = r.bound;
  return out;
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

namespace {

struct Conditioned {
  BinaryQuadratic problem;      // over free variables
  double constant = 0.0;        // contribution of the fixed part
  std::vector<int> free_vars;   // original var ids, ascending
  std::vector<int> reduced_id;  // original var -> reduced id or -1
};

Conditioned condition(const QPInstance& qp, const std::vector<int8_t>& fix) {
  const int nv = qp.n * qp.k;
  Conditioned c;
  c.reduced_id.assign(nv, -1);
  for (int v = 0; v < nv; ++v)
    if (fix[v] < 0) {
      c.reduced_id[v] = static_cast<int>(c.free_vars.size());
      c.free_vars.push_back(v);
    }
  c.problem.n = static_cast<int>(c.free_vars.size());
  c.problem.linear.assign(c.problem.n, 0.0);
  for (int v = 0; v < nv; ++v) {
    if (fix[v] < 0)
      c.problem.linear[c.reduced_id[v]] = qp.unary[v];
    else if (fix[v] == 1)
      c.constant += qp.unary[v];
  }
  for (const auto& block : qp.pairs)
    for (int l = 0; l < qp.k; ++l)
      for (int m = 0; m < qp.k; ++m) {
        const double theta = block.theta[static_cast<size_t>(l) * qp.k + m];
        if (theta == 0.0) continue;
        const int u = block.i * qp.k + l, w = block.j * qp.k + m;
        if (fix[u] == 0 || fix[w] == 0) continue;
        if (fix[u] < 0 && fix[w] < 0)
          c.problem.quadratic.emplace_back(c.reduced_id[u], c.reduced_id[w], theta);
        else if (fix[u] < 0)
          c.problem.linear[c.reduced_id[u]] += theta;
        else if (fix[w] < 0)
          c.problem.linear[c.reduced_id[w]] += theta;
        else
          c.constant += theta;
      }
  return c;
}

// Fixes a variable, propagating Exclusive row constraints. Returns false on
// contradiction (a row with every class excluded).
bool apply_fix(std::vector<int8_t>& fix, int var, int8_t value, int k, LabelMode mode) {
  if (fix[var] >= 0) return fix[var] == value;
  fix[var] = value;
  if (mode != LabelMode::Exclusive) return true;
  const int row = var / k;
  if (value == 1) {
    for (int c = 0; c < k; ++c) {
      const int sibling = row * k + c;
      if (sibling == var) continue;
      if (fix[sibling] == 1) return false;
      if (fix[sibling] < 0) fix[sibling] = 0;
    }
    return true;
  }
  int free_count = 0, last_free = -1;
  bool has_one = false;
  for (int c = 0; c < k; ++c) {
    const int sibling = row * k + c;
    if (fix[sibling] < 0) {
      ++free_count;
      last_free = sibling;
    } else if (fix[sibling] == 1) {
      has_one = true;
    }
  }
  if (has_one) return true;
  if (free_count == 0) return false;
  if (free_count == 1) return apply_fix(fix, last_free, 1, k, mode);
  return true;
}

// Deterministic feasible completion of a partial assignment, guided by the
// conditioned unaries and the relaxation values; used for incumbents.
Labeling complete_assignment(const QPInstance& qp, const std::vector<int8_t>& fix,
                             const Conditioned& cond, const QpboResult& relaxed, LabelMode mode) {
  Labeling out(qp.n, qp.k);
  std::vector<int8_t> value(fix);
  if (mode == LabelMode::MultiLabel) {
    for (size_t f = 0; f < cond.free_vars.size(); ++f) {
      const double v = relaxed.values[f];
      value[cond.free_vars[f]] =
          v != 0.5 ? static_cast<int8_t>(v) : static_cast<int8_t>(cond.problem.linear[f] > 0.0);
    }
    for (int v = 0; v < qp.n * qp.k; ++v)
      if (value[v] == 1) out.at(v / qp.k, v % qp.k) = 1.0;
    return out;
  }

  // Exclusive: decide rows in order, scoring each allowed class by its
  // conditioned unary plus couplings to rows already decided.
  std::vector<int> decided(qp.n, -1);
  for (int i = 0; i < qp.n; ++i)
    for (int c = 0; c < qp.k; ++c)
      if (value[i * qp.k + c] == 1) decided[i] = c;
  for (int i = 0; i < qp.n; ++i) {
    if (decided[i] >= 0) continue;
    double best_score = -std::numeric_limits<double>::infinity();
    int best_class = -1;
    for (int c = 0; c < qp.k; ++c) {
      const int var = i * qp.k + c;
      if (value[var] == 0) continue;
      double score = cond.reduced_id[var] >= 0 ? cond.problem.linear[cond.reduced_id[var]]
                                               : qp.unary_at(i, c);
      for (const auto& block : qp.pairs) {
        if (block.i == i && decided[block.j] >= 0)
          score += block.theta[static_cast<size_t>(c) * qp.k + decided[block.j]];
        else if (block.j == i && decided[block.i] >= 0)
          score += block.theta[static_cast<size_t>(decided[block.i]) * qp.k + c];
      }
      if (score > best_score) {
        best_score = score;
        best_class = c;
      }
    }
    decided[i] = best_class < 0 ? 0 : best_class;
  }
  return Labeling::from_classes(decided, qp.k);
}

bool exclusive_feasible(const Labeling& l) {
  for (int i = 0; i < l.rows(); ++i)
    if (l.class_of(i) < 0) return false;
  return true;
}

// For Exclusive instances, every row that still has free variables gets
// exactly one of them set in any feasible completion, so subtracting a
// per-row constant from the free unaries (and crediting it to the bound)
// preserves feasible objectives while making every unary non-positive —
// a far tighter roof-duality bound than the raw unconstrained relaxation.
double shift_rows_nonpositive(const QPInstance& qp, const Conditioned& cond,
                              std::vector<double>& linear) {
  std::vector<double> row_max(qp.n, -std::numeric_limits<double>::infinity());
  for (size_t f = 0; f < cond.free_vars.size(); ++f) {
    const int row = cond.free_vars[f] / qp.k;
    row_max[row] = std::max(row_max[row], linear[f]);
  }
  double total = 0.0;
  for (size_t f = 0; f < cond.free_vars.size(); ++f) linear[f] -= row_max[cond.free_vars[f] / qp.k];
  for (int i = 0; i < qp.n; ++i)
    if (row_max[i] != -std::numeric_limits<double>::infinity()) total += row_max[i];
  return total;
}

// Discourages two indicators of the same row from switching on together by a
// repulsive quadratic penalty.  Feasible one-hot completions never pay it, so
// the relaxation bound remains valid while tightening toward the at-most-one
// polytope.
void add_row_exclusion_penalties(const QPInstance& qp, const Conditioned& cond,
                                 BinaryQuadratic& problem) {
  double scale = 0.0;
  for (double v : problem.linear) scale += std::abs(v);
  for (const auto& [a, b, w] : problem.quadratic) {
    (void)a;
    (void)b;
    scale += std::abs(w);
  }
  const double penalty = -2.0 * (scale + 1.0);
  std::vector<std::vector<int>> by_row(qp.n);
  for (size_t f = 0; f < cond.free_vars.size(); ++f)
    by_row[cond.free_vars[f] / qp.k].push_back(static_cast<int>(f));
  for (const auto& row : by_row)
    for (size_t a = 0; a < row.size(); ++a)
      for (size_t b = a + 1; b < row.size(); ++b)
        problem.quadratic.emplace_back(row[a], row[b], penalty);
}

struct BnbNode {
  std::vector<int8_t> fix;
  double bound = 0.0;
  int branch_var = -1;
  long serial = 0;
};

struct BnbNodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.serial > b.serial;                        // FIFO among ties
  }
};

}  // namespace

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Rows without an interacting (nonzero) coupling block between them can be
// optimized independently: search trees then add up instead of multiplying.
std::vector<std::vector<int>> interaction_components(const QPInstance& qp) {
  std::vector<int> parent(qp.n);
  for (int i = 0; i < qp.n; ++i) parent[i] = i;
  for (const auto& block : qp.pairs) {
    bool nonzero = false;
    for (double t : block.theta)
      if (t != 0.0) {
        nonzero = true;
        break;
      }
    if (!nonzero) continue;
    const int a = find_root(parent, block.i);
    const int b = find_root(parent, block.j);
    if (a != b) parent[a] = b;
  }
  std::vector<std::vector<int>> rows_of(qp.n);
  for (int i = 0; i < qp.n; ++i) rows_of[find_root(parent, i)].push_back(i);
  std::vector<std::vector<int>> components;
  for (auto& rows : rows_of)
    if (!rows.empty()) components.push_back(std::move(rows));
  return components;
}

}  // namespace

MipResult infer_mip(const QPInstance& qp, LabelMode mode, const MipOptions& options) {
  if (qp.n <= 0 || qp.k <= 0) throw data_error("infer_mip: empty instance");
  const int nv = qp.n * qp.k;

  // Decompose into independent interaction components and solve each on its
  // own; the shared node budget drains across them in order.
  const std::vector<std::vector<int>> components = interaction_components(qp);
  if (components.size() > 1) {
    MipResult combined;
    combined.labeling = Labeling(qp.n, qp.k);
    combined.objective = 0.0;
    combined.optimal = true;
    long budget_left = options.node_budget;
    for (const auto& rows : components) {
      QPInstance sub;
      sub.n = static_cast<int>(rows.size());
      sub.k = qp.k;
      sub.unary.resize(static_cast<size_t>(sub.n) * qp.k);
      std::vector<int> local(qp.n, -1);
      for (int r = 0; r < sub.n; ++r) {
        local[rows[r]] = r;
        for (int c = 0; c < qp.k; ++c) sub.unary[static_cast<size_t>(r) * qp.k + c] = qp.unary_at(rows[r], c);
      }
      for (const auto& block : qp.pairs)
        if (local[block.i] >= 0 && local[block.j] >= 0)
          sub.pairs.push_back({local[block.i], local[block.j], block.theta});
      MipOptions sub_options = options;
      sub_options.node_budget = budget_left;
      const MipResult part = infer_mip(sub, mode, sub_options);
      combined.nodes_expanded += part.nodes_expanded;
      budget_left = std::max<long>(0, budget_left - part.nodes_expanded);
      combined.optimal = combined.optimal && part.optimal;
      combined.objective += part.objective;
      for (int r = 0; r < sub.n; ++r)
        for (int c = 0; c < qp.k; ++c) combined.labeling.at(rows[r], c) = part.labeling.at(r, c);
    }
    return combined;
  }

  MipResult result;
  result.objective = -std::numeric_limits<double>::infinity();

  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbNodeOrder> queue;
  long serial = 0;

  // Optional stderr statistics for solver tuning.
  const bool stats = std::getenv("SEGLABEL_MIP_STATS") != nullptr;
  const auto stats_start = std::chrono::steady_clock::now();
  double root_bound = std::numeric_limits<double>::quiet_NaN();
  auto stats_report = [&]() {
    if (!stats) return;
    std::fprintf(stderr, "mip n=%d k=%d nodes=%ld root_bound=%.6f objective=%.6f optimal=%d wall=%.3f\n",
                 qp.n, qp.k, result.nodes_expanded, root_bound, result.objective,
                 result.optimal ? 1 : 0,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - stats_start).count());
  };

  // Evaluates a node: conditions the instance, bounds it by roof duality,
  // updates the incumbent from a feasible completion, and either closes the
  // node (integral/feasible relaxation) or queues it for branching.  The
  // branch variable is chosen here, from the relaxation just solved, so the
  // pop loop never re-solves it.
  auto process = [&](std::vector<int8_t> fix) {
    Conditioned cond = condition(qp, fix);
    double shift = 0.0;
    if (mode == LabelMode::Exclusive) {
      shift = shift_rows_nonpositive(qp, cond, cond.problem.linear);
      add_row_exclusion_penalties(qp, cond, cond.problem);
    }
    QpboResult relaxed = solve_qpbo(cond.problem);
    const double bound = cond.constant + shift + relaxed.bound;
    if (std::isnan(root_bound)) root_bound = bound;

    Labeling completion = complete_assignment(qp, fix, cond, relaxed, mode);
    const double value = qp_objective(qp, completion);
    if (value > result.objective) {
      result.objective = value;
      result.labeling = completion;
    }

    bool closed = cond.free_vars.empty();
    if (!closed) {
      bool integral = true;
      for (double v : relaxed.values)
        if (v == 0.5) {
          integral = false;
          break;
        }
      if (integral) {
        // The relaxation optimum is attained by a binary point; for
        // Exclusive it closes the node only when that point is feasible.
        if (mode == LabelMode::MultiLabel) {
          std::vector<int8_t> full(fix);
          bool ok = true;
          for (size_t f = 0; f < cond.free_vars.size() && ok; ++f)
            ok = apply_fix(full, cond.free_vars[f], static_cast<int8_t>(relaxed.values[f]), qp.k, mode);
          if (ok) {
            Labeling exactl(qp.n, qp.k);
            for (int v = 0; v < nv; ++v)
              if (full[v] == 1) exactl.at(v / qp.k, v % qp.k) = 1.0;
            const double obj = qp_objective(qp, exactl);
            if (obj > result.objective) {
              result.objective = obj;
              result.labeling = exactl;
            }
            closed = true;
          }
        } else {
          Labeling exactl(qp.n, qp.k);
          for (int v = 0; v < nv; ++v) {
            const double y = fix[v] >= 0 ? fix[v] : relaxed.values[cond.reduced_id[v]];
            if (y == 1.0) exactl.at(v / qp.k, v % qp.k) = 1.0;
          }
          if (exclusive_feasible(exactl)) {
            const double obj = qp_objective(qp, exactl);
            if (obj > result.objective) {
              result.objective = obj;
              result.labeling = exactl;
            }
            closed = true;
          }
        }
      }
    }

    if (!closed && bound > result.objective + 1e-9 * (1.0 + std::abs(result.objective))) {
      // In MultiLabel mode, strongly persistent variables keep their values
      // in some optimum of the subproblem, so children may inherit them.
      if (mode == LabelMode::MultiLabel)
        for (size_t f = 0; f < cond.free_vars.size(); ++f)
          if (relaxed.persistent[f])
            apply_fix(fix, cond.free_vars[f], static_cast<int8_t>(relaxed.values[f]), qp.k, mode);

      // Branch variable: fractional variable with the largest unary magnitude
      // in the original instance.  In Exclusive mode it designates its whole
      // row, which the pop loop expands into one child per remaining class.
      int branch_var = -1;
      double branch_mag = -1.0;
      for (size_t f = 0; f < cond.free_vars.size(); ++f) {
        if (relaxed.values[f] != 0.5) continue;
        const double mag = std::abs(qp.unary[cond.free_vars[f]]);
        if (mag > branch_mag) {
          branch_mag = mag;
          branch_var = cond.free_vars[f];
        }
      }
      if (branch_var < 0) {
        // Integral relaxation that is Exclusive-infeasible: branch inside the
        // first row whose indicator sum is not 1.
        std::vector<double> row_sum(qp.n, 0.0);
        for (size_t f = 0; f < cond.free_vars.size(); ++f)
          if (relaxed.values[f] == 1.0) row_sum[cond.free_vars[f] / qp.k] += 1.0;
        for (int v = 0; v < nv; ++v)
          if (fix[v] == 1) row_sum[v / qp.k] += 1.0;
        for (int i = 0; i < qp.n && branch_var < 0; ++i) {
          if (row_sum[i] == 1.0) continue;
          for (int c = 0; c < qp.k; ++c) {
            const int var = i * qp.k + c;
            if (fix[var] >= 0) continue;
            const double mag = std::abs(qp.unary[var]);
            if (mag > branch_mag) {
              branch_mag = mag;
              branch_var = var;
            }
          }
        }
      }
      if (branch_var >= 0) queue.push({std::move(fix), bound, branch_var, serial++});
    }
  };

  process(std::vector<int8_t>(nv, -1));

  while (!queue.empty()) {
    if (result.nodes_expanded >= options.node_budget) {
      stats_report();
      return result;  // optimal stays false
    }
    const double tol = 1e-9 * (1.0 + std::abs(result.objective));
    BnbNode node = queue.top();
    queue.pop();
    if (node.bound <= result.objective + tol) break;  // best bound met: certificate
    ++result.nodes_expanded;

    if (mode == LabelMode::Exclusive) {
      // One child per class still available in the branch row; together they
      // partition the node's feasible completions.
      const int row = node.branch_var / qp.k;
      for (int c = 0; c < qp.k; ++c) {
        const int var = row * qp.k + c;
        if (node.fix[var] >= 0) continue;
        std::vector<int8_t> child(node.fix);
        if (apply_fix(child, var, static_cast<int8_t>(1), qp.k, mode)) process(std::move(child));
      }
    } else {
      for (int8_t value : {static_cast<int8_t>(1), static_cast<int8_t>(0)}) {
        std::vector<int8_t> child(node.fix);
        if (apply_fix(child, node.branch_var, value, qp.k, mode)) process(std::move(child));
      }
    }
  }

  result.optimal = true;
  stats_report();
  return result;
}


// ---------------------------------------------------------------------------
// Rounding
// ---------------------------------------------------------------------------

namespace {

bool row_integral_one_hot(const RelaxedSolution& r, int i) {
  int ones = 0;
  for (int c = 0; c < r.k; ++c) {
    const double v = r.at(i, c);
    if (v == 0.5) return false;
    if (v == 1.0) ++ones;
  }
  return ones == 1;
}

bool row_integral(const RelaxedSolution& r, int i) {
  for (int c = 0; c < r.k; ++c)
    if (r.at(i, c) == 0.5) return false;
  return true;
}

constexpr double kRoundingGuard = 1e6;

}  // namespace

Labeling round_relaxed(const RelaxedSolution& relaxed, const QPInstance& qp, LabelMode mode,
                       RoundingPolicy policy) {
  if (relaxed.n != qp.n || relaxed.k != qp.k) throw data_error("round_relaxed: shape mismatch");
  Labeling out(qp.n, qp.k);

  if (policy == RoundingPolicy::AbstainOnFractional) {
    for (int i = 0; i < qp.n; ++i) {
      const bool keep = mode == LabelMode::Exclusive ? row_integral_one_hot(relaxed, i)
                                                     : row_integral(relaxed, i);
      if (keep)
        for (int c = 0; c < qp.k; ++c) out.at(i, c) = relaxed.at(i, c);
    }
    return out;
  }

  if (mode == LabelMode::Exclusive) {
    std::vector<int> undecided;
    std::vector<int> classes(qp.n, 0);
    for (int i = 0; i < qp.n; ++i) {
      if (row_integral_one_hot(relaxed, i)) {
        for (int c = 0; c < qp.k; ++c)
          if (relaxed.at(i, c) == 1.0) classes[i] = c;
      } else {
        undecided.push_back(i);
      }
    }
    if (std::pow(static_cast<double>(qp.k), static_cast<double>(undecided.size())) <= kRoundingGuard) {
      std::vector<int> best(classes);
      double best_obj = -std::numeric_limits<double>::infinity();
      std::vector<int> choice(undecided.size(), 0);
      while (true) {
        for (size_t u = 0; u < undecided.size(); ++u) classes[undecided[u]] = choice[u];
        const double obj = exclusive_objective(qp, classes);
        if (obj > best_obj) {
          best_obj = obj;
          best = classes;
        }
        int pos = static_cast<int>(choice.size()) - 1;
        while (pos >= 0 && choice[pos] == qp.k - 1) choice[pos--] = 0;
        if (pos < 0) break;
        ++choice[pos];
      }
      classes = best;
    } else {
      for (int i : undecided) {
        double best_u = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < qp.k; ++c)
          if (qp.unary_at(i, c) > best_u) {
            best_u = qp.unary_at(i, c);
            classes[i] = c;
          }
      }
    }
    return Labeling::from_classes(classes, qp.k);
  }

  // MultiLabel: enumerate the fractional entries when feasible.
  std::vector<int> fractional;
  for (int v = 0; v < qp.n * qp.k; ++v) {
    if (relaxed.values[v] == 0.5)
      fractional.push_back(v);
    else
      out.at(v / qp.k, v % qp.k) = relaxed.values[v];
  }
  if (std::pow(2.0, static_cast<double>(fractional.size())) <= kRoundingGuard) {
    Labeling best = out;
    double best_obj = -std::numeric_limits<double>::infinity();
    const uint64_t count = 1ULL << fractional.size();
    for (uint64_t m = 0; m < count; ++m) {
      for (size_t b = 0; b < fractional.size(); ++b)
        out.at(fractional[b] / qp.k, fractional[b] % qp.k) =
            static_cast<double>((m >> b) & 1ULL);
      const double obj = qp_objective(qp, out);
      if (obj > best_obj) {
        best_obj = obj;
        best = out;
      }
    }
    return best;
  }
  for (int v : fractional) out.at(v / qp.k, v % qp.k) = qp.unary[v] > 0.0 ? 1.0 : 0.0;
  return out;
}

}  // namespace seglabel
