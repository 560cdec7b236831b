#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "scene_builders.hpp"
#include "seglabel/errors.hpp"
#include "seglabel/inference.hpp"
#include "seglabel/model.hpp"
#include "seglabel/qpbo.hpp"
#include "seglabel/rng.hpp"

using namespace seglabel;

namespace {

QPInstance unary_only(std::vector<double> unary, int n, int k) {
  QPInstance qp;
  qp.n = n;
  qp.k = k;
  qp.unary = std::move(unary);
  return qp;
}

// Mirror a QPInstance into the flat binary-quadratic form (k=1 rows become
// plain binary variables) so solve_qpbo can be checked against the same
// oracles.
BinaryQuadratic flatten(const QPInstance& qp) {
  BinaryQuadratic b;
  b.n = qp.n * qp.k;
  b.linear = qp.unary;
  for (const auto& block : qp.pairs)
    for (int l = 0; l < qp.k; ++l)
      for (int m = 0; m < qp.k; ++m) {
        const double theta = block.theta[l * qp.k + m];
        if (theta != 0.0) b.quadratic.emplace_back(block.i * qp.k + l, block.j * qp.k + m, theta);
      }
  return b;
}

std::vector<double> relaxed_as_flat(const RelaxedSolution& r) { return r.values; }

}  // namespace

// ---------------------------------------------------------------------------
// solve_qpbo
// ---------------------------------------------------------------------------

TEST_CASE("solve_qpbo matches the exhaustive half-integral grid optimum") {
  Rng rng(71);
  for (int trial = 0; trial < 120; ++trial) {
    const QPInstance qp = oracles::random_instance(rng, 2 + trial % 3, 2, 0.8, 2.0);
    const BinaryQuadratic b = flatten(qp);
    if (b.n > 8) continue;
    const QpboResult got = solve_qpbo(b);
    const double grid = oracles::grid_lp_optimum(b);
    CHECK(got.bound == doctest::Approx(grid).epsilon(1e-9));
    // The returned values achieve the bound under optimal-z evaluation.
    CHECK(oracles::lp_value(b, got.values) == doctest::Approx(got.bound).epsilon(1e-9));
    // Half-integrality.
    for (double v : got.values) CHECK((v == 0.0 || v == 0.5 || v == 1.0));
  }
}

TEST_CASE("solve_qpbo strong persistency: marked variables agree with every optimum") {
  Rng rng(72);
  int persistent_seen = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const QPInstance qp =
        oracles::random_instance(rng, 2 + trial % 2, 2, 0.9, 2.0, trial % 2 == 0 ? 0.5 : 0.0);
    const BinaryQuadratic b = flatten(qp);
    const QpboResult got = solve_qpbo(b);
    const auto optima = oracles::all_multilabel_optima(qp);
    REQUIRE(!optima.empty());
    for (int v = 0; v < b.n; ++v) {
      if (!got.persistent[v]) continue;
      ++persistent_seen;
      const double value = got.values[v];
      CHECK((value == 0.0 || value == 1.0));
      for (const Labeling& y : optima) CHECK(y.values()[v] == value);
    }
  }
  CHECK(persistent_seen > 50);  // the property must actually be exercised
}

TEST_CASE("solve_qpbo is exact and fully persistent on attractive couplings") {
  Rng rng(73);
  for (int trial = 0; trial < 40; ++trial) {
    QPInstance qp = oracles::random_instance(rng, 3, 2, 0.9, 2.0);
    for (auto& block : qp.pairs)
      for (double& t : block.theta) t = std::abs(t);
    const BinaryQuadratic b = flatten(qp);
    const QpboResult got = solve_qpbo(b);
    const auto best = oracles::enumerate_multilabel(qp);
    CHECK(got.bound == doctest::Approx(best.objective).epsilon(1e-9));
    for (double v : got.values) CHECK((v == 0.0 || v == 1.0));
    for (int v = 0; v < b.n; ++v) CHECK(got.persistent[v]);
  }
}

TEST_CASE("solve_qpbo leaves a symmetric conflict at one half") {
  // maximize x0 + x1 - 2 x0 x1: the two optima (0,1) and (1,0) disagree
  // everywhere, so nothing is persistent and both variables sit at 0.5.
  BinaryQuadratic b;
  b.n = 2;
  b.linear = {1.0, 1.0};
  b.quadratic.emplace_back(0, 1, -2.0);
  const QpboResult got = solve_qpbo(b);
  CHECK(got.values[0] == 0.5);
  CHECK(got.values[1] == 0.5);
  CHECK(!got.persistent[0]);
  CHECK(!got.persistent[1]);
  CHECK(got.bound == doctest::Approx(1.0));
}

TEST_CASE("solve_qpbo bound exceeds the integral optimum on an odd frustrated cycle") {
  BinaryQuadratic b;
  b.n = 3;
  b.linear = {1.0, 1.0, 1.0};
  b.quadratic.emplace_back(0, 1, -2.0);
  b.quadratic.emplace_back(1, 2, -2.0);
  b.quadratic.emplace_back(0, 2, -2.0);
  const QpboResult got = solve_qpbo(b);
  CHECK(got.bound == doctest::Approx(1.5));  // all-halves beats any integral point
  for (double v : got.values) CHECK(v == 0.5);
  // Integral optimum is 1.0 (exactly one variable on).
  QPInstance qp;
  qp.n = 3;
  qp.k = 1;
  qp.unary = b.linear;
  for (auto [i, j, c] : b.quadratic) {
    QPInstance::PairBlock block;
    block.i = i;
    block.j = j;
    block.theta = {c};
    qp.pairs.push_back(block);
  }
  CHECK(oracles::enumerate_multilabel(qp).objective == doctest::Approx(1.0));
}

// ---------------------------------------------------------------------------
// infer_exact
// ---------------------------------------------------------------------------

TEST_CASE("infer_exact picks the larger unary on a single node") {
  const QPInstance qp = unary_only({1.0, 3.0}, 1, 2);
  const ExactResult r = infer_exact(qp, LabelMode::Exclusive);
  CHECK(r.objective == 3.0);
  CHECK(r.labeling.class_of(0) == 1);

  // MultiLabel turns both positive indicators on.
  const ExactResult m = infer_exact(qp, LabelMode::MultiLabel);
  CHECK(m.objective == 4.0);
  CHECK(m.labeling.at(0, 0) == 1.0);
  CHECK(m.labeling.at(0, 1) == 1.0);
}

TEST_CASE("infer_exact follows a strong pairwise coupling with zero unaries") {
  QPInstance qp = unary_only(std::vector<double>(4, 0.0), 2, 2);
  QPInstance::PairBlock block;
  block.i = 0;
  block.j = 1;
  block.theta = {0.0, 7.0, 0.0, 0.0};  // only (class 0, class 1) rewarded
  qp.pairs.push_back(block);
  const ExactResult r = infer_exact(qp, LabelMode::Exclusive);
  CHECK(r.objective == doctest::Approx(7.0));
  CHECK(r.labeling.class_of(0) == 0);
  CHECK(r.labeling.class_of(1) == 1);
}

TEST_CASE("infer_exact breaks total ties toward the lexicographically smallest labeling") {
  const QPInstance qp = unary_only(std::vector<double>(6, 0.0), 2, 3);
  const ExactResult r = infer_exact(qp, LabelMode::Exclusive);
  CHECK(r.objective == 0.0);
  CHECK(r.labeling.class_of(0) == 0);
  CHECK(r.labeling.class_of(1) == 0);

  const ExactResult m = infer_exact(qp, LabelMode::MultiLabel);
  CHECK(m.objective == 0.0);
  for (double v : m.labeling.values()) CHECK(v == 0.0);
}

TEST_CASE("infer_exact agrees with the independent enumeration oracle, ties included") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    // Quantized coefficients provoke exact ties on half the trials.
    const double quantum = trial % 2 == 0 ? 0.5 : 0.0;
    const QPInstance qp =
        oracles::random_instance(rng, 2 + trial % 3, 2 + trial % 2, 0.7, 1.5, quantum);

    const ExactResult ex = infer_exact(qp, LabelMode::Exclusive);
    const auto ex_oracle = oracles::enumerate_exclusive(qp);
    CHECK(ex.objective == doctest::Approx(ex_oracle.objective).epsilon(1e-12));
    CHECK(ex.labeling == ex_oracle.labeling);

    if (qp.n * qp.k <= 12) {
      const ExactResult ml = infer_exact(qp, LabelMode::MultiLabel);
      const auto ml_oracle = oracles::enumerate_multilabel(qp);
      CHECK(ml.objective == doctest::Approx(ml_oracle.objective).epsilon(1e-12));
      CHECK(ml.labeling == ml_oracle.labeling);
    }
  }
}

TEST_CASE("infer_exact guards its enumeration size") {
  CHECK_THROWS_AS(infer_exact(unary_only(std::vector<double>(60, 0.0), 20, 3), LabelMode::Exclusive),
                  config_error);
  CHECK_THROWS_AS(
      infer_exact(unary_only(std::vector<double>(24, 0.0), 8, 3), LabelMode::MultiLabel),
      config_error);
  CHECK_THROWS_AS(infer_exact(QPInstance{}, LabelMode::Exclusive), data_error);
}

// ---------------------------------------------------------------------------
// infer_mip
// ---------------------------------------------------------------------------

TEST_CASE("infer_mip matches infer_exact on random instances in both modes") {
  Rng rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    const QPInstance qp = oracles::random_instance(rng, 2 + trial % 7, 2 + trial % 3, 0.6, 2.0,
                                                   trial % 5 == 0 ? 0.25 : 0.0);

    const ExactResult ex = infer_exact(qp, LabelMode::Exclusive);
    const MipResult mx = infer_mip(qp, LabelMode::Exclusive);
    CHECK(mx.optimal);
    CHECK(mx.objective == doctest::Approx(ex.objective).epsilon(1e-9));
    // The reported labeling really attains the reported objective.
    CHECK(qp_objective(qp, mx.labeling) == doctest::Approx(mx.objective).epsilon(1e-9));

    if (qp.n * qp.k <= 16) {
      const ExactResult em = infer_exact(qp, LabelMode::MultiLabel);
      const MipResult mm = infer_mip(qp, LabelMode::MultiLabel);
      CHECK(mm.optimal);
      CHECK(mm.objective == doctest::Approx(em.objective).epsilon(1e-9));
      CHECK(qp_objective(qp, mm.labeling) == doctest::Approx(mm.objective).epsilon(1e-9));
    }
  }
}

TEST_CASE("infer_mip labeling agrees with infer_exact whenever the optimum is unique") {
  Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const QPInstance qp = oracles::random_instance(rng, 2 + trial % 4, 2, 0.7, 2.0);
    const auto optima = oracles::all_multilabel_optima(qp, 1e-6);
    const MipResult mm = infer_mip(qp, LabelMode::MultiLabel);
    REQUIRE(mm.optimal);
    if (optima.size() == 1) {
      CHECK(mm.labeling == optima[0]);
      CHECK(infer_exact(qp, LabelMode::MultiLabel).labeling == optima[0]);
    }
  }
}

TEST_CASE("infer_mip closes an integral-relaxation instance at the root") {
  Rng rng(59);
  QPInstance qp = oracles::random_instance(rng, 4, 2, 0.9, 2.0);
  for (auto& block : qp.pairs)
    for (double& t : block.theta) t = std::abs(t);  // attractive -> integral root
  const MipResult r = infer_mip(qp, LabelMode::MultiLabel);
  CHECK(r.optimal);
  CHECK(r.nodes_expanded == 0);
}

TEST_CASE("infer_mip MultiLabel with all coefficients positive turns everything on") {
  Rng rng(61);
  QPInstance qp = oracles::random_instance(rng, 5, 3, 0.5, 1.0);
  for (double& u : qp.unary) u = 0.1 + std::abs(u);
  for (auto& block : qp.pairs)
    for (double& t : block.theta) t = 0.1 + std::abs(t);
  const MipResult r = infer_mip(qp, LabelMode::MultiLabel);
  CHECK(r.optimal);
  for (double v : r.labeling.values()) CHECK(v == 1.0);
}

TEST_CASE("infer_mip returns a feasible incumbent when the node budget runs out") {
  // Frustrated instance whose root relaxation is loose, so closing it needs
  // at least one branch; a zero budget must surface optimal=false.
  QPInstance qp = unary_only({1.0, 1.0, 1.0}, 3, 1);
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {0, 2}}) {
    QPInstance::PairBlock block;
    block.i = i;
    block.j = j;
    block.theta = {-2.0};
    qp.pairs.push_back(block);
  }
  const MipResult r = infer_mip(qp, LabelMode::MultiLabel, MipOptions{0});
  CHECK(!r.optimal);
  // Incumbent is feasible and no better than the true optimum.
  CHECK(qp_objective(qp, r.labeling) == doctest::Approx(r.objective).epsilon(1e-9));
  CHECK(r.objective <= oracles::enumerate_multilabel(qp).objective + 1e-9);

  // With budget the same instance is solved to optimality.
  const MipResult full = infer_mip(qp, LabelMode::MultiLabel);
  CHECK(full.optimal);
  CHECK(full.objective == doctest::Approx(1.0));
}

TEST_CASE("infer_mip is deterministic") {
  Rng rng(67);
  const QPInstance qp = oracles::random_instance(rng, 6, 3, 0.6, 2.0, 0.25);
  const MipResult a = infer_mip(qp, LabelMode::Exclusive);
  const MipResult b = infer_mip(qp, LabelMode::Exclusive);
  CHECK(a.labeling == b.labeling);
  CHECK(a.objective == b.objective);
  CHECK(a.nodes_expanded == b.nodes_expanded);
}

// ---------------------------------------------------------------------------
// compile_qp
// ---------------------------------------------------------------------------

namespace {

SceneGraph two_patch_graph() {
  Scene scene = builders::empty_scene({0, 0, 3});
  builders::add_patch_segment(scene, {0, 0, 0.4}, 0.4, 0.4, 5, 5, {0.9, 0.2, 0.2});
  builders::add_patch_segment(scene, {0, 0, 0.8}, 0.4, 0.4, 5, 5, {0.2, 0.9, 0.2});
  return SceneGraph::build(std::move(scene), 0.6);
}

}  // namespace

TEST_CASE("compile_qp with zero weights yields all-zero coefficients") {
  SceneGraph g = two_patch_graph();
  ModelConfig config;
  config.scheme = Scheme::NonAssoc;
  config.label_space.class_names = {"a", "b"};
  Weights w(config);
  const QPInstance qp = compile_qp(g, w);
  CHECK(qp.n == 2);
  CHECK(qp.k == 2);
  for (double u : qp.unary) CHECK(u == 0.0);
  for (const auto& block : qp.pairs)
    for (double t : block.theta) CHECK(t == 0.0);
}

TEST_CASE("compile_qp reproduces a constructed dot product exactly") {
  SceneGraph g = two_patch_graph();
  ModelConfig config;
  config.scheme = Scheme::NodeOnly;
  config.label_space.class_names = {"only"};
  Weights w(config);
  // Make w_0 . phi_0 equal 2.5 by putting the full mass on one coordinate
  // (the centroid height, 0.4 for this patch, so it cannot vanish).
  const int coord = kVisualDim + 4;
  const double phi = g.node_features[0][coord];
  REQUIRE(phi != 0.0);
  w.node_block(0)[coord] = 2.5 / phi;
  const QPInstance qp = compile_qp(g, w);
  CHECK(qp.unary_at(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(qp.pairs.empty());
}

TEST_CASE("compile_qp coefficients match an independent recomputation") {
  Rng rng(83);
  SceneGraph g = two_patch_graph();
  ModelConfig config;
  config.scheme = Scheme::NonAssoc;
  config.label_space.class_names = {"a", "b", "c"};
  Weights w(config);
  for (double& v : w.data) v = rng.normal();

  const QPInstance qp = compile_qp(g, w);
  REQUIRE(qp.pairs.size() == 1);
  CHECK(qp.pairs[0].i == 0);
  CHECK(qp.pairs[0].j == 1);

  // Unary: dot of the class's node block with the node features.
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 3; ++c) {
      double expected = 0.0;
      for (int d = 0; d < config.node_dim; ++d)
        expected += w.node_block(c)[d] * g.node_features[i][d];
      CHECK(qp.unary_at(i, c) == doctest::Approx(expected).epsilon(1e-12));
    }

  // Pairwise: dot of the (l,k) edge block with the gathered edge features.
  std::vector<double> feat(group_dim(EdgeFeatureGroup::All, config));
  gather_edge_features(g.edge_features[0], EdgeFeatureGroup::All, feat.data());
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k) {
      double expected = 0.0;
      const double* block = w.edge_block(0, l, k);
      REQUIRE(block != nullptr);
      for (size_t d = 0; d < feat.size(); ++d) expected += block[d] * feat[d];
      CHECK(qp.pairs[0].theta[l * 3 + k] == doctest::Approx(expected).epsilon(1e-12));
    }
}

// ---------------------------------------------------------------------------
// infer_relaxed
// ---------------------------------------------------------------------------

TEST_CASE("infer_relaxed rejects non-finite coefficients") {
  QPInstance qp = unary_only({1.0, std::nan("")}, 1, 2);
  CHECK_THROWS_AS(infer_relaxed(qp), data_error);

  QPInstance qp2 = unary_only({1.0, 1.0, 1.0, 1.0}, 2, 2);
  QPInstance::PairBlock block;
  block.i = 0;
  block.j = 1;
  block.theta = {0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
  qp2.pairs.push_back(block);
  CHECK_THROWS_AS(infer_relaxed(qp2), data_error);
}

TEST_CASE("infer_relaxed values are half-integral and achieve the reported objective") {
  Rng rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const QPInstance qp = oracles::random_instance(rng, 2 + trial % 4, 1 + trial % 3, 0.6, 2.0,
                                                   trial % 7 == 0 ? 0.5 : 0.0);
    const RelaxedSolution r = infer_relaxed(qp);
    for (double v : r.values) CHECK((v == 0.0 || v == 0.5 || v == 1.0));
    CHECK(oracles::lp_value(flatten(qp), relaxed_as_flat(r)) ==
          doctest::Approx(r.objective).epsilon(1e-9));
    for (int i = 0; i < r.n; ++i)
      for (int c = 0; c < r.k; ++c)
        if (r.is_persistent(i, c)) CHECK((r.at(i, c) == 0.0 || r.at(i, c) == 1.0));
  }
}

TEST_CASE("relaxation dominance: relaxed >= MIP >= any feasible labeling") {
  Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const QPInstance qp = oracles::random_instance(rng, 2 + trial % 4, 2, 0.7, 2.0);
    const RelaxedSolution relaxed = infer_relaxed(qp);
    const ExactResult ml = infer_exact(qp, LabelMode::MultiLabel);
    const ExactResult ex = infer_exact(qp, LabelMode::Exclusive);
    CHECK(relaxed.objective >= ml.objective - 1e-9);
    CHECK(ml.objective >= ex.objective - 1e-9);  // Exclusive is a restriction

    const MipResult mip = infer_mip(qp, LabelMode::MultiLabel);
    CHECK(relaxed.objective >= mip.objective - 1e-9);
    // Random feasible labelings never beat the MIP optimum.
    for (int s = 0; s < 5; ++s) {
      Labeling y(qp.n, qp.k);
      for (int i = 0; i < qp.n; ++i)
        for (int c = 0; c < qp.k; ++c) y.at(i, c) = rng.uniform() < 0.5 ? 1.0 : 0.0;
      CHECK(qp_objective(qp, y) <= mip.objective + 1e-9);
    }
  }
}

TEST_CASE("infer_relaxed persistency matches every enumerated optimum") {
  Rng rng(43);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const QPInstance qp =
        oracles::random_instance(rng, 2 + trial % 3, 2, 0.8, 2.0, trial % 3 == 0 ? 0.5 : 0.0);
    const RelaxedSolution r = infer_relaxed(qp);
    const auto optima = oracles::all_multilabel_optima(qp);
    for (int i = 0; i < qp.n; ++i)
      for (int c = 0; c < qp.k; ++c) {
        if (!r.is_persistent(i, c)) continue;
        ++checked;
        for (const Labeling& y : optima) CHECK(y.at(i, c) == r.at(i, c));
      }
  }
  CHECK(checked > 100);
}

// ---------------------------------------------------------------------------
// round_relaxed
// ---------------------------------------------------------------------------

TEST_CASE("round_relaxed keeps a fully integral solution under both policies") {
  // Strong per-row preferences, no couplings: the relaxation is integral and
  // one-hot, so both policies return it unchanged.
  QPInstance qp = unary_only({5.0, -1.0, -1.0, 4.0}, 2, 2);
  const RelaxedSolution r = infer_relaxed(qp);
  for (double v : r.values) CHECK((v == 0.0 || v == 1.0));
  for (RoundingPolicy policy :
       {RoundingPolicy::AbstainOnFractional, RoundingPolicy::ExhaustFractional}) {
    const Labeling y = round_relaxed(r, qp, LabelMode::Exclusive, policy);
    CHECK(y.class_of(0) == 0);
    CHECK(y.class_of(1) == 1);
  }
  const Labeling m = round_relaxed(r, qp, LabelMode::MultiLabel,
                                   RoundingPolicy::AbstainOnFractional);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 1) == 1.0);
  CHECK(m.at(0, 1) == 0.0);
}

TEST_CASE("round_relaxed abstains exactly on the fractional rows") {
  // Nodes 0 and 1 are locked in a symmetric conflict (both 0.5); node 2 has a
  // decisive positive unary and stays labeled.
  QPInstance qp = unary_only({1.0, 1.0, 5.0}, 3, 1);
  QPInstance::PairBlock block;
  block.i = 0;
  block.j = 1;
  block.theta = {-2.0};
  qp.pairs.push_back(block);
  const RelaxedSolution r = infer_relaxed(qp);
  CHECK(r.at(0, 0) == 0.5);
  CHECK(r.at(1, 0) == 0.5);
  CHECK(r.at(2, 0) == 1.0);

  const Labeling y = round_relaxed(r, qp, LabelMode::MultiLabel,
                                   RoundingPolicy::AbstainOnFractional);
  CHECK(y.row_is_zero(0));
  CHECK(y.row_is_zero(1));
  CHECK(y.at(2, 0) == 1.0);
}

TEST_CASE("round_relaxed ExhaustFractional recovers the exact optimum on frustrated instances") {
  Rng rng(89);
  for (int trial = 0; trial < 40; ++trial) {
    QPInstance qp = oracles::random_instance(rng, 3 + trial % 3, 2, 0.9, 2.0);
    for (auto& blockref : qp.pairs)
      for (double& t : blockref.theta) t = -std::abs(t);  // repulsive -> fractional
    const RelaxedSolution r = infer_relaxed(qp);

    const Labeling ml =
        round_relaxed(r, qp, LabelMode::MultiLabel, RoundingPolicy::ExhaustFractional);
    CHECK(qp_objective(qp, ml) ==
          doctest::Approx(infer_exact(qp, LabelMode::MultiLabel).objective).epsilon(1e-9));

    // Exclusive exhaustion respects the one-per-row constraint and finds the
    // best completion of the persistent part.
    const Labeling ex =
        round_relaxed(r, qp, LabelMode::Exclusive, RoundingPolicy::ExhaustFractional);
    ValidationReport report = validate_labeling(ex, [] {
      LabelSpace s;
      s.class_names = {"a", "b"};
      return s;
    }());
    CHECK(report.ok);
    CHECK(qp_objective(qp, ex) <=
          infer_exact(qp, LabelMode::Exclusive).objective + 1e-9);
  }
}

TEST_CASE("round_relaxed rejects mismatched shapes") {
  QPInstance qp = unary_only({1.0, 1.0}, 1, 2);
  RelaxedSolution r = infer_relaxed(qp);
  QPInstance other = unary_only({1.0, 1.0, 1.0, 1.0}, 2, 2);
  CHECK_THROWS_AS(
      round_relaxed(r, other, LabelMode::MultiLabel, RoundingPolicy::AbstainOnFractional),
      data_error);
}
