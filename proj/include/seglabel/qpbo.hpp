#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

namespace seglabel {

// max over x in {0,1}^n of  sum_i linear[i] x_i + sum quadratic (i,j,c) c x_i x_j.
// Duplicate (i,j) terms are summed; (i,j) and (j,i) are the same term.
struct BinaryQuadratic {
  int n = 0;
  std::vector<double> linear;
  std::vector<std::tuple<int, int, double>> quadratic;
};

struct QpboResult {
  // Half-integral relaxation optimum, entries in {0, 0.5, 1}.
  std::vector<double> values;
  // True where the value is integral AND forced: every integral maximizer
  // agrees there (strong persistency from the min-cut labeling).
  std::vector<std::uint8_t> persistent;
  // Roof-dual bound: the relaxation optimum, >= the integral optimum.
  double bound = 0.0;
};

// Roof duality: the problem is rewritten as a posiform, lowered onto the
// complement-symmetric implication network, and solved with one max-flow.
// Literal nodes reachable from the source in the (symmetrized) residual
// graph take value 1; their complements take 0; the rest sit at 0.5.
QpboResult solve_qpbo(const BinaryQuadratic& problem);

}  // namespace seglabel
