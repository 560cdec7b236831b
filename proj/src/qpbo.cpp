#include "seglabel/qpbo.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>

#include "seglabel/errors.hpp"
#include "seglabel/maxflow.hpp"

namespace seglabel {

namespace {

// Literal node ids: x_i -> 2i, complement of x_i -> 2i+1.
inline int lit(int var, bool negated) { return 2 * var + (negated ? 1 : 0); }

}  // namespace

QpboResult solve_qpbo(const BinaryQuadratic& problem) {
  const int n = problem.n;
  if (static_cast<int>(problem.linear.size()) != n)
    throw data_error("solve_qpbo: linear coefficient count mismatch");

  // Maximization -> minimize E(x) = -S(x).
  std::vector<double> lin(n);
  for (int i = 0; i < n; ++i) lin[i] = -problem.linear[i];
  std::map<std::pair<int, int>, double> quad;
  for (const auto& [a, b, c] : problem.quadratic) {
    if (a == b || a < 0 || b < 0 || a >= n || b >= n)
      throw data_error("solve_qpbo: bad quadratic term");
    quad[std::minmax(a, b)] -= c;
  }

  // Posiform conversion. A negative quadratic coefficient c on x_i x_j is
  // rewritten as c x_i + (-c) x_i (1-x_j); a negative linear coefficient c on
  // x_i as c + (-c)(1-x_i). Every remaining term has a non-negative weight on
  // a product of literals, and each such term becomes the complement-
  // symmetric arc pair of the implication network with capacity c/2.
  double constant = 0.0;
  const int source = 2 * n, sink = 2 * n + 1;
  MaxFlow flow(2 * n + 2);
  auto add_pair = [&](int u, int v, double cap) {
    // Term cap * [u=1][v=1]: avoiding it is the implication u -> not(v).
    const int a = flow.add_arc(u, v ^ 1, 0.5 * cap);
    const int b = flow.add_arc(v, u ^ 1, 0.5 * cap);
    flow.link_twins(a, b);
  };

  for (const auto& [key, c] : quad) {
    const auto [i, j] = key;
    if (c >= 0.0) {
      if (c > 0.0) add_pair(lit(i, false), lit(j, false), c);
    } else {
      lin[i] += c;
      add_pair(lit(i, false), lit(j, true), -c);
    }
  }
  for (int i = 0; i < n; ++i) {
    double c = lin[i];
    bool negated = false;
    if (c < 0.0) {
      constant += c;
      c = -c;
      negated = true;
    }
    if (c > 0.0) {
      // Linear term c * u == c * u * TRUE; source plays the TRUE literal.
      const int u = lit(i, negated);
      const int a = flow.add_arc(source, u ^ 1, 0.5 * c);
      const int b = flow.add_arc(u, sink, 0.5 * c);
      flow.link_twins(a, b);
    }
  }

  const double flow_value = flow.solve(source, sink);
  const std::vector<char> reach = flow.reachable_from_source(/*symmetrize=*/true);

  QpboResult result;
  result.bound = -(constant + flow_value);
  result.values.assign(n, 0.5);
  result.persistent.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const bool pos = reach[lit(i, false)], neg = reach[lit(i, true)];
    if (pos == neg) continue;  // both-sides or neither: leave at 0.5
    result.values[i] = pos ? 1.0 : 0.0;
    result.persistent[i] = 1;
  }
  return result;
}

}  // namespace seglabel
