#pragma once

#include <vector>

namespace seglabel {

// Dinic max-flow over double capacities. Arc pairs can be linked as "twins"
// (the complement-symmetric copies the roof-duality network carries); the
// source-side reachability query can then symmetrize residuals across twin
// pairs, which keeps the min-cut labeling consistent under complementation.
class MaxFlow {
 public:
  explicit MaxFlow(int num_nodes);

  // Adds arc u->v with `cap` plus the zero-capacity reverse arc; returns the
  // forward arc id.
  int add_arc(int u, int v, double cap);
  // Declares arcs a and b complement-symmetric copies of each other (their
  // reverse arcs are linked implicitly).
  void link_twins(int a, int b);

  double solve(int source, int sink);

  // Nodes reachable from the source in the residual graph. With
  // `symmetrize`, an arc's usable residual is averaged with its twin's,
  // which realizes the symmetric maximum flow.
  std::vector<char> reachable_from_source(bool symmetrize) const;

  double residual(int arc) const { return cap_[arc]; }

 private:
  bool bfs_levels();
  double dfs_augment(int v, double limit);
  double usable(int arc, bool symmetrize) const;

  int n_, source_ = 0, sink_ = 0;
  std::vector<int> head_, next_, to_, twin_;
  std::vector<double> cap_;
  std::vector<int> level_, iter_;
  double eps_ = 1e-12;
};

}  // namespace seglabel
