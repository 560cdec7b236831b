#include "seglabel/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace seglabel {

MaxFlow::MaxFlow(int num_nodes) : n_(num_nodes), head_(num_nodes, -1) {}

int MaxFlow::add_arc(int u, int v, double cap) {
  const int a = static_cast<int>(to_.size());
  to_.push_back(v);
  cap_.push_back(cap);
  next_.push_back(head_[u]);
  head_[u] = a;
  twin_.push_back(-1);

  to_.push_back(u);
  cap_.push_back(0.0);
  next_.push_back(head_[v]);
  head_[v] = a + 1;
  twin_.push_back(-1);

  eps_ = std::max(eps_, 1e-14 * cap);
  return a;
}

void MaxFlow::link_twins(int a, int b) {
  twin_[a] = b;
  twin_[b] = a;
  twin_[a ^ 1] = b ^ 1;
  twin_[b ^ 1] = a ^ 1;
}

bool MaxFlow::bfs_levels() {
  level_.assign(n_, -1);
  std::deque<int> queue{source_};
  level_[source_] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int a = head_[v]; a >= 0; a = next_[a]) {
      if (cap_[a] > eps_ && level_[to_[a]] < 0) {
        level_[to_[a]] = level_[v] + 1;
        queue.push_back(to_[a]);
      }
    }
  }
  return level_[sink_] >= 0;
}

double MaxFlow::dfs_augment(int v, double limit) {
  if (v == sink_) return limit;
  for (int& a = iter_[v]; a >= 0; a = next_[a]) {
    const int u = to_[a];
    if (cap_[a] > eps_ && level_[u] == level_[v] + 1) {
      const double pushed = dfs_augment(u, std::min(limit, cap_[a]));
      if (pushed > 0.0) {
        cap_[a] -= pushed;
        cap_[a ^ 1] += pushed;
        return pushed;
      }
    }
  }
  level_[v] = -1;
  return 0.0;
}

double MaxFlow::solve(int source, int sink) {
  source_ = source;
  sink_ = sink;
  double total = 0.0;
  while (bfs_levels()) {
    iter_ = head_;
    while (true) {
      const double pushed = dfs_augment(source_, std::numeric_limits<double>::infinity());
      if (pushed <= 0.0) break;
      total += pushed;
    }
  }
  return total;
}

double MaxFlow::usable(int arc, bool symmetrize) const {
  if (!symmetrize || twin_[arc] < 0) return cap_[arc];
  return 0.5 * (cap_[arc] + cap_[twin_[arc]]);
}

std::vector<char> MaxFlow::reachable_from_source(bool symmetrize) const {
  std::vector<char> seen(n_, 0);
  std::deque<int> queue{source_};
  seen[source_] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int a = head_[v]; a >= 0; a = next_[a]) {
      if (!seen[to_[a]] && usable(a, symmetrize) > eps_) {
        seen[to_[a]] = 1;
        queue.push_back(to_[a]);
      }
    }
  }
  return seen;
}

}  // namespace seglabel
