#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ads/error.hpp"
#include "ads/smoothing.hpp"

namespace ads {

FlowNetwork::FlowNetwork(int nodes, int source, int sink)
    : source_(source), sink_(sink), head_(static_cast<std::size_t>(nodes), -1) {
  if (nodes < 2 || source < 0 || sink < 0 || source >= nodes || sink >= nodes || source == sink) {
    throw ContractViolation("FlowNetwork: invalid node count or terminals");
  }
}

void FlowNetwork::add_arc(int from, int to, double capacity) {
  if (from < 0 || to < 0 || from >= nodes() || to >= nodes()) {
    throw ContractViolation("FlowNetwork::add_arc: node out of range");
  }
  if (!(capacity >= 0.0) || !std::isfinite(capacity)) {
    throw ContractViolation("FlowNetwork::add_arc: capacity must be finite and nonnegative");
  }
  if (from == to || capacity == 0.0) return;
  const int forward = static_cast<int>(arcs_.size());
  arcs_.push_back({to, head_[static_cast<std::size_t>(from)], capacity});
  head_[static_cast<std::size_t>(from)] = forward;
  arcs_.push_back({from, head_[static_cast<std::size_t>(to)], 0.0});
  head_[static_cast<std::size_t>(to)] = forward + 1;
}

FlowNetwork::Result FlowNetwork::maxflow() const {
  const int n = nodes();
  std::vector<double> residual(arcs_.size());
  double max_cap = 0.0;
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    residual[a] = arcs_[a].capacity;
    max_cap = std::max(max_cap, arcs_[a].capacity);
  }
  const double eps = max_cap * 1e-14;
  std::vector<int> level(static_cast<std::size_t>(n));
  std::vector<int> current(static_cast<std::size_t>(n));
  std::vector<int> path;
  std::queue<int> queue;

  const auto bfs = [&] {
    std::fill(level.begin(), level.end(), -1);
    level[static_cast<std::size_t>(source_)] = 0;
    queue.push(source_);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int a = head_[static_cast<std::size_t>(u)]; a >= 0; a = arcs_[static_cast<std::size_t>(a)].next) {
        const int v = arcs_[static_cast<std::size_t>(a)].to;
        if (residual[static_cast<std::size_t>(a)] > eps && level[static_cast<std::size_t>(v)] < 0) {
          level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
          queue.push(v);
        }
      }
    }
    return level[static_cast<std::size_t>(sink_)] >= 0;
  };
  const auto tail = [&](int a) { return arcs_[static_cast<std::size_t>(a ^ 1)].to; };

  double flow = 0.0;
  while (bfs()) {
    current = head_;
    path.clear();
    int u = source_;
    // Iterative blocking-flow search on the level graph.
    while (true) {
      if (u == sink_) {
        double push = std::numeric_limits<double>::infinity();
        for (int a : path) push = std::min(push, residual[static_cast<std::size_t>(a)]);
        std::size_t cut = path.size();
        for (std::size_t i = 0; i < path.size(); ++i) {
          const auto a = static_cast<std::size_t>(path[i]);
          residual[a] -= push;
          residual[a ^ 1] += push;
          if (residual[a] <= eps && cut == path.size()) cut = i;
        }
        flow += push;
        path.resize(cut);
        u = path.empty() ? source_ : arcs_[static_cast<std::size_t>(path.back())].to;
        continue;
      }
      int& a = current[static_cast<std::size_t>(u)];
      while (a >= 0) {
        const auto& arc = arcs_[static_cast<std::size_t>(a)];
        if (residual[static_cast<std::size_t>(a)] > eps &&
            level[static_cast<std::size_t>(arc.to)] == level[static_cast<std::size_t>(u)] + 1) {
          break;
        }
        a = arc.next;
      }
      if (a >= 0) {
        path.push_back(a);
        u = arcs_[static_cast<std::size_t>(a)].to;
        continue;
      }
      if (u == source_) break;
      level[static_cast<std::size_t>(u)] = -1;  // dead end for this phase
      const int back = path.back();
      path.pop_back();
      u = tail(back);
      current[static_cast<std::size_t>(u)] = arcs_[static_cast<std::size_t>(back)].next;
    }
  }

  Result result;
  result.flow = flow;
  result.source_side.assign(static_cast<std::size_t>(n), false);
  result.source_side[static_cast<std::size_t>(source_)] = true;
  queue.push(source_);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int a = head_[static_cast<std::size_t>(u)]; a >= 0; a = arcs_[static_cast<std::size_t>(a)].next) {
      const int v = arcs_[static_cast<std::size_t>(a)].to;
      if (residual[static_cast<std::size_t>(a)] > eps && !result.source_side[static_cast<std::size_t>(v)]) {
        result.source_side[static_cast<std::size_t>(v)] = true;
        queue.push(v);
      }
    }
  }
  return result;
}

}  // namespace ads
