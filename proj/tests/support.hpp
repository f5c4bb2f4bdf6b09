#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "lubyndt/netgen.hpp"

namespace lubyndt::testing {

inline ConflictGraph clique(int n) {
  std::vector<std::pair<LinkId, LinkId>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  return ConflictGraph::from_edges(n, pairs);
}

inline ConflictGraph chain(int n) {
  std::vector<std::pair<LinkId, LinkId>> pairs;
  for (int a = 0; a + 1 < n; ++a) pairs.emplace_back(a, a + 1);
  return ConflictGraph::from_edges(n, pairs);
}

// Instance over hand-placed nodes with flows given as (src, dst, a_f).
struct FlowSpec {
  NodeId src;
  NodeId dst;
  double base_rate;
};

inline Instance hand_instance(std::vector<Node> nodes, const std::vector<FlowSpec>& flows,
                              double load, double rate) {
  Instance inst;
  inst.connectivity = netgen::unit_disk_graph(std::move(nodes));
  inst.conflicts = netgen::build_conflict_graph(inst.connectivity);
  inst.flows.load = load;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    inst.flows.flows.push_back(
        {static_cast<FlowId>(f), flows[f].src, flows[f].dst, flows[f].base_rate, {}});
  }
  inst.routing = netgen::shortest_path_routing(inst.connectivity, inst.flows);
  inst.rates.assign(inst.num_links(), rate);
  return inst;
}

// Two nodes half a unit apart: links 0->1 (id 0) and 1->0 (id 1).
inline Instance single_pair(double base_rate, double load, double rate) {
  return hand_instance({{0, 0.0, 0.0}, {1, 0.5, 0.0}}, {{0, 1, base_rate}}, load, rate);
}

// Independent reference for one contention round of the weighted Luby rule,
// written against an adjacency matrix rather than the library's CSR graph.
class OneRoundOracle {
 public:
  OneRoundOracle(int n, const std::vector<std::pair<int, int>>& edges, std::vector<double> z)
      : n_(n), adj_(n * n, 0), z_(std::move(z)) {
    for (auto [a, b] : edges) adj_[a * n + b] = adj_[b * n + a] = 1;
  }

  // Winners of one round given which links contend.
  std::vector<int> winners(const std::vector<int>& contending, std::mt19937_64& rng) const {
    std::vector<double> c(n_, 0.0);
    for (int e = 0; e < n_; ++e) {
      if (contending[e]) c[e] = std::uniform_real_distribution<double>(0.0, z_[e])(rng);
    }
    std::vector<int> win(n_, 0);
    for (int e = 0; e < n_; ++e) {
      if (!contending[e]) continue;
      bool best = true;
      for (int i = 0; i < n_ && best; ++i) {
        if (adj_[e * n_ + i] && c[i] >= c[e]) best = false;
      }
      win[e] = best ? 1 : 0;
    }
    return win;
  }

 private:
  int n_;
  std::vector<int> adj_;
  std::vector<double> z_;
};

}  // namespace lubyndt::testing
