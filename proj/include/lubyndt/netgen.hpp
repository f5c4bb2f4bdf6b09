#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lubyndt {

using NodeId = std::int32_t;
using LinkId = std::int32_t;
using EdgeId = std::int32_t;
using FlowId = std::int32_t;

struct Node {
  NodeId id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct Link {
  LinkId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
};

// Directed unit-disk graph. Links are ordered by (src, dst), ids are dense.
struct ConnectivityGraph {
  std::vector<Node> nodes;
  std::vector<Link> links;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_links() const { return links.size(); }
};

struct ConflictEdge {
  LinkId a = 0;  // a < b
  LinkId b = 0;
};

// Undirected conflict graph over links in CSR form. Slot k in [offsets[e],
// offsets[e+1]) holds neighbor `neighbors[k]` reached through conflict edge
// `neighbor_edges[k]`. Arrays indexed by slot are how per-(e, i) quantities
// such as conditional contention probabilities are stored.
struct ConflictGraph {
  std::size_t link_count = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<LinkId> neighbors;
  std::vector<EdgeId> neighbor_edges;
  std::vector<ConflictEdge> edges;

  // Pairs are normalized and deduplicated. Throws std::invalid_argument on
  // self-loops or out-of-range ids.
  static ConflictGraph from_edges(std::size_t num_links,
                                  std::vector<std::pair<LinkId, LinkId>> pairs);

  std::size_t num_links() const { return link_count; }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t degree(LinkId e) const { return offsets[e + 1] - offsets[e]; }

  std::span<const LinkId> neighbors_of(LinkId e) const {
    return {neighbors.data() + offsets[e], degree(e)};
  }
  std::span<const EdgeId> edges_of(LinkId e) const {
    return {neighbor_edges.data() + offsets[e], degree(e)};
  }
};

struct Flow {
  FlowId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double base_rate = 1.0;     // a_f, packets/slot before load scaling
  std::vector<LinkId> path;   // filled by routing
};

struct FlowSet {
  double load = 1.0;  // beta
  std::vector<Flow> flows;

  double arrival_rate(const Flow& f) const { return load * f.base_rate; }
  std::size_t size() const { return flows.size(); }
};

// |E| x |F| matrix of per-flow link rates (packets/slot), row-major by link.
struct RoutingMatrix {
  std::size_t num_links = 0;
  std::size_t num_flows = 0;
  std::vector<double> entries;

  RoutingMatrix() = default;
  RoutingMatrix(std::size_t links, std::size_t flows)
      : num_links(links), num_flows(flows), entries(links * flows, 0.0) {}

  double operator()(LinkId e, FlowId f) const { return entries[e * num_flows + f]; }
  double& operator()(LinkId e, FlowId f) { return entries[e * num_flows + f]; }

  // lambda_e = sum_f Lambda_{e,f}
  std::vector<double> link_loads() const;
};

// |V| x |E| node-link incidence matrix: +1 where the link leaves the node,
// -1 where it enters.
struct IncidenceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> entries;

  int operator()(std::size_t node, std::size_t link) const { return entries[node * cols + link]; }
};

struct InstanceSeeds {
  std::uint64_t topology = 0;
  std::uint64_t realization = 0;
};

struct Instance {
  ConnectivityGraph connectivity;
  ConflictGraph conflicts;
  FlowSet flows;
  RoutingMatrix routing;
  std::vector<double> rates;  // long-term link rates r_e
  InstanceSeeds seeds;

  double load() const { return flows.load; }
  std::size_t num_links() const { return connectivity.num_links(); }
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace netgen {

inline constexpr double kRadius = 1.0;
inline constexpr int kMaxPlacementAttempts = 1000;
inline constexpr double kMinRate = 10.0;
inline constexpr double kMaxRate = 42.0;
inline constexpr double kMinBaseRate = 0.5;
inline constexpr double kMaxBaseRate = 1.5;

// Side of the square holding num_nodes at density 8/pi.
double square_side(int num_nodes);

// Links for every ordered pair within kRadius, ids by (src, dst).
ConnectivityGraph unit_disk_graph(std::vector<Node> nodes);

bool is_connected(const ConnectivityGraph& g);

// Uniform placement, resampled with a fresh sub-seed until connected.
// Throws TopologyError after kMaxPlacementAttempts.
ConnectivityGraph generate_topology(int num_nodes, std::uint64_t seed);

// Conflict edge between every pair of distinct links sharing an endpoint.
ConflictGraph build_conflict_graph(const ConnectivityGraph& g);

IncidenceMatrix incidence_matrix(const ConnectivityGraph& g);

// Inclusive bounds of the flow-count distribution for |V| nodes.
std::pair<int, int> flow_count_range(int num_nodes);

FlowSet sample_flows(const ConnectivityGraph& g, double load, std::uint64_t seed);

// Minimum-hop path, ties broken by the lexicographically smallest node
// sequence. Empty if dst is unreachable or src == dst.
std::vector<LinkId> shortest_path(const ConnectivityGraph& g, NodeId src, NodeId dst);

// Assigns each flow its shortest path and returns Lambda with
// Lambda_{e,f} = load * a_f on path links.
RoutingMatrix shortest_path_routing(const ConnectivityGraph& g, FlowSet& flows);

std::vector<double> sample_link_rates(const ConnectivityGraph& g, std::uint64_t seed);

Instance make_instance(int num_nodes, double load, InstanceSeeds seeds);

// One human-readable entry per violated invariant; empty when valid.
std::vector<std::string> validate_instance(const Instance& inst);

}  // namespace netgen
}  // namespace lubyndt
