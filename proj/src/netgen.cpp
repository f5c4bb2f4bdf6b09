#include "lubyndt/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "lubyndt/rng.hpp"

namespace lubyndt {

ConflictGraph ConflictGraph::from_edges(std::size_t num_links,
                                        std::vector<std::pair<LinkId, LinkId>> pairs) {
  for (auto& [a, b] : pairs) {
    if (a == b) throw std::invalid_argument("conflict self-loop on link " + std::to_string(a));
    if (a < 0 || b < 0 || static_cast<std::size_t>(std::max(a, b)) >= num_links) {
      throw std::invalid_argument("conflict edge references unknown link");
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  ConflictGraph g;
  g.link_count = num_links;
  g.edges.reserve(pairs.size());
  std::vector<std::size_t> degree(num_links, 0);
  for (const auto& [a, b] : pairs) {
    g.edges.push_back({a, b});
    ++degree[a];
    ++degree[b];
  }
  g.offsets.assign(num_links + 1, 0);
  for (std::size_t e = 0; e < num_links; ++e) g.offsets[e + 1] = g.offsets[e] + degree[e];
  g.neighbors.resize(g.offsets.back());
  g.neighbor_edges.resize(g.offsets.back());
  std::vector<std::size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  // Edges are sorted by (a, b), so each adjacency row comes out sorted.
  for (std::size_t id = 0; id < g.edges.size(); ++id) {
    const auto [a, b] = g.edges[id];
    g.neighbors[cursor[a]] = b;
    g.neighbor_edges[cursor[a]++] = static_cast<EdgeId>(id);
  }
  for (std::size_t id = 0; id < g.edges.size(); ++id) {
    const auto [a, b] = g.edges[id];
    g.neighbors[cursor[b]] = a;
    g.neighbor_edges[cursor[b]++] = static_cast<EdgeId>(id);
  }
  for (std::size_t e = 0; e < num_links; ++e) {
    const auto begin = g.offsets[e];
    const auto end = g.offsets[e + 1];
    std::vector<std::pair<LinkId, EdgeId>> row;
    row.reserve(end - begin);
    for (auto k = begin; k < end; ++k) row.emplace_back(g.neighbors[k], g.neighbor_edges[k]);
    std::sort(row.begin(), row.end());
    for (auto k = begin; k < end; ++k) {
      g.neighbors[k] = row[k - begin].first;
      g.neighbor_edges[k] = row[k - begin].second;
    }
  }
  return g;
}

std::vector<double> RoutingMatrix::link_loads() const {
  std::vector<double> loads(num_links, 0.0);
  for (std::size_t e = 0; e < num_links; ++e) {
    double sum = 0.0;
    for (std::size_t f = 0; f < num_flows; ++f) sum += entries[e * num_flows + f];
    loads[e] = sum;
  }
  return loads;
}

namespace netgen {

namespace {

bool within_range(const Node& a, const Node& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy <= kRadius * kRadius;
}

std::vector<std::vector<LinkId>> out_links(const ConnectivityGraph& g) {
  std::vector<std::vector<LinkId>> out(g.num_nodes());
  for (const auto& l : g.links) out[l.src].push_back(l.id);
  for (auto& row : out) {
    std::sort(row.begin(), row.end(),
              [&](LinkId a, LinkId b) { return g.links[a].dst < g.links[b].dst; });
  }
  return out;
}

}  // namespace

double square_side(int num_nodes) {
  return std::sqrt(static_cast<double>(num_nodes) * std::numbers::pi / 8.0);
}

ConnectivityGraph unit_disk_graph(std::vector<Node> nodes) {
  ConnectivityGraph g;
  g.nodes = std::move(nodes);
  const auto n = g.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !within_range(g.nodes[i], g.nodes[j])) continue;
      g.links.push_back({static_cast<LinkId>(g.links.size()), static_cast<NodeId>(i),
                         static_cast<NodeId>(j)});
    }
  }
  return g;
}

bool is_connected(const ConnectivityGraph& g) {
  const auto n = g.num_nodes();
  if (n == 0) return true;
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& l : g.links) {
    adj[l.src].push_back(l.dst);
    adj[l.dst].push_back(l.src);
  }
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

ConnectivityGraph generate_topology(int num_nodes, std::uint64_t seed) {
  if (num_nodes < 2) throw std::invalid_argument("generate_topology: num_nodes must be >= 2");
  const double side = square_side(num_nodes);
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    Engine engine(derive_seed(seed, "placement", static_cast<std::uint64_t>(attempt)));
    std::vector<Node> nodes(num_nodes);
    for (int i = 0; i < num_nodes; ++i) {
      nodes[i].id = i;
      nodes[i].x = side * uniform01(engine);
      nodes[i].y = side * uniform01(engine);
    }
    auto g = unit_disk_graph(std::move(nodes));
    // Links are symmetric, so weak connectivity implies strong connectivity.
    if (is_connected(g)) return g;
  }
  std::ostringstream msg;
  msg << "generate_topology: no connected placement for " << num_nodes << " nodes, seed " << seed
      << " after " << kMaxPlacementAttempts << " attempts";
  throw TopologyError(msg.str());
}

ConflictGraph build_conflict_graph(const ConnectivityGraph& g) {
  std::vector<std::vector<LinkId>> incident(g.num_nodes());
  for (const auto& l : g.links) {
    incident[l.src].push_back(l.id);
    incident[l.dst].push_back(l.id);
  }
  std::vector<std::pair<LinkId, LinkId>> pairs;
  for (const auto& row : incident) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      for (std::size_t j = i + 1; j < row.size(); ++j) pairs.emplace_back(row[i], row[j]);
    }
  }
  return ConflictGraph::from_edges(g.num_links(), std::move(pairs));
}

IncidenceMatrix incidence_matrix(const ConnectivityGraph& g) {
  IncidenceMatrix m;
  m.rows = g.num_nodes();
  m.cols = g.num_links();
  m.entries.assign(m.rows * m.cols, 0);
  for (const auto& l : g.links) {
    m.entries[l.src * m.cols + l.id] = +1;
    m.entries[l.dst * m.cols + l.id] = -1;
  }
  return m;
}

std::pair<int, int> flow_count_range(int num_nodes) {
  const int lo = static_cast<int>(std::floor(0.15 * num_nodes));
  const int hi = static_cast<int>(std::ceil(0.25 * num_nodes));
  return {lo, hi};
}

FlowSet sample_flows(const ConnectivityGraph& g, double load, std::uint64_t seed) {
  if (!(load > 0.0)) throw std::invalid_argument("sample_flows: load must be positive");
  const auto n = static_cast<int>(g.num_nodes());
  if (n < 2) throw std::invalid_argument("sample_flows: need at least two nodes");
  Engine engine(seed);
  const auto [lo, hi] = flow_count_range(n);
  const int count = std::uniform_int_distribution<int>(lo, hi)(engine);

  FlowSet set;
  set.load = load;
  set.flows.reserve(count);
  // Ordered pair (src, dst), src != dst, uniform over the n(n-1) choices.
  std::uniform_int_distribution<int> pick_src(0, n - 1);
  std::uniform_int_distribution<int> pick_other(0, n - 2);
  for (int f = 0; f < count; ++f) {
    Flow flow;
    flow.id = f;
    flow.src = pick_src(engine);
    const int other = pick_other(engine);
    flow.dst = other >= flow.src ? other + 1 : other;
    flow.base_rate = kMinBaseRate + (kMaxBaseRate - kMinBaseRate) * uniform01(engine);
    set.flows.push_back(std::move(flow));
  }
  return set;
}

std::vector<LinkId> shortest_path(const ConnectivityGraph& g, NodeId src, NodeId dst) {
  const auto n = g.num_nodes();
  if (src == dst) return {};
  // Hop distance to dst over reversed links.
  std::vector<std::vector<NodeId>> in(n);
  for (const auto& l : g.links) in[l.dst].push_back(l.src);
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::vector<int> dist(n, kUnreached);
  std::deque<NodeId> queue{dst};
  dist[dst] = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto u : in[v]) {
      if (dist[u] == kUnreached) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  if (dist[src] == kUnreached) return {};

  // Greedy descent choosing the smallest next node id yields the
  // lexicographically smallest sequence among all minimum-hop paths.
  const auto out = out_links(g);
  std::vector<LinkId> path;
  NodeId u = src;
  while (u != dst) {
    for (auto id : out[u]) {
      const auto v = g.links[id].dst;
      if (dist[v] == dist[u] - 1) {
        path.push_back(id);
        u = v;
        break;
      }
    }
  }
  return path;
}

RoutingMatrix shortest_path_routing(const ConnectivityGraph& g, FlowSet& flows) {
  RoutingMatrix routing(g.num_links(), flows.size());
  for (auto& flow : flows.flows) {
    flow.path = shortest_path(g, flow.src, flow.dst);
    if (flow.path.empty()) {
      throw std::invalid_argument("shortest_path_routing: flow " + std::to_string(flow.id) +
                                  " has no path");
    }
    const double rate = flows.arrival_rate(flow);
    for (auto e : flow.path) routing(e, flow.id) = rate;
  }
  return routing;
}

std::vector<double> sample_link_rates(const ConnectivityGraph& g, std::uint64_t seed) {
  Engine engine(seed);
  std::vector<double> rates(g.num_links());
  for (auto& r : rates) r = kMinRate + (kMaxRate - kMinRate) * uniform01(engine);
  return rates;
}

Instance make_instance(int num_nodes, double load, InstanceSeeds seeds) {
  Instance inst;
  inst.seeds = seeds;
  inst.connectivity = generate_topology(num_nodes, seeds.topology);
  inst.conflicts = build_conflict_graph(inst.connectivity);
  inst.flows = sample_flows(inst.connectivity, load, derive_seed(seeds.realization, "flows"));
  inst.routing = shortest_path_routing(inst.connectivity, inst.flows);
  inst.rates = sample_link_rates(inst.connectivity, derive_seed(seeds.realization, "rates"));
  return inst;
}

namespace {

void check_connectivity(const ConnectivityGraph& g, std::vector<std::string>& out) {
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].id != static_cast<NodeId>(i)) {
      out.push_back("node ids are not dense at index " + std::to_string(i));
      return;
    }
  }
  const auto n = g.num_nodes();
  std::set<std::pair<NodeId, NodeId>> present;
  for (std::size_t k = 0; k < g.links.size(); ++k) {
    const auto& l = g.links[k];
    if (l.id != static_cast<LinkId>(k)) {
      out.push_back("link ids are not dense at index " + std::to_string(k));
      return;
    }
    if (l.src < 0 || l.dst < 0 || static_cast<std::size_t>(l.src) >= n ||
        static_cast<std::size_t>(l.dst) >= n || l.src == l.dst) {
      out.push_back("link " + std::to_string(l.id) + " has invalid endpoints");
      return;
    }
    if (!within_range(g.nodes[l.src], g.nodes[l.dst])) {
      out.push_back("link " + std::to_string(l.id) + " spans more than the radio range");
    }
    if (!present.emplace(l.src, l.dst).second) {
      out.push_back("duplicate link " + std::to_string(l.src) + "->" + std::to_string(l.dst));
    }
  }
  for (const auto& l : g.links) {
    if (!present.count({l.dst, l.src})) {
      out.push_back("link " + std::to_string(l.id) + " has no reverse link");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (within_range(g.nodes[i], g.nodes[j]) &&
          !present.count({static_cast<NodeId>(i), static_cast<NodeId>(j)})) {
        out.push_back("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                      " are in range but not linked");
      }
    }
  }
  if (!is_connected(g)) out.push_back("connectivity graph is not strongly connected");
}

void check_conflicts(const ConnectivityGraph& g, const ConflictGraph& c,
                     std::vector<std::string>& out) {
  if (c.link_count != g.num_links() || c.offsets.size() != c.link_count + 1 ||
      c.neighbors.size() != c.offsets.back() || c.neighbor_edges.size() != c.neighbors.size()) {
    out.push_back("conflict graph shape does not match the link set");
    return;
  }
  std::set<std::pair<LinkId, LinkId>> adjacency;
  bool self_loop = false;
  for (std::size_t e = 0; e < c.link_count; ++e) {
    for (auto i : c.neighbors_of(static_cast<LinkId>(e))) {
      if (i == static_cast<LinkId>(e)) self_loop = true;
      adjacency.emplace(static_cast<LinkId>(e), i);
    }
  }
  if (self_loop) out.push_back("conflict adjacency contains a self-loop");
  for (const auto& [e, i] : adjacency) {
    if (!adjacency.count({i, e})) {
      out.push_back("conflict adjacency is not symmetric: " + std::to_string(e) + " lists " +
                    std::to_string(i) + " but not vice versa");
      break;
    }
  }
  for (std::size_t id = 0; id < c.edges.size(); ++id) {
    const auto [a, b] = c.edges[id];
    if (!adjacency.count({a, b}) || !adjacency.count({b, a})) {
      out.push_back("conflict edge " + std::to_string(id) + " missing from adjacency");
      break;
    }
  }
  const auto expected = build_conflict_graph(g);
  std::set<std::pair<LinkId, LinkId>> want;
  for (const auto& edge : expected.edges) want.emplace(edge.a, edge.b);
  std::set<std::pair<LinkId, LinkId>> have;
  for (const auto& [e, i] : adjacency) {
    if (e < i) have.emplace(e, i);
  }
  if (want != have) out.push_back("conflict edges differ from the interface-conflict rule");
}

void check_flows(const Instance& inst, std::vector<std::string>& out) {
  const auto& g = inst.connectivity;
  const auto n = static_cast<NodeId>(g.num_nodes());
  if (!(inst.flows.load > 0.0)) out.push_back("load must be positive");
  for (std::size_t k = 0; k < inst.flows.flows.size(); ++k) {
    const auto& f = inst.flows.flows[k];
    const auto tag = "flow " + std::to_string(f.id);
    if (f.id != static_cast<FlowId>(k)) out.push_back(tag + " id is not dense");
    if (f.src < 0 || f.src >= n || f.dst < 0 || f.dst >= n || f.src == f.dst) {
      out.push_back(tag + " has invalid endpoints");
      continue;
    }
    if (f.base_rate < kMinBaseRate || f.base_rate > kMaxBaseRate) {
      out.push_back(tag + " base rate outside [0.5, 1.5]");
    }
    bool path_ok = !f.path.empty();
    std::set<NodeId> visited{f.src};
    NodeId at = f.src;
    for (auto e : f.path) {
      if (e < 0 || static_cast<std::size_t>(e) >= g.num_links() || g.links[e].src != at ||
          !visited.insert(g.links[e].dst).second) {
        path_ok = false;
        break;
      }
      at = g.links[e].dst;
    }
    if (!path_ok || at != f.dst) out.push_back(tag + " path is not a simple src->dst path");
  }
}

void check_routing(const Instance& inst, std::vector<std::string>& out) {
  const auto& lam = inst.routing;
  const auto& g = inst.connectivity;
  if (lam.num_links != g.num_links() || lam.num_flows != inst.flows.size() ||
      lam.entries.size() != lam.num_links * lam.num_flows) {
    out.push_back("routing matrix shape does not match links x flows");
    return;
  }
  for (std::size_t e = 0; e < lam.num_links; ++e) {
    for (std::size_t f = 0; f < lam.num_flows; ++f) {
      if (lam(e, f) < 0.0) {
        out.push_back("routing entry (" + std::to_string(e) + "," + std::to_string(f) +
                      ") is negative");
      }
    }
  }
  const auto delta = incidence_matrix(g);
  for (const auto& flow : inst.flows.flows) {
    const auto f = flow.id;
    if (f < 0 || static_cast<std::size_t>(f) >= lam.num_flows) continue;
    std::set<LinkId> on_path(flow.path.begin(), flow.path.end());
    for (std::size_t e = 0; e < lam.num_links; ++e) {
      if (lam(e, f) > 0.0 && !on_path.count(static_cast<LinkId>(e))) {
        out.push_back("flow " + std::to_string(f) + " has rate on off-path link " +
                      std::to_string(e));
      }
    }
    const double rate = inst.flows.arrival_rate(flow);
    bool conserved = true;
    for (std::size_t i = 0; i < delta.rows && conserved; ++i) {
      double net = 0.0;
      for (std::size_t e = 0; e < delta.cols; ++e) net += delta(i, e) * lam(e, f);
      double expected = 0.0;
      if (static_cast<NodeId>(i) == flow.src) expected = rate;
      if (static_cast<NodeId>(i) == flow.dst) expected = -rate;
      if (net != expected) conserved = false;
    }
    if (!conserved) out.push_back("flow " + std::to_string(f) + " violates flow conservation");
  }
}

}  // namespace

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  check_connectivity(inst.connectivity, out);
  check_conflicts(inst.connectivity, inst.conflicts, out);
  check_flows(inst, out);
  check_routing(inst, out);
  if (inst.rates.size() != inst.num_links()) {
    out.push_back("rate vector length does not match the link count");
  } else {
    for (std::size_t e = 0; e < inst.rates.size(); ++e) {
      if (!(inst.rates[e] >= kMinRate && inst.rates[e] <= kMaxRate)) {
        out.push_back("rate of link " + std::to_string(e) + " outside [10, 42]");
      }
    }
  }
  return out;
}

}  // namespace netgen
}  // namespace lubyndt
