#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "lubyndt/instance_io.hpp"
#include "lubyndt/netgen.hpp"
#include "support.hpp"

using namespace lubyndt;

namespace {

bool has_conflict(const ConflictGraph& g, LinkId a, LinkId b) {
  auto n = g.neighbors_of(a);
  return std::find(n.begin(), n.end(), b) != n.end();
}

LinkId link_id(const ConnectivityGraph& g, NodeId src, NodeId dst) {
  for (const auto& l : g.links)
    if (l.src == src && l.dst == dst) return l.id;
  return -1;
}

std::vector<NodeId> node_sequence(const ConnectivityGraph& g, const std::vector<LinkId>& path) {
  std::vector<NodeId> seq;
  if (path.empty()) return seq;
  seq.push_back(g.links[path.front()].src);
  for (auto e : path) seq.push_back(g.links[e].dst);
  return seq;
}

}  // namespace

TEST_CASE("square side follows density 8/pi") {
  CHECK(netgen::square_side(20) == doctest::Approx(std::sqrt(20 * std::numbers::pi / 8)));
  CHECK(netgen::square_side(20) == doctest::Approx(2.802).epsilon(1e-3));
}

TEST_CASE("two nodes give one link in each direction") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = netgen::generate_topology(2, seed);
    REQUIRE(g.num_links() == 2);
    CHECK(g.links[0].src == g.links[1].dst);
    CHECK(g.links[0].dst == g.links[1].src);
  }
}

TEST_CASE("topology generation is deterministic and connected") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto a = netgen::generate_topology(50, seed);
    auto b = netgen::generate_topology(50, seed);
    CHECK(netgen::is_connected(a));
    REQUIRE(a.num_links() == b.num_links());
    for (std::size_t i = 0; i < a.num_nodes(); ++i) {
      CHECK(a.nodes[i].x == b.nodes[i].x);
      CHECK(a.nodes[i].y == b.nodes[i].y);
    }
  }
  auto c = netgen::generate_topology(50, 1);
  auto d = netgen::generate_topology(50, 2);
  CHECK(c.nodes[0].x != d.nodes[0].x);
}

TEST_CASE("interior mean degree matches the disk density") {
  // Each of the n-1 other nodes lands in the unit disk with probability 8/n,
  // so the interior degree is about 8 (n-1)/n = 7.6 for n = 20.
  const int n = 20;
  const double side = netgen::square_side(n);
  double total = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto g = netgen::generate_topology(n, seed);
    std::vector<int> degree(n, 0);
    for (const auto& l : g.links) ++degree[l.src];
    for (const auto& v : g.nodes) {
      if (v.x < 1 || v.y < 1 || v.x > side - 1 || v.y > side - 1) continue;
      total += degree[v.id];
      ++count;
    }
  }
  REQUIRE(count > 100);
  const double mean = total / count;
  CHECK(mean >= 8.0 * 0.9);
  CHECK(mean <= 8.0 * 1.1);
}

TEST_CASE("links join exactly the pairs within range") {
  auto g = netgen::generate_topology(30, 7);
  std::set<std::pair<NodeId, NodeId>> links;
  for (const auto& l : g.links) links.insert({l.src, l.dst});
  for (const auto& a : g.nodes) {
    for (const auto& b : g.nodes) {
      if (a.id == b.id) continue;
      const bool near = std::hypot(a.x - b.x, a.y - b.y) <= 1.0;
      CHECK(near == links.count({a.id, b.id}) > 0);
    }
  }
}

TEST_CASE("conflict graph of a single node pair") {
  auto g = netgen::unit_disk_graph({{0, 0, 0}, {1, 0.5, 0}});
  auto h = netgen::build_conflict_graph(g);
  REQUIRE(h.num_edges() == 1);
  CHECK(has_conflict(h, 0, 1));
  CHECK(has_conflict(h, 1, 0));
}

TEST_CASE("conflict graph of a three-node path is complete on four links") {
  auto g = netgen::unit_disk_graph({{0, 0, 0}, {1, 0.9, 0}, {2, 1.8, 0}});
  REQUIRE(g.num_links() == 4);
  auto h = netgen::build_conflict_graph(g);
  CHECK(h.num_edges() == 6);
  for (LinkId a = 0; a < 4; ++a)
    for (LinkId b = 0; b < 4; ++b)
      if (a != b) CHECK(has_conflict(h, a, b));
}

TEST_CASE("distant node pairs do not conflict") {
  auto g = netgen::unit_disk_graph({{0, 0, 0}, {1, 0.5, 0}, {2, 5, 5}, {3, 5.5, 5}});
  REQUIRE(g.num_links() == 4);
  auto h = netgen::build_conflict_graph(g);
  CHECK(h.num_edges() == 2);
  const auto a = link_id(g, 0, 1);
  const auto c = link_id(g, 2, 3);
  const auto d = link_id(g, 3, 2);
  CHECK_FALSE(has_conflict(h, a, c));
  CHECK_FALSE(has_conflict(h, a, d));
}

TEST_CASE("conflict graph from edge pairs") {
  auto h = ConflictGraph::from_edges(3, {{2, 0}, {0, 2}, {1, 2}});
  CHECK(h.num_edges() == 2);
  CHECK(h.degree(2) == 2);
  for (const auto& edge : h.edges) CHECK(edge.a < edge.b);
  CHECK_THROWS_AS(ConflictGraph::from_edges(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(ConflictGraph::from_edges(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("incidence matrix") {
  SUBCASE("single link") {
    ConnectivityGraph g;
    g.nodes = {{0, 0, 0}, {1, 0.5, 0}};
    g.links = {{0, 0, 1}};
    auto d = netgen::incidence_matrix(g);
    REQUIRE(d.rows == 2);
    REQUIRE(d.cols == 1);
    CHECK(d(0, 0) == 1);
    CHECK(d(1, 0) == -1);
  }
  SUBCASE("no links") {
    ConnectivityGraph g;
    g.nodes = {{0, 0, 0}, {1, 5, 0}};
    auto d = netgen::incidence_matrix(g);
    CHECK(d.cols == 0);
    CHECK(d.entries.empty());
  }
  SUBCASE("generated graph has one +1 and one -1 per column") {
    auto g = netgen::generate_topology(40, 3);
    auto d = netgen::incidence_matrix(g);
    for (std::size_t e = 0; e < d.cols; ++e) {
      int plus = 0, minus = 0, sum = 0;
      for (std::size_t v = 0; v < d.rows; ++v) {
        plus += d(v, e) == 1;
        minus += d(v, e) == -1;
        sum += d(v, e);
      }
      CHECK(plus == 1);
      CHECK(minus == 1);
      CHECK(sum == 0);
    }
  }
}

TEST_CASE("flow count range") {
  CHECK(netgen::flow_count_range(20) == std::pair{3, 5});
  CHECK(netgen::flow_count_range(50) == std::pair{7, 13});
  CHECK(netgen::flow_count_range(100) == std::pair{15, 25});
}

TEST_CASE("sampled flows") {
  auto g = netgen::generate_topology(20, 4);
  std::set<std::size_t> counts;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto flows = netgen::sample_flows(g, 2.0, seed);
    counts.insert(flows.size());
    for (const auto& f : flows.flows) {
      CHECK(f.src != f.dst);
      CHECK(f.base_rate >= 0.5);
      CHECK(f.base_rate <= 1.5);
      CHECK(flows.arrival_rate(f) == 2.0 * f.base_rate);
    }
  }
  CHECK(counts == std::set<std::size_t>{3, 4, 5});
  CHECK_THROWS_AS(netgen::sample_flows(g, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(netgen::sample_flows(g, -1.0, 1), std::invalid_argument);
}

TEST_CASE("adjacent flow takes one hop") {
  auto inst = testing::single_pair(1.0, 2.0, 20.0);
  REQUIRE(inst.flows.flows[0].path.size() == 1);
  int nonzero = 0;
  for (std::size_t e = 0; e < inst.num_links(); ++e) nonzero += inst.routing(e, 0) != 0.0;
  CHECK(nonzero == 1);
  CHECK(inst.routing(inst.flows.flows[0].path[0], 0) == 2.0);
}

TEST_CASE("diamond tie-break picks the smallest node sequence") {
  // 0 reaches 3 through either 1 or 2 in two hops; 0-3 and 1-2 are out of range.
  std::vector<Node> nodes{{0, 0, 0}, {1, 0.6, 0.6}, {2, 0.6, -0.6}, {3, 1.2, 0}};
  auto g = netgen::unit_disk_graph(nodes);
  CHECK(link_id(g, 0, 3) == -1);
  CHECK(link_id(g, 1, 2) == -1);
  CHECK(node_sequence(g, netgen::shortest_path(g, 0, 3)) == std::vector<NodeId>{0, 1, 3});
  CHECK(node_sequence(g, netgen::shortest_path(g, 3, 0)) == std::vector<NodeId>{3, 1, 0});
  CHECK(node_sequence(g, netgen::shortest_path(g, 1, 2)) == std::vector<NodeId>{1, 0, 2});

  // Swapping the geometry of 1 and 2 must not change the chosen sequence.
  std::swap(nodes[1].y, nodes[2].y);
  auto h = netgen::unit_disk_graph(nodes);
  CHECK(node_sequence(h, netgen::shortest_path(h, 0, 3)) == std::vector<NodeId>{0, 1, 3});
  CHECK(netgen::shortest_path(g, 2, 2).empty());
}

TEST_CASE("tie-break is lexicographic over the whole sequence") {
  // Two 3-hop routes 0-1-3-5 and 0-2-4-5 plus 0-1-4-5; smallest is 0-1-3-5.
  std::vector<Node> nodes{{0, 0, 0},     {1, 0.7, 0.5},  {2, 0.7, -0.5},
                          {3, 1.4, 0.9}, {4, 1.4, -0.2}, {5, 2.1, 0.4}};
  auto g = netgen::unit_disk_graph(nodes);
  auto path = netgen::shortest_path(g, 0, 5);
  auto seq = node_sequence(g, path);
  REQUIRE(seq.size() >= 2);
  CHECK(seq.front() == 0);
  CHECK(seq.back() == 5);
  // Brute force over all simple paths of minimal length.
  std::vector<std::vector<NodeId>> best;
  std::vector<NodeId> cur{0};
  std::function<void()> dfs = [&] {
    if (cur.back() == 5) {
      if (best.empty() || cur.size() < best[0].size()) best = {cur};
      else if (cur.size() == best[0].size()) best.push_back(cur);
      return;
    }
    for (const auto& l : g.links) {
      if (l.src != cur.back()) continue;
      if (std::find(cur.begin(), cur.end(), l.dst) != cur.end()) continue;
      cur.push_back(l.dst);
      dfs();
      cur.pop_back();
    }
  };
  dfs();
  CHECK(seq == *std::min_element(best.begin(), best.end()));
}

TEST_CASE("link rates") {
  ConnectivityGraph g;
  g.links.resize(10000);
  auto r = netgen::sample_link_rates(g, 11);
  double sum = 0.0;
  for (double v : r) {
    CHECK(v >= 10.0);
    CHECK(v <= 42.0);
    sum += v;
  }
  CHECK(std::abs(sum / r.size() - 26.0) <= 0.5);
  CHECK(netgen::sample_link_rates(g, 11) == r);
  CHECK(netgen::sample_link_rates(g, 12) != r);
}

TEST_CASE("fresh instances validate cleanly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = netgen::make_instance(20 + static_cast<int>(seed), 3.0, {seed, seed + 100});
    auto problems = netgen::validate_instance(inst);
    CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
  }
}

TEST_CASE("validation reports injected faults") {
  auto inst = netgen::make_instance(30, 2.0, {5, 6});
  SUBCASE("negated routing entry") {
    const auto& f = inst.flows.flows[0];
    inst.routing(f.path[0], f.id) = -inst.routing(f.path[0], f.id);
    auto problems = netgen::validate_instance(inst);
    int conservation = 0;
    for (const auto& p : problems) conservation += p.find("flow conservation") != std::string::npos;
    CHECK(conservation == 1);
  }
  SUBCASE("asymmetric conflict adjacency") {
    auto& h = inst.conflicts;
    // Point one slot of link 0 at a link that does not list 0 back.
    const auto n0 = h.neighbors_of(0);
    LinkId stranger = -1;
    for (LinkId e = 1; e < static_cast<LinkId>(h.num_links()); ++e) {
      if (std::find(n0.begin(), n0.end(), e) == n0.end()) {
        stranger = e;
        break;
      }
    }
    REQUIRE(stranger >= 0);
    h.neighbors[h.offsets[0]] = stranger;
    auto problems = netgen::validate_instance(inst);
    bool symmetry = false;
    for (const auto& p : problems) symmetry |= p.find("not symmetric") != std::string::npos;
    CHECK(symmetry);
  }
  SUBCASE("rate out of range") {
    inst.rates[0] = 50.0;
    auto problems = netgen::validate_instance(inst);
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("rate") != std::string::npos);
  }
}

TEST_CASE("instance JSON round trip") {
  auto inst = netgen::make_instance(25, 4.0, {9, 10});
  auto j = io::instance_to_json(inst);
  CHECK(j.at("schema_version") == 1);
  for (const char* key : {"nodes", "links", "conflicts", "flows", "lambda", "rates", "beta", "seeds"})
    CHECK(j.contains(key));
  auto back = io::instance_from_json(j);
  CHECK(io::instance_to_json(back).dump() == j.dump());
  CHECK(netgen::validate_instance(back).empty());
  CHECK(io::instance_to_json(netgen::make_instance(25, 4.0, {9, 10})).dump() == j.dump());

  auto broken = j;
  broken.erase("rates");
  CHECK_THROWS_WITH_AS(io::instance_from_json(broken), doctest::Contains("rates"),
                       std::invalid_argument);
}
