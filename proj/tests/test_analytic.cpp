#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "lubyndt/analytic.hpp"
#include "support.hpp"

using namespace lubyndt;
using analytic::ModelOptions;
using analytic::NeighborTerm;
using analytic::SurvivalTerm;

namespace {

// Exact one-round win probabilities for equal priorities with every link
// contending: enumerate all draw orderings.
std::vector<double> ordering_oracle(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> wins(n, 0.0);
  double total = 0.0;
  do {
    // order[k] is the rank of link k's draw.
    for (int e = 0; e < n; ++e) {
      bool best = true;
      for (auto [a, b] : edges) {
        if (a == e && order[b] > order[e]) best = false;
        if (b == e && order[a] > order[e]) best = false;
      }
      wins[e] += best;
    }
    total += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& w : wins) w /= total;
  return wins;
}

std::vector<std::pair<LinkId, LinkId>> as_links(const std::vector<std::pair<int, int>>& e) {
  return {e.begin(), e.end()};
}

double left_riemann(int L, double z_e, const std::function<double(double)>& integrand) {
  double s = 0.0;
  for (int l = 0; l < L; ++l) s += integrand(l * z_e / L);
  return s / L;
}

// Random graph on n links with edge probability p.
std::vector<std::pair<int, int>> random_edges(int n, double p, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> edges;
  std::bernoulli_distribution coin(p);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(rng)) edges.emplace_back(a, b);
  return edges;
}

}  // namespace

TEST_CASE("conditional CDF") {
  CHECK(analytic::conditional_cdf(0.0, 1.0, 1.0) == 0.0);
  CHECK(analytic::conditional_cdf(0.5, 1.0, 0.5) == 0.75);
  CHECK(analytic::conditional_cdf(2.0, 1.0, 0.3) == 1.0);
  CHECK(analytic::conditional_cdf(-0.1, 1.0, 0.3) == 0.0);
  CHECK(analytic::conditional_cdf(0.0, 1.0, 0.0) == 1.0);
}

TEST_CASE("win probability") {
  SUBCASE("no neighbors") { CHECK(analytic::win_probability(1.0, {}, 64) == 1.0); }
  SUBCASE("one always-contending equal neighbor gives 63/128 at L = 64") {
    NeighborTerm n{1.0, 1.0};
    CHECK(analytic::win_probability(1.0, {&n, 1}, 64) == doctest::Approx(63.0 / 128).epsilon(1e-14));
  }
  SUBCASE("weaker neighbor converges to 1 - z_i / (2 z_e)") {
    NeighborTerm n{1.0, 1.0};
    double previous = 1.0;
    for (int L : {16, 64, 256, 1024, 4096}) {
      const double p = analytic::win_probability(2.0, {&n, 1}, L);
      const double oracle = left_riemann(L, 2.0, [](double x) { return std::min(x, 1.0); });
      CHECK(p == doctest::Approx(oracle).epsilon(1e-13));
      const double err = std::abs(p - 0.75);
      CHECK(err <= 1.0 / L);
      CHECK(err < previous);
      previous = err;
    }
  }
  SUBCASE("non-contending neighbors never block") {
    std::vector<NeighborTerm> n{{1.0, 0.0}, {3.0, 0.0}};
    CHECK(analytic::win_probability(1.0, n, 64) == 1.0);
  }
  SUBCASE("partially contending neighbor") {
    NeighborTerm n{1.0, 0.4};
    const double oracle = left_riemann(64, 1.0, [](double x) { return 0.6 + 0.4 * x; });
    CHECK(analytic::win_probability(1.0, {&n, 1}, 64) == doctest::Approx(oracle).epsilon(1e-14));
  }
  CHECK_THROWS_AS(analytic::win_probability(1.0, {}, 0), std::invalid_argument);
}

TEST_CASE("survival update") {
  SurvivalTerm t{0.7, 0.2};
  CHECK(analytic::survival_update(0.9, 1.0, {&t, 1}) == 0.0);
  CHECK(analytic::survival_update(0.6, 0.0, {}) == 0.6);
  std::vector<SurvivalTerm> tri{{1.0, 1.0 / 3}, {1.0, 1.0 / 3}};
  CHECK(analytic::survival_update(1.0, 1.0 / 3, tri) == doctest::Approx(8.0 / 27));
}

TEST_CASE("single isolated contending link transmits every slot") {
  auto g = ConflictGraph::from_edges(1, {});
  auto out = analytic::duty_cycles(g, PriorityVector::uniform(1), {{1.0}, {}}, {});
  CHECK(out.duty_cycles[0] == 1.0);
}

TEST_CASE("triangle splits evenly") {
  auto g = testing::clique(3);
  auto b = analytic::independent_contention(g, {1, 1, 1});
  for (int L : {64, 4096}) {
    auto out = analytic::duty_cycles(g, PriorityVector::uniform(3), b, {1, L, true});
    const double oracle = left_riemann(L, 1.0, [](double x) { return x * x; });
    for (double x : out.duty_cycles) CHECK(x == doctest::Approx(oracle).epsilon(1e-13));
  }
  auto fine = analytic::duty_cycles(g, PriorityVector::uniform(3), b, {1, 4096, false});
  for (double x : fine.duty_cycles) CHECK(std::abs(x - 1.0 / 3) < 5e-4);
}

TEST_CASE("non-contending neighbor neither blocks nor wins") {
  auto g = testing::clique(2);
  ContentionMatrix b{{1.0, 0.0}, {0.0}};
  auto out = analytic::duty_cycles(g, PriorityVector::uniform(2), b, {});
  CHECK(out.duty_cycles[0] == 1.0);
  CHECK(out.duty_cycles[1] == 0.0);
}

TEST_CASE("round one is exact on trees and cycles alike") {
  const int L = 8192;
  struct Case {
    int links;
    std::vector<std::pair<int, int>> edges;
  };
  std::vector<Case> graphs{
      {4, {{0, 1}, {1, 2}, {2, 3}}},                  // chain of four
      {5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}},          // star
      {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}},          // 4-cycle
      {5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}}},  // triangle with a tail
  };
  for (const auto& [links, edges] : graphs) {
    auto g = ConflictGraph::from_edges(links, as_links(edges));
    auto b = analytic::independent_contention(g, std::vector<double>(links, 1.0));
    auto out = analytic::duty_cycles(g, PriorityVector::uniform(links), b, {1, L, false});
    auto exact = ordering_oracle(links, edges);
    for (int e = 0; e < links; ++e) CHECK(std::abs(out.duty_cycles[e] - exact[e]) < 0.001);
  }
}

TEST_CASE("chain of four matches a Monte-Carlo run of the contest") {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}};
  auto g = ConflictGraph::from_edges(4, as_links(edges));
  std::vector<double> z{1.0, 2.5, 0.5, 1.5};
  std::vector<double> marginal{0.9, 0.6, 1.0, 0.4};
  auto b = analytic::independent_contention(g, marginal);
  auto out = analytic::duty_cycles(g, PriorityVector(z), b, {1, 8192, false});

  testing::OneRoundOracle oracle(4, edges, z);
  std::mt19937_64 rng(17);
  const int trials = 1000000;
  std::vector<double> freq(4, 0.0);
  std::vector<int> mask(4);
  for (int t = 0; t < trials; ++t) {
    for (int e = 0; e < 4; ++e) mask[e] = std::bernoulli_distribution(marginal[e])(rng);
    auto w = oracle.winners(mask, rng);
    for (int e = 0; e < 4; ++e) freq[e] += w[e];
  }
  for (int e = 0; e < 4; ++e) {
    const double p = freq[e] / trials;
    const double se = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(out.duty_cycles[e] - p) <= std::max(0.005, 3 * se));
  }
}

TEST_CASE("joint probabilities shape the round-one conditionals") {
  auto g = testing::clique(2);
  auto z = PriorityVector::uniform(2);
  SUBCASE("always together") {
    auto out = analytic::duty_cycles(g, z, {{0.5, 0.5}, {0.5}}, {1, 64, false});
    CHECK(out.duty_cycles[0] == doctest::Approx(0.5 * 63.0 / 128));
  }
  SUBCASE("never together") {
    auto out = analytic::duty_cycles(g, z, {{0.5, 0.5}, {0.0}}, {1, 64, false});
    CHECK(out.duty_cycles[0] == doctest::Approx(0.5));
  }
  SUBCASE("independent") {
    auto out = analytic::duty_cycles(g, z, {{0.5, 0.5}, {0.25}}, {1, 64, false});
    const double oracle = left_riemann(64, 1.0, [](double x) { return 0.5 + 0.5 * x; });
    CHECK(out.duty_cycles[0] == doctest::Approx(0.5 * oracle));
  }
}

TEST_CASE("contention matrix validation") {
  auto g = testing::clique(2);
  auto z = PriorityVector::uniform(2);
  CHECK_THROWS_WITH_AS(analytic::duty_cycles(g, z, {{0.3, 0.5}, {0.4}}, {}),
                       doctest::Contains("joint"), std::invalid_argument);
  CHECK_THROWS_AS(analytic::duty_cycles(g, z, {{1.2, 0.5}, {0.4}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(analytic::duty_cycles(g, z, {{0.5}, {0.2}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(analytic::duty_cycles(g, z, {{0.5, 0.5}, {}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(analytic::duty_cycles(g, z, {{0.5, 0.5}, {0.2}}, {0, 64, false}),
                  std::invalid_argument);
}

TEST_CASE("multi-round traces") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 8;
    auto edges = random_edges(n, 0.4, rng);
    auto g = ConflictGraph::from_edges(n, as_links(edges));
    std::vector<double> z(n), m(n);
    for (int e = 0; e < n; ++e) {
      z[e] = 0.2 + 3 * u(rng);
      m[e] = u(rng) < 0.2 ? 0.0 : u(rng);
    }
    auto out = analytic::duty_cycles(g, PriorityVector(z),
                                     analytic::independent_contention(g, m), {4, 64, true});
    REQUIRE(out.rounds.size() == 4);
    for (int e = 0; e < n; ++e) {
      double sum = 0.0;
      for (std::size_t r = 0; r < out.rounds.size(); ++r) {
        const auto& tr = out.rounds[r];
        CHECK(tr.win[e] >= 0.0);
        CHECK(tr.win[e] <= 1.0);
        if (r > 0) CHECK(tr.contention[e] <= out.rounds[r - 1].contention[e]);
        sum += tr.contention[e] * tr.win[e];
      }
      CHECK(out.duty_cycles[e] == doctest::Approx(sum));
      CHECK(out.duty_cycles[e] >= 0.0);
    }
  }
}

TEST_CASE("second round follows the survival recursion") {
  // Triangle with all links contending: round 2 contention is 8/27 (L large).
  auto g = testing::clique(3);
  auto out = analytic::duty_cycles(g, PriorityVector::uniform(3),
                                   analytic::independent_contention(g, {1, 1, 1}), {2, 8192, true});
  for (int e = 0; e < 3; ++e) CHECK(std::abs(out.rounds[1].contention[e] - 8.0 / 27) < 1e-3);
}

TEST_CASE("independent kernel agrees with the general model") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 12;
    auto g = ConflictGraph::from_edges(n, as_links(random_edges(n, 0.35, rng)));
    std::vector<double> z(n), m(n);
    for (int e = 0; e < n; ++e) {
      z[e] = 0.1 + 2 * u(rng);
      m[e] = u(rng) < 0.3 ? 0.0 : (u(rng) < 0.2 ? 1.0 : u(rng));
    }
    for (int rounds : {1, 2, 3}) {
      ModelOptions opt{rounds, 64, true};
      auto a = analytic::duty_cycles(g, PriorityVector(z), analytic::independent_contention(g, m), opt);
      auto b = analytic::duty_cycles_independent(g, PriorityVector(z), m, opt);
      for (int e = 0; e < n; ++e) CHECK(b.duty_cycles[e] == doctest::Approx(a.duty_cycles[e]).epsilon(1e-12));
      REQUIRE(b.rounds.size() == a.rounds.size());
      for (std::size_t r = 0; r < a.rounds.size(); ++r)
        for (int e = 0; e < n; ++e)
          CHECK(b.rounds[r].win[e] == doctest::Approx(a.rounds[r].win[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("reusable model matches the one-shot call") {
  auto g = testing::chain(5);
  auto z = PriorityVector({1, 2, 1, 3, 1});
  analytic::IndependentModel model(g, z, {1, 2, 3, 2}, {3, 64, false});
  CHECK(model.support() == std::vector<LinkId>{1, 2, 3});
  analytic::ModelOutput out;
  for (double level : {0.2, 0.7, 1.0}) {
    std::vector<double> m{0, level, level / 2, level, 0};
    model.run(m, out);
    auto ref = analytic::duty_cycles_independent(g, z, m, {3, 64, false});
    for (int e = 0; e < 5; ++e) CHECK(out.duty_cycles[e] == doctest::Approx(ref.duty_cycles[e]));
  }
  CHECK_THROWS_AS(analytic::IndependentModel(g, z, {7}, {}), std::invalid_argument);
}

TEST_CASE("higher priority never lowers a link's own duty cycle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 9;
    auto g = ConflictGraph::from_edges(n, as_links(random_edges(n, 0.5, rng)));
    std::vector<double> z(n), m(n);
    for (int e = 0; e < n; ++e) {
      z[e] = 0.1 + 2 * u(rng);
      m[e] = u(rng);
    }
    auto b = analytic::independent_contention(g, m);
    const int e = trial % n;
    double previous = -1.0;
    for (double factor : {0.5, 1.0, 1.3, 2.0, 5.0}) {
      auto zz = z;
      zz[e] *= factor;
      const double x = analytic::duty_cycles(g, PriorityVector(zz), b, {1, 64, false}).duty_cycles[e];
      CHECK(x >= previous - 1e-12);
      previous = x;
    }
  }
}

TEST_CASE("uniform priority scaling leaves the model unchanged") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 10;
    auto g = ConflictGraph::from_edges(n, as_links(random_edges(n, 0.5, rng)));
    std::vector<double> z(n), m(n);
    for (int e = 0; e < n; ++e) {
      z[e] = 0.1 + 2 * u(rng);
      m[e] = u(rng);
    }
    auto b = analytic::independent_contention(g, m);
    auto ref = analytic::duty_cycles(g, PriorityVector(z), b, {3, 64, true});
    for (double c : {1e-3, 0.37, 7.3, 1e4}) {
      auto zz = z;
      for (auto& v : zz) v *= c;
      auto out = analytic::duty_cycles(g, PriorityVector(zz), b, {3, 64, true});
      for (int e = 0; e < n; ++e) {
        CHECK(std::abs(out.duty_cycles[e] - ref.duty_cycles[e]) <= 1e-10);
        for (int r = 0; r < 3; ++r)
          CHECK(std::abs(out.rounds[r].win[e] - ref.rounds[r].win[e]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("discretization error shrinks like 1/L") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    auto g = ConflictGraph::from_edges(n, as_links(random_edges(n, 0.6, rng)));
    std::vector<double> z(n), m(n);
    for (int e = 0; e < n; ++e) {
      z[e] = 0.3 + u(rng);
      m[e] = u(rng);
    }
    auto b = analytic::independent_contention(g, m);
    auto at = [&](int L) { return analytic::duty_cycles(g, PriorityVector(z), b, {1, L, false}); };
    auto x64 = at(64), x128 = at(128), x256 = at(256);
    for (int e = 0; e < n; ++e) {
      CHECK(std::abs(x64.duty_cycles[e] - x128.duty_cycles[e]) < 0.01);
      CHECK(std::abs(x64.duty_cycles[e] - x256.duty_cycles[e]) <= 1.0 / 64);
    }
  }
}
