#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lubyndt/netgen.hpp"
#include "lubyndt/priority.hpp"

namespace lubyndt {

// Contention probabilities fed to the duty-cycle model: per-link marginals
// and per-conflict-edge joints (indexed by EdgeId).
struct ContentionMatrix {
  std::vector<double> marginal;
  std::vector<double> joint;
};

namespace analytic {

// Joint = product of marginals on every conflict edge.
ContentionMatrix independent_contention(const ConflictGraph& g, std::vector<double> marginal);

// Throws std::invalid_argument naming the first offending entry.
void check_contention(const ConflictGraph& g, const ContentionMatrix& b);

// CDF of a neighbor's masked draw (0 when not contending, U(0, z_i) otherwise)
// given that it contends with probability b_cond.
double conditional_cdf(double x, double z_i, double b_cond);

struct NeighborTerm {
  double priority = 1.0;     // z_i
  double contention = 0.0;   // b_{i|e}
};

// Probability that a contending link with priority z_e beats every neighbor,
// by the left-endpoint rule on grid_points samples of [0, z_e).
double win_probability(double z_e, std::span<const NeighborTerm> neighbors, int grid_points);

struct SurvivalTerm {
  double contention = 0.0;   // b_{i|e}
  double win = 0.0;          // P_{i,win}
};

// Probability of still contending next round: b_e (1 - P_e) prod (1 - b_i P_i).
double survival_update(double b_e, double p_e, std::span<const SurvivalTerm> neighbors);

struct RoundTrace {
  std::vector<double> contention;  // b^(m)
  std::vector<double> win;         // P_win^(m); 0 for links with b^(m) = 0
};

struct ModelOutput {
  std::vector<double> duty_cycles;
  std::vector<RoundTrace> rounds;  // empty unless traces were requested
};

struct ModelOptions {
  int rounds = 1;
  int grid_points = 64;
  bool keep_trace = true;
};

// Closed-form duty cycles of weighted Luby contention. Round-1 conditionals
// are joint/marginal; later rounds assume neighbor independence.
ModelOutput duty_cycles(const ConflictGraph& g, const PriorityVector& z, const ContentionMatrix& b,
                        const ModelOptions& options);

// Same model with the round-1 conditionals b_{i|e} given per adjacency slot of
// `g` (aligned with g.neighbors). Skips validation; used by the fixed-point loop.
ModelOutput duty_cycles_from_conditionals(const ConflictGraph& g, const PriorityVector& z,
                                          std::span<const double> marginal,
                                          std::span<const double> conditional,
                                          const ModelOptions& options);

// Same model when every joint equals the product of marginals, so that
// b_{i|e} = b_i in all rounds. Visits only links with b > 0.
ModelOutput duty_cycles_independent(const ConflictGraph& g, const PriorityVector& z,
                                    std::span<const double> marginal, const ModelOptions& options);

// Reusable form of duty_cycles_independent for repeated evaluation with the
// same graph and priorities. Only links in `support` may contend: the
// subgraph they induce and the per-pair grid cutoffs are built once.
// Marginals outside the support are ignored.
class IndependentModel {
 public:
  IndependentModel(const ConflictGraph& g, const PriorityVector& z, std::vector<LinkId> support,
                   const ModelOptions& options);

  void run(std::span<const double> marginal, ModelOutput& out);

  const std::vector<LinkId>& support() const { return support_; }

 private:
  std::size_t num_links_;
  ModelOptions options_;
  std::vector<LinkId> support_;
  std::vector<int> offsets_;
  std::vector<int> neighbors_;  // local indices into support_
  std::vector<int> cut_;
  std::vector<double> ratio_;
  std::vector<double> ramp_;
  std::vector<double> acc_;
  std::vector<double> b_;
  std::vector<double> win_;
  std::vector<double> next_;
};

}  // namespace analytic
}  // namespace lubyndt
