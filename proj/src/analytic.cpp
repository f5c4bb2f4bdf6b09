#include "lubyndt/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lubyndt::analytic {

ContentionMatrix independent_contention(const ConflictGraph& g, std::vector<double> marginal) {
  ContentionMatrix b;
  b.joint.resize(g.num_edges());
  for (std::size_t id = 0; id < g.num_edges(); ++id) {
    b.joint[id] = marginal[g.edges[id].a] * marginal[g.edges[id].b];
  }
  b.marginal = std::move(marginal);
  return b;
}

void check_contention(const ConflictGraph& g, const ContentionMatrix& b) {
  if (b.marginal.size() != g.num_links()) {
    throw std::invalid_argument("contention matrix: marginal length " +
                                std::to_string(b.marginal.size()) + " != link count " +
                                std::to_string(g.num_links()));
  }
  if (b.joint.size() != g.num_edges()) {
    throw std::invalid_argument("contention matrix: joint length " + std::to_string(b.joint.size()) +
                                " != conflict edge count " + std::to_string(g.num_edges()));
  }
  for (std::size_t e = 0; e < b.marginal.size(); ++e) {
    const double v = b.marginal[e];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("contention matrix: marginal of link " + std::to_string(e) +
                                  " outside [0, 1]");
    }
  }
  for (std::size_t id = 0; id < b.joint.size(); ++id) {
    const auto [i, e] = g.edges[id];
    const double v = b.joint[id];
    if (!(v >= 0.0 && v <= std::min(b.marginal[i], b.marginal[e]))) {
      throw std::invalid_argument("contention matrix: joint of links (" + std::to_string(i) + ", " +
                                  std::to_string(e) + ") outside [0, min(marginals)]");
    }
  }
}

double conditional_cdf(double x, double z_i, double b_cond) {
  if (x < 0.0) return 0.0;
  if (x > z_i) return 1.0;
  return (1.0 - b_cond) + b_cond * (x / z_i);
}

namespace {

// Grid indices 0, 1, ..., L-1 as doubles.
std::vector<double> index_ramp(int grid_points) {
  std::vector<double> ramp(grid_points);
  for (int l = 0; l < grid_points; ++l) ramp[l] = l;
  return ramp;
}

// Number of grid points x_l = l * step with x_l <= z_i; the CDF of a
// neighbor with priority z_i is 1 beyond them.
inline int grid_cut(int grid_points, double step, double z_i) {
  if (!(step > 0.0)) return grid_points;
  const double estimate = std::floor(z_i / step) + 1.0;
  int cut = estimate < grid_points ? static_cast<int>(estimate) : grid_points;
  while (cut > 0 && (cut - 1) * step > z_i) --cut;
  while (cut < grid_points && cut * step <= z_i) ++cut;
  return cut;
}

// Multiplies the CDF (1 - b) + b x_l / z_i into the running product for the
// first `cut` grid points; `ratio` is step / z_i. A CDF of exactly 0 (b = 1 at
// x = 0) zeroes its summand, which is the exp(-inf) limit of the log-sum form.
inline void scale_prefix(double* acc, const double* ramp, int cut, double ratio, double b) {
  const double base = 1.0 - b;
  const double slope = b * ratio;
  for (int l = 0; l < cut; ++l) acc[l] *= base + slope * ramp[l];
}

inline void accumulate_neighbor(double* acc, const double* ramp, int grid_points, double step,
                                double z_i, double b) {
  scale_prefix(acc, ramp, grid_cut(grid_points, step, z_i), step / z_i, b);
}

inline double grid_mean(const double* acc, int grid_points) {
  double sum = 0.0;
  for (int l = 0; l < grid_points; ++l) sum += acc[l];
  return sum / grid_points;
}

}  // namespace

double win_probability(double z_e, std::span<const NeighborTerm> neighbors, int grid_points) {
  if (grid_points < 1) throw std::invalid_argument("win_probability: grid_points must be >= 1");
  std::vector<double> acc(grid_points, 1.0);
  const auto ramp = index_ramp(grid_points);
  const double step = z_e / grid_points;
  for (const auto& n : neighbors) {
    if (n.contention <= 0.0) continue;
    accumulate_neighbor(acc.data(), ramp.data(), grid_points, step, n.priority, n.contention);
  }
  return std::clamp(grid_mean(acc.data(), grid_points), 0.0, 1.0);
}

double survival_update(double b_e, double p_e, std::span<const SurvivalTerm> neighbors) {
  double s = b_e * (1.0 - p_e);
  for (const auto& n : neighbors) s *= 1.0 - n.contention * n.win;
  return s;
}

ModelOutput duty_cycles_from_conditionals(const ConflictGraph& g, const PriorityVector& z,
                                          std::span<const double> marginal,
                                          std::span<const double> conditional,
                                          const ModelOptions& options) {
  if (options.rounds < 1) throw std::invalid_argument("duty_cycles: rounds must be >= 1");
  if (options.grid_points < 1) throw std::invalid_argument("duty_cycles: grid_points must be >= 1");
  const auto n = g.num_links();
  if (z.size() != n || marginal.size() != n || conditional.size() != g.neighbors.size()) {
    throw std::invalid_argument("duty_cycles: input sizes do not match the conflict graph");
  }
  const int L = options.grid_points;
  const auto zs = z.values();

  std::vector<double> b(marginal.begin(), marginal.end());
  std::vector<double> cond(conditional.begin(), conditional.end());
  std::vector<double> win(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> acc(L);
  const auto ramp = index_ramp(L);

  ModelOutput out;
  out.duty_cycles.assign(n, 0.0);
  for (int m = 0; m < options.rounds; ++m) {
    for (std::size_t e = 0; e < n; ++e) {
      if (b[e] <= 0.0) {
        win[e] = 0.0;
        continue;
      }
      std::fill(acc.begin(), acc.end(), 1.0);
      const double step = zs[e] / L;
      for (auto k = g.offsets[e]; k < g.offsets[e + 1]; ++k) {
        if (cond[k] <= 0.0) continue;
        accumulate_neighbor(acc.data(), ramp.data(), L, step, zs[g.neighbors[k]], cond[k]);
      }
      win[e] = std::clamp(grid_mean(acc.data(), L), 0.0, 1.0);
      out.duty_cycles[e] += b[e] * win[e];
    }
    if (options.keep_trace) out.rounds.push_back({b, win});
    if (m + 1 == options.rounds) break;

    for (std::size_t e = 0; e < n; ++e) {
      if (b[e] <= 0.0) {
        next[e] = 0.0;
        continue;
      }
      double s = b[e] * (1.0 - win[e]);
      for (auto k = g.offsets[e]; k < g.offsets[e + 1]; ++k) s *= 1.0 - cond[k] * win[g.neighbors[k]];
      next[e] = s;
    }
    // Beyond round 1 neighbors are treated as independent: b_{i|e} = b_i.
    for (std::size_t k = 0; k < cond.size(); ++k) cond[k] = next[g.neighbors[k]];
    b.swap(next);
  }
  return out;
}

IndependentModel::IndependentModel(const ConflictGraph& g, const PriorityVector& z,
                                   std::vector<LinkId> support, const ModelOptions& options)
    : num_links_(g.num_links()), options_(options), support_(std::move(support)) {
  if (options.rounds < 1) throw std::invalid_argument("duty_cycles: rounds must be >= 1");
  if (options.grid_points < 1) throw std::invalid_argument("duty_cycles: grid_points must be >= 1");
  if (z.size() != num_links_) {
    throw std::invalid_argument("duty_cycles: priority length does not match the link count");
  }
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
  std::vector<int> local(num_links_, -1);
  for (std::size_t k = 0; k < support_.size(); ++k) {
    const auto e = support_[k];
    if (e < 0 || static_cast<std::size_t>(e) >= num_links_) {
      throw std::invalid_argument("duty_cycles: support link " + std::to_string(e) + " out of range");
    }
    local[e] = static_cast<int>(k);
  }

  const int L = options.grid_points;
  offsets_.assign(1, 0);
  for (auto e : support_) {
    const double step = z[e] / L;
    for (auto i : g.neighbors_of(e)) {
      if (local[i] < 0) continue;
      neighbors_.push_back(local[i]);
      cut_.push_back(grid_cut(L, step, z[i]));
      ratio_.push_back(step / z[i]);
    }
    offsets_.push_back(static_cast<int>(neighbors_.size()));
  }
  ramp_ = index_ramp(L);
  acc_.resize(L);
  b_.resize(support_.size());
  win_.resize(support_.size());
  next_.resize(support_.size());
}

void IndependentModel::run(std::span<const double> marginal, ModelOutput& out) {
  if (marginal.size() != num_links_) {
    throw std::invalid_argument("duty_cycles: marginal length does not match the link count");
  }
  const int L = options_.grid_points;
  const auto k_count = support_.size();
  for (std::size_t k = 0; k < k_count; ++k) b_[k] = marginal[support_[k]];

  out.duty_cycles.assign(num_links_, 0.0);
  out.rounds.clear();
  for (int m = 0; m < options_.rounds; ++m) {
    for (std::size_t k = 0; k < k_count; ++k) {
      if (b_[k] <= 0.0) {
        win_[k] = 0.0;
        continue;
      }
      std::fill(acc_.begin(), acc_.end(), 1.0);
      for (int s = offsets_[k]; s < offsets_[k + 1]; ++s) {
        const double bi = b_[neighbors_[s]];
        if (bi > 0.0) scale_prefix(acc_.data(), ramp_.data(), cut_[s], ratio_[s], bi);
      }
      win_[k] = std::clamp(grid_mean(acc_.data(), L), 0.0, 1.0);
      out.duty_cycles[support_[k]] += b_[k] * win_[k];
    }
    if (options_.keep_trace) {
      RoundTrace trace{std::vector<double>(num_links_, 0.0), std::vector<double>(num_links_, 0.0)};
      for (std::size_t k = 0; k < k_count; ++k) {
        trace.contention[support_[k]] = b_[k];
        trace.win[support_[k]] = win_[k];
      }
      out.rounds.push_back(std::move(trace));
    }
    if (m + 1 == options_.rounds) break;

    for (std::size_t k = 0; k < k_count; ++k) {
      double s = b_[k] * (1.0 - win_[k]);
      for (int t = offsets_[k]; t < offsets_[k + 1] && s > 0.0; ++t) {
        const auto i = neighbors_[t];
        s *= 1.0 - b_[i] * win_[i];
      }
      next_[k] = s;
    }
    std::swap(b_, next_);
  }
}

ModelOutput duty_cycles_independent(const ConflictGraph& g, const PriorityVector& z,
                                    std::span<const double> marginal, const ModelOptions& options) {
  if (marginal.size() != g.num_links()) {
    throw std::invalid_argument("duty_cycles: input sizes do not match the conflict graph");
  }
  std::vector<LinkId> support;
  for (std::size_t e = 0; e < marginal.size(); ++e) {
    if (marginal[e] > 0.0) support.push_back(static_cast<LinkId>(e));
  }
  IndependentModel model(g, z, std::move(support), options);
  ModelOutput out;
  model.run(marginal, out);
  return out;
}

ModelOutput duty_cycles(const ConflictGraph& g, const PriorityVector& z, const ContentionMatrix& b,
                        const ModelOptions& options) {
  check_contention(g, b);
  if (z.size() != g.num_links()) {
    throw std::invalid_argument("duty_cycles: priority length does not match the link count");
  }
  std::vector<double> cond(g.neighbors.size(), 0.0);
  for (std::size_t e = 0; e < g.num_links(); ++e) {
    const double be = b.marginal[e];
    if (be <= 0.0) continue;
    for (auto k = g.offsets[e]; k < g.offsets[e + 1]; ++k) {
      cond[k] = std::min(1.0, b.joint[g.neighbor_edges[k]] / be);
    }
  }
  return duty_cycles_from_conditionals(g, z, b.marginal, cond, options);
}

}  // namespace lubyndt::analytic
