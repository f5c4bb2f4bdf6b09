#include "lubyndt/ndt.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lubyndt::ndt {

void NdtConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("ndt.iterations must be >= 1");
  if (!(ema > 0.0 && ema <= 1.0)) throw std::invalid_argument("ndt.ema must lie in (0, 1]");
  if (rounds < 1) throw std::invalid_argument("ndt.rounds must be >= 1");
  if (grid_points < 1) throw std::invalid_argument("ndt.grid_points must be >= 1");
  if (!(floor >= 0.0 && floor < 1.0)) throw std::invalid_argument("ndt.floor must lie in [0, 1)");
}

std::vector<double> initial_duty_cycles(const ConflictGraph& g, const PriorityVector& z) {
  std::vector<double> x(g.num_links());
  for (std::size_t e = 0; e < x.size(); ++e) {
    double total = z[e];
    for (auto i : g.neighbors_of(static_cast<LinkId>(e))) total += z[i];
    x[e] = z[e] / total;
  }
  return x;
}

void contention_probabilities(std::span<const double> duty, std::span<const double> rates,
                              std::span<const double> link_loads, double floor,
                              std::span<double> capacity, std::span<double> contention) {
  for (std::size_t e = 0; e < duty.size(); ++e) {
    capacity[e] = rates[e] * std::max(duty[e], floor);
    // Idle links never contend, independent of the floor.
    contention[e] = link_loads[e] > 0.0 ? std::min(link_loads[e] / capacity[e], 1.0) : 0.0;
  }
}

NdtResult predict(const ConflictGraph& g, std::span<const double> rates,
                  std::span<const double> link_loads, const PriorityVector& z,
                  const NdtConfig& config) {
  config.validate();
  const auto n = g.num_links();
  if (rates.size() != n || link_loads.size() != n || z.size() != n) {
    throw std::invalid_argument("ndt::predict: input sizes do not match the conflict graph");
  }
  for (std::size_t e = 0; e < n; ++e) {
    if (link_loads[e] > 0.0 && !(rates[e] > 0.0)) {
      throw std::invalid_argument("ndt::predict: link " + std::to_string(e) +
                                  " carries traffic but has zero rate");
    }
  }

  const analytic::ModelOptions model{config.rounds, config.grid_points, false};
  NdtResult result;
  auto x = initial_duty_cycles(g, z);
  for (auto& v : x) v = std::max(v, config.floor);
  if (config.keep_trace) result.trace.duty.push_back(x);

  std::vector<double> capacity(n);
  std::vector<double> contention(n);
  // Only loaded links can contend, so the contending subgraph is fixed.
  std::vector<LinkId> loaded;
  for (std::size_t e = 0; e < n; ++e) {
    if (link_loads[e] > 0.0) loaded.push_back(static_cast<LinkId>(e));
  }
  analytic::IndependentModel kernel(g, z, std::move(loaded), model);
  analytic::ModelOutput dot;
  for (int k = 0; k < config.iterations; ++k) {
    contention_probabilities(x, rates, link_loads, config.floor, capacity, contention);
    // Independent joints b_{i,e} = b_i b_e.
    kernel.run(contention, dot);
    for (std::size_t e = 0; e < n; ++e) {
      const double blended = (1.0 - config.ema) * x[e] + config.ema * dot.duty_cycles[e];
      x[e] = std::clamp(blended, config.floor, 1.0);
    }
    if (config.keep_trace) {
      result.trace.capacity.push_back(capacity);
      result.trace.contention.push_back(contention);
      result.trace.duty.push_back(x);
    }
  }
  result.duty_cycles = std::move(x);
  return result;
}

NdtResult predict(const Instance& inst, const PriorityVector& z, const NdtConfig& config) {
  const auto loads = inst.routing.link_loads();
  return predict(inst.conflicts, inst.rates, loads, z, config);
}

std::vector<double> overload_index(std::span<const double> duty_cycles,
                                   std::span<const double> link_loads,
                                   std::span<const double> rates) {
  if (duty_cycles.size() != link_loads.size() || rates.size() != link_loads.size()) {
    throw std::invalid_argument("overload_index: length mismatch");
  }
  std::vector<double> rho(link_loads.size(), 0.0);
  for (std::size_t e = 0; e < rho.size(); ++e) {
    if (link_loads[e] > 0.0) rho[e] = link_loads[e] / (duty_cycles[e] * rates[e]);
  }
  return rho;
}

}  // namespace lubyndt::ndt
