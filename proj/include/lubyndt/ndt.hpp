#pragma once

#include <span>
#include <vector>

#include "lubyndt/analytic.hpp"
#include "lubyndt/netgen.hpp"
#include "lubyndt/priority.hpp"

namespace lubyndt::ndt {

struct NdtConfig {
  int iterations = 5;      // K
  double ema = 0.5;        // alpha in (0, 1]
  int rounds = 3;          // M
  int grid_points = 64;    // L
  double floor = 1e-6;     // minimal duty cycle
  bool keep_trace = true;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct NdtTrace {
  std::vector<std::vector<double>> duty;         // x^(0..K)
  std::vector<std::vector<double>> capacity;     // mu^(k-1), k = 1..K
  std::vector<std::vector<double>> contention;   // b^(k), k = 1..K
};

struct NdtResult {
  std::vector<double> duty_cycles;  // x^(K)
  NdtTrace trace;                   // empty when keep_trace is false
};

// Starting point x^(0)_e = z_e / (z_e + sum of neighbor priorities).
std::vector<double> initial_duty_cycles(const ConflictGraph& g, const PriorityVector& z);

// Capacity mu_e = r_e max(x_e, floor) and contention b_e = min(lambda_e / mu_e, 1),
// with b_e = 0 on idle links. Output spans must match the input length.
void contention_probabilities(std::span<const double> duty, std::span<const double> rates,
                              std::span<const double> link_loads, double floor,
                              std::span<double> capacity, std::span<double> contention);

// Fixed-point iteration duty cycle -> capacity -> contention -> duty cycle
// with EMA damping. `link_loads` is lambda_e = sum_f Lambda_{e,f}.
// Throws std::invalid_argument if a loaded link has a zero rate.
NdtResult predict(const ConflictGraph& g, std::span<const double> rates,
                  std::span<const double> link_loads, const PriorityVector& z,
                  const NdtConfig& config);

NdtResult predict(const Instance& inst, const PriorityVector& z, const NdtConfig& config);

// rho_e = lambda_e / (x_e r_e), 0 on idle links.
std::vector<double> overload_index(std::span<const double> duty_cycles,
                                   std::span<const double> link_loads,
                                   std::span<const double> rates);

}  // namespace lubyndt::ndt
