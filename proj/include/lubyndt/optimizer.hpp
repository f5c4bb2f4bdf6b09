#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lubyndt/ndt.hpp"
#include "lubyndt/netgen.hpp"
#include "lubyndt/priority.hpp"

namespace lubyndt::opt {

struct OptimizerConfig {
  int steps = 20;
  double learning_rate = 0.1;   // on log-priorities
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double fd_step = 1e-3;        // central-difference step in log space
  int threads = 1;              // loss probes evaluated concurrently

  void validate() const;
};

struct PolicyBundle {
  PriorityVector z_tilde;
  std::vector<double> x_tilde;       // NDT prediction at z_tilde
  int gating_window = 100;
  double gating_factor = 1.1;
  std::vector<double> loss_trajectory;  // loss before the first step, then after each step
  double best_loss = 0.0;
};

// Per-link congestion penalty sigmoid(3 (rho - 0.8)) + max(rho - 1, 0).
double link_penalty(double rho);

// Mean link penalty of the NDT-predicted overload index.
double loss(const Instance& inst, const PriorityVector& z, const ndt::NdtConfig& config);

// Loss as a function of log-priorities u = ln z.
using LogLoss = std::function<double(std::span<const double>)>;

// Central differences: [f(u + h e_k) - f(u - h e_k)] / 2h for every k.
std::vector<double> central_difference(const LogLoss& f, std::span<const double> u, double h,
                                       int threads = 1);

// d loss / d ln z_e by central differences.
std::vector<double> gradient(const Instance& inst, const PriorityVector& z,
                             const ndt::NdtConfig& ndt_config, const OptimizerConfig& config);

// Adam on log-priorities from z = 1, recentred to zero mean after each step;
// returns the best iterate seen.
PolicyBundle optimize_priorities(const Instance& inst, const ndt::NdtConfig& ndt_config,
                                 const OptimizerConfig& config);

}  // namespace lubyndt::opt
