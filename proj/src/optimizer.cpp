#include "lubyndt/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace lubyndt::opt {

void OptimizerConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("optimizer.steps must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer.learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("optimizer.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("optimizer.beta2 must lie in [0, 1)");
  if (!(fd_step > 0.0)) throw std::invalid_argument("optimizer.fd_step must be positive");
  if (threads < 1) throw std::invalid_argument("optimizer.threads must be >= 1");
}

double link_penalty(double rho) {
  return 1.0 / (1.0 + std::exp(-3.0 * (rho - 0.8))) + std::max(rho - 1.0, 0.0);
}

namespace {

double loss_from_loads(const Instance& inst, std::span<const double> loads, const PriorityVector& z,
                       const ndt::NdtConfig& config) {
  const auto x = ndt::predict(inst.conflicts, inst.rates, loads, z, config).duty_cycles;
  const auto rho = ndt::overload_index(x, loads, inst.rates);
  if (rho.empty()) return 0.0;
  double sum = 0.0;
  for (double r : rho) sum += link_penalty(r);
  return sum / static_cast<double>(rho.size());
}

PriorityVector from_log(std::span<const double> u) {
  std::vector<double> z(u.size());
  for (std::size_t e = 0; e < u.size(); ++e) z[e] = std::exp(u[e]);
  return PriorityVector(std::move(z));
}

ndt::NdtConfig lean(ndt::NdtConfig config) {
  config.keep_trace = false;
  return config;
}

}  // namespace

double loss(const Instance& inst, const PriorityVector& z, const ndt::NdtConfig& config) {
  const auto loads = inst.routing.link_loads();
  return loss_from_loads(inst, loads, z, lean(config));
}

std::vector<double> central_difference(const LogLoss& f, std::span<const double> u, double h,
                                       int threads) {
  const auto n = u.size();
  std::vector<double> grad(n, 0.0);
  auto probe = [&](std::size_t k, std::vector<double>& point) {
    point.assign(u.begin(), u.end());
    point[k] = u[k] + h;
    const double up = f(point);
    point[k] = u[k] - h;
    const double down = f(point);
    grad[k] = (up - down) / (2.0 * h);
  };
  if (threads <= 1 || n < 2) {
    std::vector<double> point;
    for (std::size_t k = 0; k < n; ++k) probe(k, point);
    return grad;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      std::vector<double> point;
      for (auto k = next++; k < n; k = next++) probe(k, point);
    });
  }
  pool.clear();
  return grad;
}

std::vector<double> gradient(const Instance& inst, const PriorityVector& z,
                             const ndt::NdtConfig& ndt_config, const OptimizerConfig& config) {
  config.validate();
  const auto loads = inst.routing.link_loads();
  const auto cfg = lean(ndt_config);
  std::vector<double> u(z.size());
  for (std::size_t e = 0; e < u.size(); ++e) u[e] = std::log(z[e]);
  const LogLoss f = [&](std::span<const double> point) {
    return loss_from_loads(inst, loads, from_log(point), cfg);
  };
  return central_difference(f, u, config.fd_step, config.threads);
}

PolicyBundle optimize_priorities(const Instance& inst, const ndt::NdtConfig& ndt_config,
                                 const OptimizerConfig& config) {
  config.validate();
  ndt_config.validate();
  const auto n = inst.num_links();
  const auto loads = inst.routing.link_loads();
  const auto cfg = lean(ndt_config);
  const LogLoss f = [&](std::span<const double> point) {
    return loss_from_loads(inst, loads, from_log(point), cfg);
  };

  std::vector<double> u(n, 0.0);
  std::vector<double> m(n, 0.0);
  std::vector<double> v(n, 0.0);
  PolicyBundle bundle;
  double current = f(u);
  bundle.loss_trajectory.push_back(current);
  std::vector<double> best_u = u;
  double best = current;

  for (int step = 1; step <= config.steps; ++step) {
    const auto grad = central_difference(f, u, config.fd_step, config.threads);
    const double c1 = 1.0 - std::pow(config.beta1, step);
    const double c2 = 1.0 - std::pow(config.beta2, step);
    for (std::size_t e = 0; e < n; ++e) {
      m[e] = config.beta1 * m[e] + (1.0 - config.beta1) * grad[e];
      v[e] = config.beta2 * v[e] + (1.0 - config.beta2) * grad[e] * grad[e];
      u[e] -= config.learning_rate * (m[e] / c1) / (std::sqrt(v[e] / c2) + config.epsilon);
    }
    // The loss only sees priority ratios; drop the common log-scale.
    if (n > 0) {
      double mean = 0.0;
      for (double val : u) mean += val;
      mean /= static_cast<double>(n);
      for (double& val : u) val -= mean;
    }
    current = f(u);
    bundle.loss_trajectory.push_back(current);
    if (current < best) {
      best = current;
      best_u = u;
    }
  }

  bundle.z_tilde = from_log(best_u);
  bundle.best_loss = best;
  bundle.x_tilde = ndt::predict(inst.conflicts, inst.rates, loads, bundle.z_tilde, cfg).duty_cycles;
  return bundle;
}

}  // namespace lubyndt::opt
