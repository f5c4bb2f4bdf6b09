#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lubyndt/ndt.hpp"
#include "lubyndt/netgen.hpp"
#include "lubyndt/optimizer.hpp"

namespace lubyndt::harness {

enum class Policy { Baseline, Priority, PriorityGating };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& name);

// Malformed experiment configuration; the message names the offending field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  std::vector<int> sizes{20, 50, 100};
  std::vector<double> loads{0.4, 1, 2, 3, 4, 5, 6, 7};
  int topologies = 10;
  int realizations = 10;
  int horizon = 1000;
  std::vector<Policy> policies{Policy::Baseline, Policy::Priority, Policy::PriorityGating};
  std::vector<int> rounds{1, 3};
  ndt::NdtConfig ndt;
  opt::OptimizerConfig optimizer;
  int gating_window = 100;
  double gating_factor = 1.1;
  double rate_sigma = 3.0;
  std::uint64_t seed = 1;
  int threads = 1;

  // Throws SpecError.
  void validate() const;
};

// Missing fields keep their defaults; unknown or ill-typed fields throw SpecError.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);

struct InstanceKey {
  int size = 0;
  int topology = 0;
  int realization = 0;
  double load = 1.0;
};

std::string instance_id(const InstanceKey& key);

// Seeds depend on (master seed, size, topology, realization) but not on the
// load, so one realization is replayed across the load grid.
InstanceSeeds instance_seeds(std::uint64_t master, const InstanceKey& key);
std::uint64_t simulation_seed(const InstanceSeeds& seeds);

Instance build_instance(std::uint64_t master, const InstanceKey& key);

// Cartesian product sizes x topologies x realizations x loads.
std::vector<InstanceKey> instance_grid(const ExperimentSpec& spec);

}  // namespace lubyndt::harness
