#include "lubyndt/experiment.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "lubyndt/rng.hpp"

namespace lubyndt::harness {

using nlohmann::json;

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Baseline: return "baseline";
    case Policy::Priority: return "priority";
    case Policy::PriorityGating: return "priority_gating";
  }
  return "unknown";
}

Policy policy_from_string(const std::string& name) {
  if (name == "baseline") return Policy::Baseline;
  if (name == "priority") return Policy::Priority;
  if (name == "priority_gating") return Policy::PriorityGating;
  throw SpecError("policies: unknown policy '" + name + "'");
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& msg) { throw SpecError(msg); };
  if (sizes.empty()) fail("sizes: must not be empty");
  for (int s : sizes) {
    if (s < 2) fail("sizes: every size must be >= 2");
  }
  if (loads.empty()) fail("loads: must not be empty");
  for (double b : loads) {
    if (!(b > 0.0)) fail("loads: every load must be positive");
  }
  if (topologies < 1) fail("topologies: must be >= 1");
  if (realizations < 1) fail("realizations: must be >= 1");
  if (horizon < 1) fail("horizon: must be >= 1");
  if (policies.empty()) fail("policies: must not be empty");
  if (rounds.empty()) fail("rounds: must not be empty");
  for (int m : rounds) {
    if (m < 1) fail("rounds: every entry must be >= 1");
  }
  if (gating_window < 1) fail("gating.window: must be >= 1");
  if (!(gating_factor > 0.0)) fail("gating.factor: must be positive");
  if (!(rate_sigma >= 0.0)) fail("rate_sigma: must be >= 0");
  if (threads < 1) fail("threads: must be >= 1");
  try {
    ndt.validate();
    optimizer.validate();
  } catch (const SpecError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
}

namespace {

template <typename T>
T read_field(const json& obj, const std::string& path, const char* key) {
  const auto& v = obj.at(key);
  auto bad = [&](const char* what) {
    return SpecError(path + key + ": expected " + what + ", got " + v.dump());
  };
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw bad("a string");
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned()) throw bad("a non-negative integer");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw bad("an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw bad("a number");
  }
  return v.get<T>();
}

template <typename T>
std::vector<T> read_list(const json& obj, const std::string& path, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw SpecError(path + key + ": expected an array, got " + v.dump());
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    json wrapper = {{"item", v[i]}};
    out.push_back(read_field<T>(wrapper, path + key + "[" + std::to_string(i) + "].", "item"));
  }
  return out;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  if (!obj.is_object()) throw SpecError((path.empty() ? "config" : path) + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw SpecError(path + item.key() + ": unknown field");
  }
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  reject_unknown(j, "", {"sizes", "loads", "topologies", "realizations", "horizon", "policies",
                         "rounds", "ndt", "optimizer", "gating", "rate_sigma", "seed", "threads"});
  ExperimentSpec s;
  if (j.contains("sizes")) s.sizes = read_list<int>(j, "", "sizes");
  if (j.contains("loads")) s.loads = read_list<double>(j, "", "loads");
  if (j.contains("topologies")) s.topologies = read_field<int>(j, "", "topologies");
  if (j.contains("realizations")) s.realizations = read_field<int>(j, "", "realizations");
  if (j.contains("horizon")) s.horizon = read_field<int>(j, "", "horizon");
  if (j.contains("policies")) {
    s.policies.clear();
    for (const auto& name : read_list<std::string>(j, "", "policies")) {
      s.policies.push_back(policy_from_string(name));
    }
  }
  if (j.contains("rounds")) s.rounds = read_list<int>(j, "", "rounds");
  if (j.contains("ndt")) {
    const auto& n = j.at("ndt");
    reject_unknown(n, "ndt.", {"iterations", "ema", "rounds", "grid_points", "floor"});
    if (n.contains("iterations")) s.ndt.iterations = read_field<int>(n, "ndt.", "iterations");
    if (n.contains("ema")) s.ndt.ema = read_field<double>(n, "ndt.", "ema");
    if (n.contains("rounds")) s.ndt.rounds = read_field<int>(n, "ndt.", "rounds");
    if (n.contains("grid_points")) s.ndt.grid_points = read_field<int>(n, "ndt.", "grid_points");
    if (n.contains("floor")) s.ndt.floor = read_field<double>(n, "ndt.", "floor");
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown(o, "optimizer.",
                   {"steps", "learning_rate", "beta1", "beta2", "epsilon", "fd_step"});
    if (o.contains("steps")) s.optimizer.steps = read_field<int>(o, "optimizer.", "steps");
    if (o.contains("learning_rate")) {
      s.optimizer.learning_rate = read_field<double>(o, "optimizer.", "learning_rate");
    }
    if (o.contains("beta1")) s.optimizer.beta1 = read_field<double>(o, "optimizer.", "beta1");
    if (o.contains("beta2")) s.optimizer.beta2 = read_field<double>(o, "optimizer.", "beta2");
    if (o.contains("epsilon")) s.optimizer.epsilon = read_field<double>(o, "optimizer.", "epsilon");
    if (o.contains("fd_step")) s.optimizer.fd_step = read_field<double>(o, "optimizer.", "fd_step");
  }
  if (j.contains("gating")) {
    const auto& g = j.at("gating");
    reject_unknown(g, "gating.", {"window", "factor"});
    if (g.contains("window")) s.gating_window = read_field<int>(g, "gating.", "window");
    if (g.contains("factor")) s.gating_factor = read_field<double>(g, "gating.", "factor");
  }
  if (j.contains("rate_sigma")) s.rate_sigma = read_field<double>(j, "", "rate_sigma");
  if (j.contains("seed")) s.seed = read_field<std::uint64_t>(j, "", "seed");
  if (j.contains("threads")) s.threads = read_field<int>(j, "", "threads");
  s.validate();
  return s;
}

json spec_to_json(const ExperimentSpec& s) {
  json policies = json::array();
  for (auto p : s.policies) policies.push_back(to_string(p));
  return {
      {"sizes", s.sizes},
      {"loads", s.loads},
      {"topologies", s.topologies},
      {"realizations", s.realizations},
      {"horizon", s.horizon},
      {"policies", policies},
      {"rounds", s.rounds},
      {"ndt",
       {{"iterations", s.ndt.iterations},
        {"ema", s.ndt.ema},
        {"rounds", s.ndt.rounds},
        {"grid_points", s.ndt.grid_points},
        {"floor", s.ndt.floor}}},
      {"optimizer",
       {{"steps", s.optimizer.steps},
        {"learning_rate", s.optimizer.learning_rate},
        {"beta1", s.optimizer.beta1},
        {"beta2", s.optimizer.beta2},
        {"epsilon", s.optimizer.epsilon},
        {"fd_step", s.optimizer.fd_step}}},
      {"gating", {{"window", s.gating_window}, {"factor", s.gating_factor}}},
      {"rate_sigma", s.rate_sigma},
      {"seed", s.seed},
      {"threads", s.threads},
  };
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SpecError("config: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return spec_from_json(j);
}

std::string instance_id(const InstanceKey& key) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, key.load);
  (void)ec;
  return "n" + std::to_string(key.size) + "-t" + std::to_string(key.topology) + "-r" +
         std::to_string(key.realization) + "-b" + std::string(buf, end);
}

InstanceSeeds instance_seeds(std::uint64_t master, const InstanceKey& key) {
  const auto per_size = derive_seed(master, "size", static_cast<std::uint64_t>(key.size));
  InstanceSeeds seeds;
  seeds.topology = derive_seed(per_size, "topology", static_cast<std::uint64_t>(key.topology));
  seeds.realization =
      derive_seed(seeds.topology, "realization", static_cast<std::uint64_t>(key.realization));
  return seeds;
}

std::uint64_t simulation_seed(const InstanceSeeds& seeds) {
  return derive_seed(seeds.realization, "simulation");
}

Instance build_instance(std::uint64_t master, const InstanceKey& key) {
  return netgen::make_instance(key.size, key.load, instance_seeds(master, key));
}

std::vector<InstanceKey> instance_grid(const ExperimentSpec& spec) {
  std::vector<InstanceKey> keys;
  for (int size : spec.sizes) {
    for (double load : spec.loads) {
      for (int t = 0; t < spec.topologies; ++t) {
        for (int r = 0; r < spec.realizations; ++r) keys.push_back({size, t, r, load});
      }
    }
  }
  return keys;
}

}  // namespace lubyndt::harness
