#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lubyndt/export.hpp"
#include "lubyndt/harness.hpp"
#include "lubyndt/instance_io.hpp"
#include "lubyndt/ndt.hpp"
#include "lubyndt/optimizer.hpp"
#include "lubyndt/simulator.hpp"

using namespace lubyndt;
using namespace lubyndt::harness;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  std::optional<int> threads;
  std::vector<int> sizes;
  std::vector<double> loads;
  std::optional<int> topologies;
  std::optional<int> realizations;
  std::optional<int> horizon;
  std::vector<int> rounds;
  std::vector<std::string> policies;
  std::string instance;
  std::string policy;
  bool gating = false;
  bool trace = false;
};

ExperimentSpec resolve_spec(const Options& o) {
  ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : load_spec(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.threads) spec.threads = *o.threads;
  if (!o.sizes.empty()) spec.sizes = o.sizes;
  if (!o.loads.empty()) spec.loads = o.loads;
  if (o.topologies) spec.topologies = *o.topologies;
  if (o.realizations) spec.realizations = *o.realizations;
  if (o.horizon) spec.horizon = *o.horizon;
  if (!o.rounds.empty()) spec.rounds = o.rounds;
  if (!o.policies.empty()) {
    spec.policies.clear();
    for (const auto& p : o.policies) {
      try {
        spec.policies.push_back(policy_from_string(p));
      } catch (const std::exception&) {
        throw SpecError("policies: unknown policy '" + p + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

Instance load_instance(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("instance: --instance is required");
  return io::instance_from_json(io::read_json(path));
}

void announce(const fs::path& path) { std::printf("wrote %s\n", path.string().c_str()); }

void run_generate(const Options& o) {
  const auto spec = resolve_spec(o);
  const fs::path dir = fs::path(o.out) / "instances";
  fs::create_directories(dir);
  for (const auto& key : instance_grid(spec)) {
    const auto path = dir / (instance_id(key) + ".json");
    io::write_json(path, io::instance_to_json(build_instance(spec.seed, key)));
    announce(path);
  }
}

void run_simulate(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto inst = load_instance(o.instance);
  sim::SimConfig cfg;
  cfg.rounds = spec.rounds.front();
  cfg.horizon = spec.horizon;
  cfg.rate_sigma = spec.rate_sigma;
  cfg.seed = simulation_seed(inst.seeds);
  cfg.record_trace = o.trace;
  auto z = PriorityVector::uniform(inst.num_links());
  if (!o.policy.empty()) {
    const auto bundle = io::policy_from_json(io::read_json(o.policy));
    if (bundle.z_tilde.size() != inst.num_links())
      throw std::invalid_argument("policy: z_tilde length does not match the instance");
    z = bundle.z_tilde;
    if (o.gating) cfg.gating = sim::GatingPolicy{bundle.x_tilde, spec.gating_window, spec.gating_factor};
  } else if (o.gating) {
    throw std::invalid_argument("gating: --gating needs --policy");
  }
  const auto result = sim::run_simulation(inst, z, cfg);
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / "simulation.json";
  io::write_json(path, io::sim_result_to_json(result, inst.conflicts));
  announce(path);
  if (o.trace) {
    const auto trace = fs::path(o.out) / "schedule.bin";
    sim::write_schedule_trace(trace, result.trace, inst.num_links());
    announce(trace);
  }
}

void run_predict(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto inst = load_instance(o.instance);
  auto z = PriorityVector::uniform(inst.num_links());
  if (!o.policy.empty()) z = io::policy_from_json(io::read_json(o.policy)).z_tilde;
  auto cfg = spec.ndt;
  if (!o.rounds.empty()) cfg.rounds = o.rounds.front();
  cfg.keep_trace = o.trace;
  const auto result = ndt::predict(inst, z, cfg);
  const auto rho = ndt::overload_index(result.duty_cycles, inst.routing.link_loads(), inst.rates);
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / "prediction.json";
  io::write_json(path, io::prediction_to_json(result, rho));
  announce(path);
}

void run_optimize(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto inst = load_instance(o.instance);
  auto cfg = spec.ndt;
  if (!o.rounds.empty()) cfg.rounds = o.rounds.front();
  auto opt_cfg = spec.optimizer;
  opt_cfg.threads = spec.threads;
  const auto bundle = opt::optimize_priorities(inst, cfg, opt_cfg);
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / "policy.json";
  io::write_json(path, io::policy_to_json(bundle));
  announce(path);
}

void export_tables(const Options& o, const ExperimentSpec& spec,
                   const std::vector<std::pair<std::string, Table>>& tables) {
  export_results(o.out, spec, tables);
  for (const auto& [name, table] : tables) announce(fs::path(o.out) / name);
  announce(fs::path(o.out) / "manifest.json");
}

void run_accuracy(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto rows = run_accuracy_sweep(spec);
  const auto summary = summarize_accuracy(rows);
  export_tables(o, spec, {{"accuracy.csv", to_table(rows, TableKind::Accuracy)},
                          {"accuracy_summary.csv", to_table(summary)}});
}

void run_compare(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto rows = run_policy_comparison(spec);
  const auto summary = summarize_policies(rows);
  export_tables(o, spec, {{"policies.csv", to_table(rows, TableKind::Policies)},
                          {"policies_summary.csv", to_table(summary)}});
}

void run_bench(const Options& o) {
  const auto spec = resolve_spec(o);
  const auto rows = run_runtime_benchmark(spec);
  export_tables(o, spec, {{"runtime.csv", to_table(rows, TableKind::Runtime)}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Luby contention simulator, network digital twin and priority optimizer"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "ExperimentSpec JSON file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--sizes", o.sizes, "Network sizes");
  app.add_option("--loads", o.loads, "Traffic loads");
  app.add_option("--topologies", o.topologies, "Topologies per size");
  app.add_option("--realizations", o.realizations, "Realizations per topology");
  app.add_option("--horizon", o.horizon, "Simulated slots");
  app.add_option("--rounds", o.rounds, "Luby rounds");
  app.add_option("--policies", o.policies, "baseline, priority, priority_gating");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&);
  };
  const Command commands[] = {
      {"generate", "Write every instance of the spec grid", run_generate},
      {"simulate", "Simulate one instance", run_simulate},
      {"predict", "NDT prediction for one instance", run_predict},
      {"optimize", "Optimize priorities for one instance", run_optimize},
      {"accuracy", "Model accuracy sweep", run_accuracy},
      {"compare", "Policy comparison sweep", run_compare},
      {"bench", "NDT vs simulation runtime", run_bench},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    if (std::string_view(c.name) == "simulate" || std::string_view(c.name) == "predict" ||
        std::string_view(c.name) == "optimize") {
      sub->add_option("--instance", o.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    }
    if (std::string_view(c.name) == "simulate" || std::string_view(c.name) == "predict") {
      sub->add_option("--policy", o.policy, "Policy JSON from optimize")->check(CLI::ExistingFile);
      sub->add_flag("--trace", o.trace, "Also write the per-slot or per-iteration trace");
    }
    if (std::string_view(c.name) == "simulate") {
      sub->add_flag("--gating", o.gating, "Apply duty-cycle gating from the policy");
    }
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (const auto& [sub, c] : subs) {
      if (sub->parsed()) c->run(o);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
