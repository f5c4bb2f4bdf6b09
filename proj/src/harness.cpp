#include "lubyndt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "lubyndt/analytic.hpp"
#include "lubyndt/metrics.hpp"
#include "lubyndt/ndt.hpp"
#include "lubyndt/optimizer.hpp"
#include "lubyndt/simulator.hpp"

namespace lubyndt::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Field {
  const char* name;
  std::string (*get)(const MetricsRow&);
  void (*set)(MetricsRow&, const std::string&);
};

std::optional<std::int64_t> parse_optional_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stoll(s);
}

const std::vector<Field>& fields() {
  static const std::vector<Field> registry = {
      {"instance_id", [](const MetricsRow& r) { return r.instance_id; },
       [](MetricsRow& r, const std::string& s) { r.instance_id = s; }},
      {"size", [](const MetricsRow& r) { return std::to_string(r.size); },
       [](MetricsRow& r, const std::string& s) { r.size = s.empty() ? 0 : std::stoi(s); }},
      {"topology", [](const MetricsRow& r) { return std::to_string(r.topology); },
       [](MetricsRow& r, const std::string& s) { r.topology = s.empty() ? 0 : std::stoi(s); }},
      {"realization", [](const MetricsRow& r) { return std::to_string(r.realization); },
       [](MetricsRow& r, const std::string& s) { r.realization = s.empty() ? 0 : std::stoi(s); }},
      {"load", [](const MetricsRow& r) { return format_number(r.load); },
       [](MetricsRow& r, const std::string& s) { r.load = parse_optional_double(s).value_or(0.0); }},
      {"policy", [](const MetricsRow& r) { return r.policy; },
       [](MetricsRow& r, const std::string& s) { r.policy = s; }},
      {"rounds", [](const MetricsRow& r) { return std::to_string(r.rounds); },
       [](MetricsRow& r, const std::string& s) { r.rounds = s.empty() ? 0 : std::stoi(s); }},
      {"input_config", [](const MetricsRow& r) { return r.input_config; },
       [](MetricsRow& r, const std::string& s) { r.input_config = s; }},
      {"pearson", [](const MetricsRow& r) { return format_optional(r.pearson); },
       [](MetricsRow& r, const std::string& s) { r.pearson = parse_optional_double(s); }},
      {"rmse", [](const MetricsRow& r) { return format_optional(r.rmse); },
       [](MetricsRow& r, const std::string& s) { r.rmse = parse_optional_double(s); }},
      {"max_terminal_queue",
       [](const MetricsRow& r) {
         return r.max_terminal_queue ? format_number(*r.max_terminal_queue) : std::string();
       },
       [](MetricsRow& r, const std::string& s) { r.max_terminal_queue = parse_optional_int(s); }},
      {"max_duty_cycle", [](const MetricsRow& r) { return format_optional(r.max_duty_cycle); },
       [](MetricsRow& r, const std::string& s) { r.max_duty_cycle = parse_optional_double(s); }},
      {"ndt_wall_clock_s", [](const MetricsRow& r) { return format_optional(r.ndt_wall_clock_s); },
       [](MetricsRow& r, const std::string& s) { r.ndt_wall_clock_s = parse_optional_double(s); }},
      {"sim_wall_clock_s", [](const MetricsRow& r) { return format_optional(r.sim_wall_clock_s); },
       [](MetricsRow& r, const std::string& s) { r.sim_wall_clock_s = parse_optional_double(s); }},
      {"speedup", [](const MetricsRow& r) { return format_optional(r.speedup); },
       [](MetricsRow& r, const std::string& s) { r.speedup = parse_optional_double(s); }},
      {"loss_baseline", [](const MetricsRow& r) { return format_optional(r.loss_baseline); },
       [](MetricsRow& r, const std::string& s) { r.loss_baseline = parse_optional_double(s); }},
      {"loss_optimized", [](const MetricsRow& r) { return format_optional(r.loss_optimized); },
       [](MetricsRow& r, const std::string& s) { r.loss_optimized = parse_optional_double(s); }},
      {"error", [](const MetricsRow& r) { return r.error; },
       [](MetricsRow& r, const std::string& s) { r.error = s; }},
  };
  return registry;
}

const Field& field(const std::string& name) {
  for (const auto& f : fields()) {
    if (name == f.name) return f;
  }
  throw std::invalid_argument("unknown metrics column '" + name + "'");
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

std::int64_t max_of(const std::vector<std::int64_t>& v) {
  return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

MetricsRow base_row(const InstanceKey& key, int rounds) {
  MetricsRow row;
  row.instance_id = instance_id(key);
  row.size = key.size;
  row.topology = key.topology;
  row.realization = key.realization;
  row.load = key.load;
  row.rounds = rounds;
  return row;
}

sim::SimConfig sim_config(const ExperimentSpec& spec, const Instance& inst, int rounds) {
  sim::SimConfig cfg;
  cfg.rounds = rounds;
  cfg.horizon = spec.horizon;
  cfg.rate_sigma = spec.rate_sigma;
  cfg.seed = simulation_seed(inst.seeds);
  return cfg;
}

template <typename Evaluate>
std::vector<MetricsRow> sweep(const ExperimentSpec& spec, const char* label, Evaluate evaluate) {
  spec.validate();
  const auto keys = instance_grid(spec);
  std::vector<std::vector<MetricsRow>> per_key(keys.size());
  parallel_for(keys.size(), spec.threads, [&](std::size_t k) {
    const auto& key = keys[k];
    Instance inst;
    try {
      inst = build_instance(spec.seed, key);
    } catch (const std::exception& e) {
      for (int m : spec.rounds) {
        auto row = base_row(key, m);
        row.error = std::string(label) + ": " + e.what();
        per_key[k].push_back(std::move(row));
      }
      return;
    }
    for (int m : spec.rounds) {
      try {
        auto rows = evaluate(inst, key, m);
        per_key[k].insert(per_key[k].end(), rows.begin(), rows.end());
      } catch (const std::exception& e) {
        auto row = base_row(key, m);
        row.error = std::string(label) + ": " + e.what();
        per_key[k].push_back(std::move(row));
      }
    }
  });
  std::vector<MetricsRow> out;
  for (auto& rows : per_key) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

}  // namespace

const std::vector<std::string>& table_columns(TableKind kind) {
  static const std::vector<std::string> accuracy = {
      "instance_id", "size", "topology", "realization", "load", "rounds",
      "input_config", "pearson", "rmse", "max_duty_cycle", "sim_wall_clock_s", "error"};
  static const std::vector<std::string> policies = {
      "instance_id", "size", "topology", "realization", "load", "policy", "rounds",
      "max_terminal_queue", "max_duty_cycle", "ndt_wall_clock_s", "sim_wall_clock_s",
      "loss_baseline", "loss_optimized", "error"};
  static const std::vector<std::string> runtime = {
      "size", "load", "rounds", "ndt_wall_clock_s", "sim_wall_clock_s", "speedup"};
  switch (kind) {
    case TableKind::Accuracy: return accuracy;
    case TableKind::Policies: return policies;
    case TableKind::Runtime: return runtime;
  }
  return accuracy;
}

Table to_table(std::span<const MetricsRow> rows, TableKind kind) {
  Table t;
  t.columns = table_columns(kind);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& c : t.columns) cells.push_back(field(c).get(row));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<MetricsRow> rows_from_table(const Table& table) {
  std::vector<const Field*> setters;
  for (const auto& c : table.columns) setters.push_back(&field(c));
  std::vector<MetricsRow> out;
  for (const auto& cells : table.rows) {
    if (cells.size() != setters.size()) throw std::invalid_argument("ragged metrics table row");
    MetricsRow row;
    for (std::size_t i = 0; i < cells.size(); ++i) setters[i]->set(row, cells[i]);
    out.push_back(std::move(row));
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (auto i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::vector<MetricsRow> evaluate_accuracy(const Instance& inst, const InstanceKey& key,
                                          const ExperimentSpec& spec, int rounds) {
  const auto z = PriorityVector::uniform(inst.num_links());
  const auto result = sim::run_simulation(inst, z, sim_config(spec, inst, rounds));
  const auto joint = sim::empirical_contention(result);
  const auto marginal = analytic::independent_contention(inst.conflicts, joint.marginal);
  const analytic::ModelOptions options{rounds, spec.ndt.grid_points, false};

  std::vector<MetricsRow> rows;
  for (const auto& [name, b] : {std::pair{"marginal", &marginal}, std::pair{"joint", &joint}}) {
    const auto predicted = analytic::duty_cycles(inst.conflicts, z, *b, options).duty_cycles;
    auto row = base_row(key, rounds);
    row.policy = to_string(Policy::Baseline);
    row.input_config = name;
    if (predicted.size() >= 2) {
      row.pearson = metrics::pearson(predicted, result.duty_cycles);
      row.rmse = metrics::rmse(predicted, result.duty_cycles);
    }
    row.max_duty_cycle = max_of(result.duty_cycles);
    row.sim_wall_clock_s = result.wall_clock_s;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> evaluate_policies(const Instance& inst, const InstanceKey& key,
                                          const ExperimentSpec& spec, int rounds) {
  auto ndt_cfg = spec.ndt;
  ndt_cfg.rounds = rounds;
  ndt_cfg.keep_trace = false;
  auto opt_cfg = spec.optimizer;
  opt_cfg.threads = 1;

  const auto baseline_z = PriorityVector::uniform(inst.num_links());
  const bool needs_policy = std::any_of(spec.policies.begin(), spec.policies.end(),
                                        [](Policy p) { return p != Policy::Baseline; });
  std::optional<opt::PolicyBundle> bundle;
  double ndt_seconds = 0.0;
  if (needs_policy) {
    bundle = opt::optimize_priorities(inst, ndt_cfg, opt_cfg);
    const auto start = Clock::now();
    (void)ndt::predict(inst, bundle->z_tilde, ndt_cfg);
    ndt_seconds = seconds_since(start);
  } else {
    const auto start = Clock::now();
    (void)ndt::predict(inst, baseline_z, ndt_cfg);
    ndt_seconds = seconds_since(start);
  }

  std::vector<MetricsRow> rows;
  for (auto policy : spec.policies) {
    auto cfg = sim_config(spec, inst, rounds);
    const auto& z = policy == Policy::Baseline ? baseline_z : bundle->z_tilde;
    if (policy == Policy::PriorityGating) {
      cfg.gating = sim::GatingPolicy{bundle->x_tilde, spec.gating_window, spec.gating_factor};
    }
    const auto result = sim::run_simulation(inst, z, cfg);
    auto row = base_row(key, rounds);
    row.policy = to_string(policy);
    row.max_terminal_queue = max_of(result.terminal_queues);
    row.max_duty_cycle = max_of(result.duty_cycles);
    row.ndt_wall_clock_s = ndt_seconds;
    row.sim_wall_clock_s = result.wall_clock_s;
    if (bundle) {
      row.loss_baseline = bundle->loss_trajectory.front();
      row.loss_optimized = bundle->best_loss;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> run_accuracy_sweep(const ExperimentSpec& spec) {
  return sweep(spec, "accuracy", [&](const Instance& inst, const InstanceKey& key, int m) {
    return evaluate_accuracy(inst, key, spec, m);
  });
}

std::vector<MetricsRow> run_policy_comparison(const ExperimentSpec& spec) {
  return sweep(spec, "compare", [&](const Instance& inst, const InstanceKey& key, int m) {
    return evaluate_policies(inst, key, spec, m);
  });
}

std::vector<MetricsRow> run_runtime_benchmark(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<MetricsRow> out;
  for (int size : spec.sizes) {
    for (double load : spec.loads) {
      std::vector<Instance> instances;
      for (int t = 0; t < spec.topologies; ++t) {
        for (int r = 0; r < spec.realizations; ++r) {
          instances.push_back(build_instance(spec.seed, {size, t, r, load}));
        }
      }
      for (int m : spec.rounds) {
        auto ndt_cfg = spec.ndt;
        ndt_cfg.rounds = m;
        ndt_cfg.keep_trace = false;
        auto time_ndt = [&](const Instance& inst) {
          const auto z = PriorityVector::uniform(inst.num_links());
          const auto loads = inst.routing.link_loads();
          // Repeat until the clock has something to measure.
          int reps = 0;
          const auto start = Clock::now();
          do {
            (void)ndt::predict(inst.conflicts, inst.rates, loads, z, ndt_cfg);
            ++reps;
          } while (seconds_since(start) < 0.005);
          return seconds_since(start) / reps;
        };
        auto time_sim = [&](const Instance& inst) {
          const auto z = PriorityVector::uniform(inst.num_links());
          return sim::run_simulation(inst, z, sim_config(spec, inst, m)).wall_clock_s;
        };
        (void)time_ndt(instances.front());
        (void)time_sim(instances.front());
        double ndt_total = 0.0;
        double sim_total = 0.0;
        for (const auto& inst : instances) {
          ndt_total += time_ndt(inst);
          sim_total += time_sim(inst);
        }
        MetricsRow row;
        row.instance_id = "n" + std::to_string(size) + "-b" + format_number(load);
        row.size = size;
        row.load = load;
        row.rounds = m;
        row.ndt_wall_clock_s = ndt_total / instances.size();
        row.sim_wall_clock_s = sim_total / instances.size();
        row.speedup = *row.sim_wall_clock_s / *row.ndt_wall_clock_s;
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::optional<double> percent_change(double value, double reference) {
  if (reference == 0.0) return value == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return 100.0 * (value - reference) / reference;
}

std::vector<AccuracySummary> summarize_accuracy(std::span<const MetricsRow> rows) {
  std::map<std::tuple<int, double, int, std::string>, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows) {
    if (!r.error.empty() || !r.rmse) continue;
    groups[{r.size, r.load, r.rounds, r.input_config}].push_back(&r);
  }
  std::vector<AccuracySummary> out;
  for (const auto& [key, members] : groups) {
    AccuracySummary s;
    std::tie(s.size, s.load, s.rounds, s.input_config) = key;
    std::vector<double> pearsons;
    std::vector<double> rmses;
    for (const auto* r : members) {
      if (r->pearson) {
        pearsons.push_back(*r->pearson);
      } else {
        ++s.undefined_pearson;
      }
      rmses.push_back(*r->rmse);
    }
    if (!pearsons.empty()) s.mean_pearson = metrics::mean(pearsons);
    s.mean_rmse = metrics::mean(rmses);
    s.instances = static_cast<int>(members.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PolicySummary> summarize_policies(std::span<const MetricsRow> rows) {
  std::map<std::tuple<int, double, int, std::string>, std::vector<const MetricsRow*>> groups;
  for (const auto& r : rows) {
    if (!r.error.empty() || !r.max_terminal_queue || !r.max_duty_cycle) continue;
    groups[{r.size, r.load, r.rounds, r.policy}].push_back(&r);
  }
  std::vector<PolicySummary> out;
  for (const auto& [key, members] : groups) {
    PolicySummary s;
    std::tie(s.size, s.load, s.rounds, s.policy) = key;
    std::vector<double> queues;
    std::vector<double> duties;
    for (const auto* r : members) {
      queues.push_back(static_cast<double>(*r->max_terminal_queue));
      duties.push_back(*r->max_duty_cycle);
    }
    s.queue_median = metrics::percentile(queues, 50.0);
    s.queue_p25 = metrics::percentile(queues, 25.0);
    s.queue_p75 = metrics::percentile(queues, 75.0);
    s.duty_median = metrics::percentile(duties, 50.0);
    s.duty_p25 = metrics::percentile(duties, 25.0);
    s.duty_p75 = metrics::percentile(duties, 75.0);
    s.instances = static_cast<int>(members.size());
    out.push_back(std::move(s));
  }
  for (auto& s : out) {
    for (const auto& b : out) {
      if (b.policy == to_string(Policy::Baseline) && b.size == s.size && b.load == s.load &&
          b.rounds == s.rounds) {
        s.queue_change_pct = percent_change(s.queue_median, b.queue_median);
        s.duty_change_pct = percent_change(s.duty_median, b.duty_median);
      }
    }
  }
  return out;
}

Table to_table(std::span<const AccuracySummary> rows) {
  Table t;
  t.columns = {"size", "load", "rounds", "input_config", "mean_pearson", "mean_rmse", "instances",
               "undefined_pearson"};
  for (const auto& s : rows) {
    t.rows.push_back({std::to_string(s.size), format_number(s.load), std::to_string(s.rounds),
                      s.input_config, format_optional(s.mean_pearson), format_number(s.mean_rmse),
                      std::to_string(s.instances), std::to_string(s.undefined_pearson)});
  }
  return t;
}

Table to_table(std::span<const PolicySummary> rows) {
  Table t;
  t.columns = {"size", "load", "rounds", "policy", "queue_median", "queue_p25", "queue_p75",
               "duty_median", "duty_p25", "duty_p75", "queue_change_pct", "duty_change_pct",
               "instances"};
  for (const auto& s : rows) {
    t.rows.push_back({std::to_string(s.size), format_number(s.load), std::to_string(s.rounds),
                      s.policy, format_number(s.queue_median), format_number(s.queue_p25),
                      format_number(s.queue_p75), format_number(s.duty_median),
                      format_number(s.duty_p25), format_number(s.duty_p75),
                      format_optional(s.queue_change_pct), format_optional(s.duty_change_pct),
                      std::to_string(s.instances)});
  }
  return t;
}

}  // namespace lubyndt::harness
