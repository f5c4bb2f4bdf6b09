#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lubyndt/experiment.hpp"
#include "lubyndt/table.hpp"

namespace lubyndt::harness {

struct MetricsRow {
  std::string instance_id;
  int size = 0;
  int topology = 0;
  int realization = 0;
  double load = 0.0;
  std::string policy;
  int rounds = 0;
  std::string input_config;  // "marginal" or "joint" for accuracy rows
  std::optional<double> pearson;
  std::optional<double> rmse;
  std::optional<std::int64_t> max_terminal_queue;
  std::optional<double> max_duty_cycle;
  std::optional<double> ndt_wall_clock_s;
  std::optional<double> sim_wall_clock_s;
  std::optional<double> speedup;
  std::optional<double> loss_baseline;
  std::optional<double> loss_optimized;
  std::string error;

  bool operator==(const MetricsRow&) const = default;
};

enum class TableKind { Accuracy, Policies, Runtime };

const std::vector<std::string>& table_columns(TableKind kind);
Table to_table(std::span<const MetricsRow> rows, TableKind kind);
// Inverse of to_table for any column subset; unknown columns throw.
std::vector<MetricsRow> rows_from_table(const Table& table);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Baseline simulation with M rounds, then the closed-form model fed the
// empirical marginals alone ("marginal") and with joints ("joint").
std::vector<MetricsRow> evaluate_accuracy(const Instance& inst, const InstanceKey& key,
                                          const ExperimentSpec& spec, int rounds);

// Optimizes priorities once, then simulates each requested policy with the
// same simulation seed (common random numbers).
std::vector<MetricsRow> evaluate_policies(const Instance& inst, const InstanceKey& key,
                                          const ExperimentSpec& spec, int rounds);

std::vector<MetricsRow> run_accuracy_sweep(const ExperimentSpec& spec);
std::vector<MetricsRow> run_policy_comparison(const ExperimentSpec& spec);
// Sequential regardless of spec.threads; one warm-up run per cell is discarded.
std::vector<MetricsRow> run_runtime_benchmark(const ExperimentSpec& spec);

struct AccuracySummary {
  int size = 0;
  double load = 0.0;
  int rounds = 0;
  std::string input_config;
  std::optional<double> mean_pearson;  // over rows with a defined Pearson
  double mean_rmse = 0.0;
  int instances = 0;
  int undefined_pearson = 0;
};

struct PolicySummary {
  int size = 0;
  double load = 0.0;
  int rounds = 0;
  std::string policy;
  double queue_median = 0.0;
  double queue_p25 = 0.0;
  double queue_p75 = 0.0;
  double duty_median = 0.0;
  double duty_p25 = 0.0;
  double duty_p75 = 0.0;
  std::optional<double> queue_change_pct;  // vs baseline median; needs baseline rows
  std::optional<double> duty_change_pct;
  int instances = 0;
};

std::vector<AccuracySummary> summarize_accuracy(std::span<const MetricsRow> rows);
std::vector<PolicySummary> summarize_policies(std::span<const MetricsRow> rows);
Table to_table(std::span<const AccuracySummary> rows);
Table to_table(std::span<const PolicySummary> rows);

// 100 * (value - reference) / reference; nullopt when reference is 0.
std::optional<double> percent_change(double value, double reference);

}  // namespace lubyndt::harness
