#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lubyndt/analytic.hpp"
#include "lubyndt/netgen.hpp"
#include "lubyndt/priority.hpp"
#include "lubyndt/rng.hpp"

namespace lubyndt::sim {

// s_e in {0, 1} per link; the active set is independent in the conflict graph.
using SlotSchedule = std::vector<std::uint8_t>;

struct GatingPolicy {
  std::vector<double> target;  // predicted duty cycles x~
  int window = 100;            // W
  double factor = 1.1;         // gamma

  void validate(std::size_t num_links) const;
};

struct SimConfig {
  int rounds = 3;            // M
  int horizon = 1000;        // T
  double rate_sigma = 3.0;   // std-dev of the realized per-slot rate
  std::uint64_t seed = 0;
  std::optional<GatingPolicy> gating;
  bool check_invariants = false;  // independent set + packet conservation every slot
  bool record_trace = false;
};

struct SimResult {
  std::vector<double> duty_cycles;
  std::vector<std::int64_t> terminal_queues;
  std::vector<double> marginal_b;  // fraction of slots contending
  std::vector<double> joint_b;     // per conflict edge, fraction of slots both contend
  double wall_clock_s = 0.0;
  int horizon = 0;
  int rounds = 0;
  double rate_sigma = 0.0;
  std::uint64_t seed = 0;
  bool gated = false;
  int gating_window = 0;
  double gating_factor = 0.0;
  std::int64_t arrived = 0;
  std::int64_t delivered = 0;
  std::vector<SlotSchedule> trace;  // only with record_trace
};

// Reusable buffers for luby_schedule.
struct LubyWorkspace {
  std::vector<double> draw;
  std::vector<std::uint8_t> undecided;
  std::vector<LinkId> pending;
  std::vector<LinkId> winners;
};

// Weighted Luby contention for one slot: up to `rounds` rounds in which every
// undecided contending link draws U(0, z_e) and wins on a strictly larger draw
// than all neighbors (others count as 0). Winners transmit and mute their
// neighbors; links undecided after the last round stay silent.
void luby_schedule(const ConflictGraph& g, std::span<const double> z,
                   std::span<const std::uint8_t> contending, int rounds, Engine& engine,
                   LubyWorkspace& work, SlotSchedule& out);

SlotSchedule luby_schedule(const ConflictGraph& g, const PriorityVector& z,
                           std::span<const std::uint8_t> contending, int rounds, Engine& engine);

bool is_independent_set(const ConflictGraph& g, const SlotSchedule& s);

// Mean of s_e over the last min(W, history.size()) schedules; zeros when empty.
std::vector<double> windowed_duty_cycle(std::span<const SlotSchedule> history, int window);

// Sliding-window transmit counts maintained incrementally.
class DutyWindow {
 public:
  DutyWindow(std::size_t num_links, int window);

  void push(const SlotSchedule& s);
  double duty_cycle(LinkId e) const;
  std::size_t filled() const { return filled_; }

 private:
  int window_;
  std::size_t filled_ = 0;
  std::size_t head_ = 0;
  std::vector<SlotSchedule> ring_;
  std::vector<int> counts_;
};

// Per-link FIFO of packets tagged with their flow, stored as (flow, count) runs.
class QueueState {
 public:
  struct Run {
    FlowId flow;
    std::int64_t count;
  };

  explicit QueueState(std::size_t num_links = 0) : queues_(num_links), totals_(num_links, 0) {}

  std::size_t num_links() const { return queues_.size(); }
  std::int64_t total(LinkId e) const { return totals_[e]; }
  std::int64_t total() const;
  std::int64_t count(LinkId e, FlowId f) const;
  const std::deque<Run>& runs(LinkId e) const { return queues_[e]; }

  void push(LinkId e, FlowId f, std::int64_t count);
  // Removes up to `limit` packets from the head of link e into `out`.
  std::int64_t pop(LinkId e, std::int64_t limit, std::vector<Run>& out);

 private:
  std::vector<std::deque<Run>> queues_;
  std::vector<std::int64_t> totals_;
};

// Time-slotted packet simulation. Slot phases: arrivals, contention mask,
// Luby schedule, departures.
class Simulation {
 public:
  Simulation(const Instance& inst, PriorityVector z, SimConfig config);

  const SlotSchedule& step();

  int slot() const { return slot_; }
  const QueueState& queues() const { return queues_; }
  QueueState& mutable_queues() { return queues_; }
  const SlotSchedule& last_schedule() const { return schedule_; }
  const std::vector<std::uint8_t>& last_contending() const { return contending_; }
  const std::vector<std::int64_t>& last_departures() const { return departures_; }
  // Realized rate of link e in slot t; a pure function of (seed, e, t).
  std::int64_t realized_rate(LinkId e, int t) const;
  std::int64_t arrived() const { return arrived_; }
  std::int64_t delivered() const { return delivered_; }

  SimResult result(double wall_clock_s) const;

 private:
  const Instance& inst_;
  PriorityVector z_;
  SimConfig config_;
  std::vector<std::vector<LinkId>> next_hop_;  // [flow][link], -1 = destination
  std::vector<double> arrival_rate_;
  Engine arrival_engine_;
  Engine contention_engine_;
  std::vector<std::poisson_distribution<std::int64_t>> arrivals_;
  std::uint64_t fading_key_;
  QueueState queues_;
  std::optional<DutyWindow> window_;
  LubyWorkspace work_;
  SlotSchedule schedule_;
  std::vector<std::uint8_t> contending_;
  std::vector<std::int64_t> departures_;
  std::vector<QueueState::Run> moved_;
  std::vector<std::int64_t> scheduled_count_;
  std::vector<std::int64_t> contending_count_;
  std::vector<std::int64_t> joint_count_;
  std::vector<SlotSchedule> trace_;
  std::int64_t arrived_ = 0;
  std::int64_t delivered_ = 0;
  int slot_ = 0;
};

SimResult run_simulation(const Instance& inst, const PriorityVector& z, const SimConfig& config);

// Packs a result's contention statistics for analytic::duty_cycles.
ContentionMatrix empirical_contention(const SimResult& result);

// T rows of ceil(|E| / 8) bytes; bit e of a row is link e, little-endian
// within each byte.
void write_schedule_trace(const std::filesystem::path& path, std::span<const SlotSchedule> trace,
                          std::size_t num_links);
std::vector<SlotSchedule> read_schedule_trace(const std::filesystem::path& path,
                                              std::size_t num_links);

}  // namespace lubyndt::sim
