#include "lubyndt/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace lubyndt::sim {

void GatingPolicy::validate(std::size_t num_links) const {
  if (window < 1) throw std::invalid_argument("gating.window must be >= 1");
  if (!(factor > 0.0)) throw std::invalid_argument("gating.factor must be positive");
  if (target.size() != num_links) {
    throw std::invalid_argument("gating.target length does not match the link count");
  }
}

void luby_schedule(const ConflictGraph& g, std::span<const double> z,
                   std::span<const std::uint8_t> contending, int rounds, Engine& engine,
                   LubyWorkspace& work, SlotSchedule& out) {
  if (rounds < 1) throw std::invalid_argument("luby_schedule: rounds must be >= 1");
  const auto n = g.num_links();
  out.assign(n, 0);
  if (work.draw.size() != n) {
    work.draw.assign(n, 0.0);
    work.undecided.assign(n, 0);
  }
  work.pending.clear();
  for (std::size_t e = 0; e < n; ++e) {
    if (contending[e]) {
      work.pending.push_back(static_cast<LinkId>(e));
      work.undecided[e] = 1;
    }
  }

  for (int m = 0; m < rounds && !work.pending.empty(); ++m) {
    for (auto e : work.pending) work.draw[e] = uniform01(engine) * z[e];
    work.winners.clear();
    for (auto e : work.pending) {
      const double mine = work.draw[e];
      bool wins = true;
      for (auto i : g.neighbors_of(e)) {
        if (work.draw[i] >= mine) {
          wins = false;
          break;
        }
      }
      if (wins) work.winners.push_back(e);
    }
    for (auto w : work.winners) {
      out[w] = 1;
      work.undecided[w] = 0;
    }
    // Mute messages: neighbors of winners quit with s = 0.
    for (auto w : work.winners) {
      for (auto i : g.neighbors_of(w)) work.undecided[i] = 0;
    }
    for (auto e : work.pending) work.draw[e] = 0.0;
    std::erase_if(work.pending, [&](LinkId e) { return !work.undecided[e]; });
  }
  for (auto e : work.pending) work.undecided[e] = 0;
}

SlotSchedule luby_schedule(const ConflictGraph& g, const PriorityVector& z,
                           std::span<const std::uint8_t> contending, int rounds, Engine& engine) {
  LubyWorkspace work;
  SlotSchedule out;
  luby_schedule(g, z.values(), contending, rounds, engine, work, out);
  return out;
}

bool is_independent_set(const ConflictGraph& g, const SlotSchedule& s) {
  for (const auto& edge : g.edges) {
    if (s[edge.a] && s[edge.b]) return false;
  }
  return true;
}

std::vector<double> windowed_duty_cycle(std::span<const SlotSchedule> history, int window) {
  if (window < 1) throw std::invalid_argument("windowed_duty_cycle: window must be >= 1");
  if (history.empty()) return {};
  const auto n = history.front().size();
  std::vector<double> out(n, 0.0);
  const auto span = std::min<std::size_t>(window, history.size());
  for (auto t = history.size() - span; t < history.size(); ++t) {
    for (std::size_t e = 0; e < n; ++e) out[e] += history[t][e];
  }
  for (auto& v : out) v /= static_cast<double>(span);
  return out;
}

DutyWindow::DutyWindow(std::size_t num_links, int window)
    : window_(window), ring_(window, SlotSchedule(num_links, 0)), counts_(num_links, 0) {
  if (window < 1) throw std::invalid_argument("DutyWindow: window must be >= 1");
}

void DutyWindow::push(const SlotSchedule& s) {
  auto& slot = ring_[head_];
  if (filled_ == static_cast<std::size_t>(window_)) {
    for (std::size_t e = 0; e < counts_.size(); ++e) counts_[e] -= slot[e];
  } else {
    ++filled_;
  }
  for (std::size_t e = 0; e < counts_.size(); ++e) counts_[e] += s[e];
  slot = s;
  head_ = (head_ + 1) % ring_.size();
}

double DutyWindow::duty_cycle(LinkId e) const {
  if (filled_ == 0) return 0.0;
  return static_cast<double>(counts_[e]) / static_cast<double>(filled_);
}

std::int64_t QueueState::total() const {
  std::int64_t sum = 0;
  for (auto v : totals_) sum += v;
  return sum;
}

std::int64_t QueueState::count(LinkId e, FlowId f) const {
  std::int64_t sum = 0;
  for (const auto& run : queues_[e]) {
    if (run.flow == f) sum += run.count;
  }
  return sum;
}

void QueueState::push(LinkId e, FlowId f, std::int64_t count) {
  if (count <= 0) return;
  auto& q = queues_[e];
  if (!q.empty() && q.back().flow == f) {
    q.back().count += count;
  } else {
    q.push_back({f, count});
  }
  totals_[e] += count;
}

std::int64_t QueueState::pop(LinkId e, std::int64_t limit, std::vector<Run>& out) {
  auto& q = queues_[e];
  std::int64_t taken = 0;
  while (taken < limit && !q.empty()) {
    auto& head = q.front();
    const auto take = std::min(head.count, limit - taken);
    out.push_back({head.flow, take});
    taken += take;
    head.count -= take;
    if (head.count == 0) q.pop_front();
  }
  totals_[e] -= taken;
  return taken;
}

Simulation::Simulation(const Instance& inst, PriorityVector z, SimConfig config)
    : inst_(inst),
      z_(std::move(z)),
      config_(std::move(config)),
      arrival_engine_(derive_seed(config_.seed, "arrivals")),
      contention_engine_(derive_seed(config_.seed, "contention")),
      fading_key_(derive_seed(config_.seed, "fading")),
      queues_(inst.num_links()) {
  const auto n = inst.num_links();
  if (z_.size() != n) throw std::invalid_argument("Simulation: priority length != link count");
  if (config_.rounds < 1) throw std::invalid_argument("Simulation: rounds must be >= 1");
  if (config_.horizon < 1) throw std::invalid_argument("Simulation: horizon must be >= 1");
  if (config_.rate_sigma < 0.0) throw std::invalid_argument("Simulation: rate_sigma must be >= 0");
  if (config_.gating) {
    config_.gating->validate(n);
    window_.emplace(n, config_.gating->window);
  }

  const auto& flows = inst.flows;
  next_hop_.assign(flows.size(), std::vector<LinkId>(n, -2));
  for (const auto& f : flows.flows) {
    if (f.path.empty()) throw std::invalid_argument("Simulation: flow without a path");
    for (std::size_t k = 0; k < f.path.size(); ++k) {
      next_hop_[f.id][f.path[k]] = k + 1 < f.path.size() ? f.path[k + 1] : -1;
    }
    const double rate = flows.arrival_rate(f);
    arrival_rate_.push_back(rate);
    arrivals_.emplace_back(rate > 0.0 ? rate : 1.0);
  }
  schedule_.assign(n, 0);
  contending_.assign(n, 0);
  departures_.assign(n, 0);
  scheduled_count_.assign(n, 0);
  contending_count_.assign(n, 0);
  joint_count_.assign(inst.conflicts.num_edges(), 0);
}

std::int64_t Simulation::realized_rate(LinkId e, int t) const {
  const double draw = inst_.rates[e] + config_.rate_sigma * counter_normal(fading_key_, e, t);
  return std::max<std::int64_t>(0, std::llround(draw));
}

const SlotSchedule& Simulation::step() {
  const auto n = inst_.num_links();
  const auto& g = inst_.conflicts;
  const int t = slot_;

  // Arrivals join the first link of their flow's path.
  for (const auto& f : inst_.flows.flows) {
    if (!(arrival_rate_[f.id] > 0.0)) continue;
    const auto k = arrivals_[f.id](arrival_engine_);
    if (k > 0) {
      queues_.push(f.path.front(), f.id, k);
      arrived_ += k;
    }
  }

  // A link contends iff it has backlog and, under gating, its recent duty
  // cycle does not exceed factor * target.
  for (std::size_t e = 0; e < n; ++e) {
    bool c = queues_.total(static_cast<LinkId>(e)) > 0;
    if (c && window_) {
      c = window_->duty_cycle(static_cast<LinkId>(e)) <=
          config_.gating->factor * config_.gating->target[e];
    }
    contending_[e] = c;
    contending_count_[e] += c;
  }
  for (std::size_t e = 0; e < n; ++e) {
    if (!contending_[e]) continue;
    const auto nbrs = g.neighbors_of(static_cast<LinkId>(e));
    const auto edges = g.edges_of(static_cast<LinkId>(e));
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (nbrs[k] > static_cast<LinkId>(e) && contending_[nbrs[k]]) ++joint_count_[edges[k]];
    }
  }

  luby_schedule(g, z_.values(), contending_, config_.rounds, contention_engine_, work_, schedule_);

  // Departures: scheduled links forward min(q_e, realized rate) packets.
  std::fill(departures_.begin(), departures_.end(), 0);
  for (std::size_t e = 0; e < n; ++e) {
    if (!schedule_[e]) continue;
    ++scheduled_count_[e];
    const auto link = static_cast<LinkId>(e);
    moved_.clear();
    departures_[e] = queues_.pop(link, realized_rate(link, t), moved_);
    for (const auto& run : moved_) {
      const auto next = next_hop_[run.flow][e];
      if (next == -1) {
        delivered_ += run.count;
      } else {
        queues_.push(next, run.flow, run.count);
      }
    }
  }

  if (window_) window_->push(schedule_);
  if (config_.record_trace) trace_.push_back(schedule_);
  if (config_.check_invariants) {
    if (!is_independent_set(g, schedule_)) {
      throw std::logic_error("slot " + std::to_string(t) + ": schedule is not an independent set");
    }
    if (arrived_ != queues_.total() + delivered_) {
      throw std::logic_error("slot " + std::to_string(t) + ": packet conservation violated");
    }
  }
  ++slot_;
  return schedule_;
}

SimResult Simulation::result(double wall_clock_s) const {
  SimResult r;
  const auto n = inst_.num_links();
  const double slots = slot_ > 0 ? static_cast<double>(slot_) : 1.0;
  r.duty_cycles.resize(n);
  r.marginal_b.resize(n);
  r.terminal_queues.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    r.duty_cycles[e] = scheduled_count_[e] / slots;
    r.marginal_b[e] = contending_count_[e] / slots;
    r.terminal_queues[e] = queues_.total(static_cast<LinkId>(e));
  }
  r.joint_b.resize(joint_count_.size());
  for (std::size_t k = 0; k < joint_count_.size(); ++k) r.joint_b[k] = joint_count_[k] / slots;
  r.wall_clock_s = wall_clock_s;
  r.horizon = slot_;
  r.rounds = config_.rounds;
  r.rate_sigma = config_.rate_sigma;
  r.seed = config_.seed;
  if (config_.gating) {
    r.gated = true;
    r.gating_window = config_.gating->window;
    r.gating_factor = config_.gating->factor;
  }
  r.arrived = arrived_;
  r.delivered = delivered_;
  r.trace = trace_;
  return r;
}

SimResult run_simulation(const Instance& inst, const PriorityVector& z, const SimConfig& config) {
  Simulation simulation(inst, z, config);
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < config.horizon; ++t) simulation.step();
  const auto stop = std::chrono::steady_clock::now();
  return simulation.result(std::chrono::duration<double>(stop - start).count());
}

ContentionMatrix empirical_contention(const SimResult& result) {
  if (result.horizon < 1) throw std::invalid_argument("empirical_contention: empty run");
  return {result.marginal_b, result.joint_b};
}

void write_schedule_trace(const std::filesystem::path& path, std::span<const SlotSchedule> trace,
                          std::size_t num_links) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto row_bytes = (num_links + 7) / 8;
  std::vector<char> row(row_bytes);
  for (const auto& s : trace) {
    std::fill(row.begin(), row.end(), 0);
    for (std::size_t e = 0; e < num_links; ++e) {
      if (s[e]) row[e / 8] = static_cast<char>(row[e / 8] | (1u << (e % 8)));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SlotSchedule> read_schedule_trace(const std::filesystem::path& path,
                                              std::size_t num_links) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto row_bytes = (num_links + 7) / 8;
  std::vector<SlotSchedule> trace;
  std::vector<char> row(row_bytes);
  while (in.read(row.data(), static_cast<std::streamsize>(row_bytes))) {
    SlotSchedule s(num_links, 0);
    for (std::size_t e = 0; e < num_links; ++e) {
      s[e] = (static_cast<unsigned char>(row[e / 8]) >> (e % 8)) & 1u;
    }
    trace.push_back(std::move(s));
  }
  return trace;
}

}  // namespace lubyndt::sim
