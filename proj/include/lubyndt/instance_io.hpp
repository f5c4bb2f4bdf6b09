#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "lubyndt/netgen.hpp"
#include "lubyndt/ndt.hpp"
#include "lubyndt/optimizer.hpp"
#include "lubyndt/simulator.hpp"

namespace lubyndt::io {

inline constexpr int kInstanceSchemaVersion = 1;

// Fields: schema_version, nodes, links, conflicts, flows, lambda, rates, beta, seeds.
nlohmann::json instance_to_json(const Instance& inst);
// Throws std::invalid_argument naming the missing or malformed field.
Instance instance_from_json(const nlohmann::json& j);

// Fields: duty_cycles, terminal_queues, marginal_b, joint_b ("a-b" keyed),
// wall_clock_s, config_echo.
nlohmann::json sim_result_to_json(const sim::SimResult& r, const ConflictGraph& g);

// Fields: z_tilde, x_tilde, gating {window, factor}, loss_trajectory.
nlohmann::json policy_to_json(const opt::PolicyBundle& p);
opt::PolicyBundle policy_from_json(const nlohmann::json& j);

// Same duty_cycles field as a simulation result, plus overload_index and an
// optional per-iteration trace.
nlohmann::json prediction_to_json(const ndt::NdtResult& r, std::span<const double> overload);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lubyndt::io
