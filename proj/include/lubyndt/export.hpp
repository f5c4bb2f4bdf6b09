#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lubyndt/experiment.hpp"
#include "lubyndt/table.hpp"

namespace lubyndt::harness {

inline constexpr int kResultsSchemaVersion = 1;

// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string git_blob_hash(std::string_view content);

// Hash of the canonical (key-sorted, compact) JSON form of the spec.
std::string spec_hash(const ExperimentSpec& spec);

nlohmann::json make_manifest(const ExperimentSpec& spec,
                             const std::vector<std::pair<std::string, Table>>& tables);

// Writes <name> for every table plus manifest.json into `dir` (created if
// needed). Throws std::runtime_error naming the path on I/O failure.
void export_results(const std::filesystem::path& dir, const ExperimentSpec& spec,
                    const std::vector<std::pair<std::string, Table>>& tables);

}  // namespace lubyndt::harness
