#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lubyndt {

// A CSV table: header plus string cells. Numbers are written in the shortest
// form that parses back to the same double.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Table&) const = default;
};

std::string format_number(double v);
std::string format_number(std::int64_t v);
std::string format_optional(const std::optional<double>& v);
std::optional<double> parse_optional_double(std::string_view cell);

std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);

// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

}  // namespace lubyndt
