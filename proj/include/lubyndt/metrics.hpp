#pragma once

#include <optional>
#include <span>
#include <vector>

namespace lubyndt::metrics {

// Sample Pearson correlation; nullopt when either input has zero variance.
// Throws std::invalid_argument on length mismatch or fewer than two points.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

double rmse(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);

// Linear interpolation between closest ranks, q in [0, 100].
double percentile(std::vector<double> values, double q);

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

}  // namespace lubyndt::metrics
