#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lubyndt {

// Per-link contention priorities z_e > 0. A link draws U(0, z_e) when it
// contends, so only ratios between neighbors matter.
class PriorityVector {
 public:
  PriorityVector() = default;

  explicit PriorityVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t e = 0; e < values_.size(); ++e) {
      if (!(values_[e] > 0.0) || !std::isfinite(values_[e])) {
        throw std::invalid_argument("priority of link " + std::to_string(e) +
                                    " must be positive and finite");
      }
    }
  }

  static PriorityVector uniform(std::size_t num_links, double value = 1.0) {
    return PriorityVector(std::vector<double>(num_links, value));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t e) const { return values_[e]; }
  std::span<const double> values() const { return values_; }

  bool operator==(const PriorityVector&) const = default;

 private:
  std::vector<double> values_;
};

}  // namespace lubyndt
