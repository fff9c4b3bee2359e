#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prigp {

/// Axis-aligned compact domain [lower_j, upper_j] for j = 0..m-1.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t j) const { return upper[j] - lower[j]; }

  /// Throws ConfigError unless both bounds have equal size >= 1 and upper > lower.
  void validate() const;

  bool contains(std::span<const double> x) const;
};

}  // namespace prigp
