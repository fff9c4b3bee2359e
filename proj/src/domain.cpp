#include "prigp/domain.hpp"

#include <cmath>
#include <string>

#include "prigp/error.hpp"

namespace prigp {

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw ConfigError("domain bounds must be non-empty and of equal length");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(upper[j] > lower[j])) {
      throw ConfigError("domain dimension " + std::to_string(j) + " needs finite upper > lower");
    }
  }
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] >= lower[j] && x[j] <= upper[j])) return false;
  }
  return true;
}

}  // namespace prigp
