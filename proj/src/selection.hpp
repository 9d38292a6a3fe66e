#pragma once

// Internal helpers shared by the grid searches.

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>
#include <vector>

#include "proxi/errors.hpp"

namespace proxi::detail {

/// Index of the smallest finite score; near-ties (relative 1e-12) resolve to
/// the larger grid value. Throws NumericalError if nothing is finite.
inline std::size_t argmin_prefer_larger(const std::vector<double>& grid,
                                        const std::vector<double>& scores, const char* who) {
  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(scores[i])) continue;
    if (best == grid.size()) {
      best = i;
      continue;
    }
    const double tol = 1e-12 * std::max(std::abs(scores[best]), std::numeric_limits<double>::min());
    if (scores[i] < scores[best] - tol ||
        (std::abs(scores[i] - scores[best]) <= tol && grid[i] > grid[best])) {
      best = i;
    }
  }
  if (best == grid.size()) {
    throw NumericalError(std::string(who) + ": every grid point produced a non-finite score");
  }
  return best;
}

inline void require_grid(const std::vector<double>& grid, const char* who) {
  if (grid.empty()) throw InvalidArgument(std::string(who) + ": empty grid");
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InvalidArgument(std::string(who) + ": grid values must be positive and finite");
    }
  }
}

}  // namespace proxi::detail
