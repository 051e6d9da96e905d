#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bumpwatch/error.hpp"

namespace bumpwatch {

struct DtwConfig {
  // Sakoe-Chiba half-width in samples; unconstrained when empty.
  std::optional<std::size_t> window;
};

namespace detail {

inline void check_dtw_inputs(std::span<const double> a, std::span<const double> b,
                             const DtwConfig& cfg) {
  if (a.empty() || b.empty()) throw InputError("dtw: sequences must be nonempty");
  for (double v : a)
    if (!std::isfinite(v)) throw InputError("dtw: non-finite value");
  for (double v : b)
    if (!std::isfinite(v)) throw InputError("dtw: non-finite value");
  if (cfg.window) {
    if (*cfg.window < 1) throw ConfigError("dtw: window must be at least 1");
    const std::size_t skew = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    if (skew > *cfg.window) throw ConfigError("dtw: window too narrow to reach the end cell");
  }
}

inline bool in_band(std::size_t i, std::size_t j, const DtwConfig& cfg) noexcept {
  if (!cfg.window) return true;
  return (i > j ? i - j : j - i) <= *cfg.window;
}

}  // namespace detail

// Cumulative |a_i - b_j| cost along the cheapest warping path with unit steps
// (i-1,j), (i,j-1), (i-1,j-1). Not normalized by path length. Two rolling rows.
inline double dtw_distance(std::span<const double> a, std::span<const double> b,
                           const DtwConfig& cfg = {}) {
  detail::check_dtw_inputs(a, b, cfg);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t m = b.size();
  std::vector<double> prev(m, inf), cur(m, inf);

  for (std::size_t i = 0; i < a.size(); ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    for (std::size_t j = 0; j < m; ++j) {
      if (!detail::in_band(i, j, cfg)) continue;
      const double cost = std::abs(a[i] - b[j]);
      if (i == 0 && j == 0) {
        cur[j] = cost;
        continue;
      }
      double best = inf;
      if (i > 0) best = std::min(best, prev[j]);
      if (j > 0) best = std::min(best, cur[j - 1]);
      if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      cur[j] = best + cost;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

// Full cumulative-cost lattice, row-major |a| x |b|. Debugging aid only.
inline std::vector<double> dtw_cost_matrix(std::span<const double> a, std::span<const double> b,
                                           const DtwConfig& cfg = {}) {
  detail::check_dtw_inputs(a, b, cfg);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> d(n * m, inf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!detail::in_band(i, j, cfg)) continue;
      const double cost = std::abs(a[i] - b[j]);
      if (i == 0 && j == 0) {
        at(i, j) = cost;
        continue;
      }
      double best = inf;
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      at(i, j) = best + cost;
    }
  }
  return d;
}

}  // namespace bumpwatch
