#pragma once

// Reference computations used only by tests. None of these share code with the
// library routes they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace bumpwatch::oracle {

// Minimum cost over an explicit enumeration of every monotone warping path from
// (0,0) to (n-1,m-1). Exponential; fine for lengths up to ~8.
inline double dtw_paths(std::span<const double> a, std::span<const double> b) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = a.size(), m = b.size();
  struct Walker {
    std::span<const double> a, b;
    std::size_t n, m;
    double& best;
    void go(std::size_t i, std::size_t j, double acc) {
      acc = acc + std::abs(a[i] - b[j]);
      if (i == n - 1 && j == m - 1) {
        if (acc < best) best = acc;
        return;
      }
      if (i + 1 < n) go(i + 1, j, acc);
      if (j + 1 < m) go(i, j + 1, acc);
      if (i + 1 < n && j + 1 < m) go(i + 1, j + 1, acc);
    }
  };
  Walker w{a, b, n, m, best};
  // First cell: acc starts at 0, so the path sum is c00 + c1 + ... in path order.
  w.go(0, 0, 0.0);
  return best;
}

// Top-down memoized form of the warping recurrence, for sequences too long to
// enumerate. Shares nothing with the library's row-by-row loop.
inline double dtw_recursive(std::span<const double> a, std::span<const double> b) {
  const std::size_t m = b.size();
  std::vector<double> memo(a.size() * m, -1.0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> double {
    double& slot = memo[i * m + j];
    if (slot >= 0.0) return slot;
    const double c = std::abs(a[i] - b[j]);
    if (i == 0 && j == 0) return slot = c;
    double best = std::numeric_limits<double>::infinity();
    if (i > 0) best = std::min(best, self(self, i - 1, j));
    if (j > 0) best = std::min(best, self(self, i, j - 1));
    if (i > 0 && j > 0) best = std::min(best, self(self, i - 1, j - 1));
    return slot = best + c;
  };
  return rec(rec, a.size() - 1, m - 1);
}

// |H| of an order-n digital Butterworth low-pass obtained by bilinear transform with
// the cutoff pre-warped: the analog magnitude evaluated at the warped frequency.
inline double butterworth_magnitude(double f, double fc, double fs, int order) {
  const double ratio = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

// Amplitude of a sinusoid of known frequency via least-squares projection onto
// sin/cos over whole periods.
inline double sinusoid_amplitude(std::span<const double> x, double f, double fs) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * f * static_cast<double>(i) / fs;
    s += x[i] * std::sin(w);
    c += x[i] * std::cos(w);
  }
  return 2.0 * std::hypot(s, c) / static_cast<double>(x.size());
}

}  // namespace bumpwatch::oracle
