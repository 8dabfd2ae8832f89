#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "citescope/common.hpp"

namespace citescope {

// One sample of a subfield's phase trajectory: scaled consolidating and
// disruptive breakthrough counts.
struct PhasePoint {
  double consolidating = 0.0;
  double disruptive = 0.0;
  bool operator==(const PhasePoint&) const = default;
};

enum class DtwCost {
  Euclidean,     // one alignment, Euclidean distance between 2-D points
  PerComponent,  // independent 1-D alignments per component, summed
};

namespace detail {

template <class Cost>
double dtw_table(std::size_t n, std::size_t m, Cost&& cost) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = cost(i - 1, j - 1) + std::min({prev[j - 1], prev[j], cur[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace detail

// Unconstrained dynamic time warping: match/insert/delete steps, no window,
// no path-length normalization.
inline double dtw_distance(std::span<const PhasePoint> a, std::span<const PhasePoint> b,
                           DtwCost cost = DtwCost::Euclidean) {
  if (a.empty() || b.empty()) throw ArgumentError("dtw of an empty trajectory");
  if (cost == DtwCost::Euclidean) {
    return detail::dtw_table(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
      return std::hypot(a[i].consolidating - b[j].consolidating, a[i].disruptive - b[j].disruptive);
    });
  }
  const double cn = detail::dtw_table(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
    return std::abs(a[i].consolidating - b[j].consolidating);
  });
  const double di = detail::dtw_table(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
    return std::abs(a[i].disruptive - b[j].disruptive);
  });
  return cn + di;
}

}  // namespace citescope
