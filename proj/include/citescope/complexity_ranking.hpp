#pragma once

// Country x subfield complexity ranking: revealed comparative advantage,
// binary bipartite adjacency, and GENEPY scores from the leading eigenpairs
// of the zero-diagonal country and subfield proximity matrices.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "citescope/breakthrough_panel.hpp"
#include "citescope/matrix.hpp"
#include "citescope/symmetric_eigen.hpp"

namespace citescope {

struct RcaMatrix {
  YearRange window;
  BreakthroughClass kind = BreakthroughClass::Consolidating;
  std::vector<std::string> countries;
  std::vector<SubfieldId> subfields;
  Matrix values;
  std::vector<bool> zero_row;
  std::vector<bool> zero_col;
};

struct BinaryAdjacency {
  YearRange window;
  BreakthroughClass kind = BreakthroughClass::Consolidating;
  std::vector<std::string> countries;  // retained rows
  std::vector<SubfieldId> subfields;   // retained columns
  Matrix m;
  std::vector<std::string> pruned_countries;
  std::vector<SubfieldId> pruned_subfields;
};

inline RcaMatrix rca(const PanelMatrix& counts) {
  const Matrix& x = counts.counts;
  const std::size_t nc = x.rows(), ns = x.cols();
  std::vector<double> row(nc, 0.0), col(ns, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t s = 0; s < ns; ++s) {
      const double v = x(c, s);
      if (v < 0.0 || !std::isfinite(v)) throw ArgumentError("counts must be finite and non-negative");
      row[c] += v;
      col[s] += v;
      total += v;
    }
  if (!(total > 0.0)) throw ArgumentError("RCA of an all-zero matrix");

  RcaMatrix r{counts.window, counts.kind, counts.countries, counts.subfields, Matrix(nc, ns), {}, {}};
  r.zero_row.resize(nc);
  r.zero_col.resize(ns);
  for (std::size_t c = 0; c < nc; ++c) r.zero_row[c] = row[c] == 0.0;
  for (std::size_t s = 0; s < ns; ++s) r.zero_col[s] = col[s] == 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    if (r.zero_row[c]) continue;
    for (std::size_t s = 0; s < ns; ++s) {
      if (r.zero_col[s]) continue;
      r.values(c, s) = (x(c, s) / row[c]) / (col[s] / total);
    }
  }
  return r;
}

// 1 where RCA >= threshold, then all-zero rows and columns removed. Values
// within a relative 1e-12 below the threshold count as equal to it, so
// rounding in the share ratios cannot flip an exact tie.
inline BinaryAdjacency binarize(const RcaMatrix& r, double r_star = 1.0) {
  if (!(r_star > 0.0)) throw ArgumentError("RCA threshold must be positive");
  const double cut = r_star * (1.0 - 1e-12);
  const std::size_t nc = r.values.rows(), ns = r.values.cols();
  std::vector<bool> keep_row(nc, false), keep_col(ns, false);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t s = 0; s < ns; ++s)
      if (r.values(c, s) >= cut) keep_row[c] = keep_col[s] = true;

  BinaryAdjacency b;
  b.window = r.window;
  b.kind = r.kind;
  std::vector<std::size_t> rows, cols;
  for (std::size_t c = 0; c < nc; ++c) {
    if (keep_row[c]) {
      rows.push_back(c);
      b.countries.push_back(r.countries[c]);
    } else {
      b.pruned_countries.push_back(r.countries[c]);
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    if (keep_col[s]) {
      cols.push_back(s);
      b.subfields.push_back(r.subfields[s]);
    } else {
      b.pruned_subfields.push_back(r.subfields[s]);
    }
  }
  b.m = Matrix(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) b.m(i, j) = r.values(rows[i], cols[j]) >= cut ? 1.0 : 0.0;
  return b;
}

struct DegreeVectors {
  std::vector<double> diversity;        // k_c = Σ_s M_cs
  std::vector<double> adjusted_ubiquity;  // k'_s = Σ_c M_cs / k_c
};

inline DegreeVectors degree_vectors(const Matrix& m) {
  DegreeVectors d;
  d.diversity.assign(m.rows(), 0.0);
  d.adjusted_ubiquity.assign(m.cols(), 0.0);
  for (std::size_t c = 0; c < m.rows(); ++c)
    for (std::size_t s = 0; s < m.cols(); ++s) d.diversity[c] += m(c, s);
  for (std::size_t c = 0; c < m.rows(); ++c) {
    if (d.diversity[c] == 0.0) throw ArgumentError("adjacency has an all-zero row");
    for (std::size_t s = 0; s < m.cols(); ++s) d.adjusted_ubiquity[s] += m(c, s) / d.diversity[c];
  }
  for (double k : d.adjusted_ubiquity)
    if (k == 0.0) throw ArgumentError("adjacency has an all-zero column");
  return d;
}

inline DegreeVectors degree_vectors(const BinaryAdjacency& b) { return degree_vectors(b.m); }

enum class EigenSelection {
  Algebraic,  // r largest eigenvalues by value
  Magnitude,  // r largest by absolute value
};

struct GenepyOptions {
  int components = 2;  // r
  EigenSelection selection = EigenSelection::Algebraic;
  EigenOptions eigen{};
  // Eigenvalues closer than this (relative to the spectral radius) are one
  // degenerate eigenspace.
  double degeneracy = 1e-9;
  double tie_tolerance = 1e-9;  // relative; scores this close share a rank
};

struct GenepyResult {
  enum class Side { Countries, Subfields } side = Side::Countries;
  std::vector<std::string> labels;            // retained entities, input order
  std::vector<double> eigenvalues;            // selected λ_1..λ_r
  std::vector<std::vector<double>> eigenvectors;  // X_{·,i}, sign-normalized
  std::vector<std::size_t> multiplicity;      // size of each λ_i's eigenspace
  std::vector<double> residuals;              // ‖P x - λ x‖∞ per pair
  std::vector<double> scores;
  std::vector<std::size_t> rank;      // competition rank; tied scores share it
  std::vector<std::size_t> position;  // 1..n, ties broken by label order
  std::vector<std::string> pruned;    // ranked after every retained entity
  std::size_t pruned_rank = 0;
  int sweeps = 0;
};

// Numeric labels compare as numbers, everything else lexicographically.
inline bool label_less(const std::string& a, const std::string& b) {
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
  };
  if (digits(a) && digits(b) && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

namespace detail {

inline bool scores_tied(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline void assign_ranks(GenepyResult& g, double tol) {
  const std::size_t n = g.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Group near-equal scores first so the label tie-break applies within
  // each group regardless of rounding noise.
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return g.scores[a] > g.scores[b]; });
  std::vector<std::size_t> group(n);
  for (std::size_t i = 0, head = 0; i < n; ++i) {
    if (i > 0 && !scores_tied(g.scores[order[head]], g.scores[order[i]], tol)) head = i;
    group[order[i]] = head;
  }
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (group[a] != group[b]) return group[a] < group[b];
    return label_less(g.labels[a], g.labels[b]);
  });
  g.rank.assign(n, 0);
  g.position.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.position[order[i]] = i + 1;
    g.rank[order[i]] = group[order[i]] + 1;
  }
  g.pruned_rank = n + 1;
}

inline GenepyResult genepy_side(Matrix proximity, std::vector<std::string> labels,
                                std::vector<std::string> pruned, GenepyResult::Side side,
                                const GenepyOptions& opt) {
  const std::size_t n = proximity.rows();
  for (std::size_t i = 0; i < n; ++i) proximity(i, i) = 0.0;

  GenepyResult g;
  g.side = side;
  g.labels = std::move(labels);
  std::sort(pruned.begin(), pruned.end(), label_less);
  g.pruned = std::move(pruned);
  if (n == 0) {
    g.pruned_rank = 1;
    return g;
  }
  const auto eig = symmetric_eigen(proximity, opt.eigen);
  g.sweeps = eig.sweeps;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (opt.selection == EigenSelection::Magnitude) {
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return std::abs(eig.values[a]) > std::abs(eig.values[b]); });
  }
  const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(std::max(opt.components, 1)), n);
  double radius = 0.0;
  for (double l : eig.values) radius = std::max(radius, std::abs(l));
  const double close = opt.degeneracy * std::max(radius, 1e-300);

  // Squared components averaged over each selected eigenvalue's eigenspace;
  // for a simple eigenvalue this is X_{e,i}^2.
  std::vector<std::vector<double>> sq(r, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t k = order[i];
    const double lambda = eig.values[k];
    std::size_t mult = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(eig.values[j] - lambda) > close) continue;
      ++mult;
      for (std::size_t e = 0; e < n; ++e) sq[i][e] += eig.vectors(e, j) * eig.vectors(e, j);
    }
    for (double& x : sq[i]) x /= static_cast<double>(mult);
    g.eigenvalues.push_back(lambda);
    g.multiplicity.push_back(mult);
    std::vector<double> x(n);
    for (std::size_t e = 0; e < n; ++e) x[e] = eig.vectors(e, k);
    g.eigenvectors.push_back(std::move(x));
    g.residuals.push_back(eigen_residual(proximity, eig, k));
  }

  g.scores.assign(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    double weighted = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      weighted += g.eigenvalues[i] * sq[i][e];
      spread += g.eigenvalues[i] * g.eigenvalues[i] * sq[i][e];
    }
    g.scores[e] = weighted * weighted + 2.0 * spread;
  }
  assign_ranks(g, opt.tie_tolerance);
  return g;
}

}  // namespace detail

// Rationalized matrix A_cs = M_cs / (k_c k'_s).
inline Matrix rationalized(const Matrix& m) {
  const auto d = degree_vectors(m);
  Matrix a(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.rows(); ++c)
    for (std::size_t s = 0; s < m.cols(); ++s)
      a(c, s) = m(c, s) / (d.diversity[c] * d.adjusted_ubiquity[s]);
  return a;
}

struct GenepyPair {
  GenepyResult countries;
  GenepyResult subfields;
};

inline GenepyPair genepy_scores(const BinaryAdjacency& b, const GenepyOptions& opt = {}) {
  if (opt.components < 1) throw ArgumentError("need at least one eigenpair");
  GenepyPair out;
  std::vector<std::string> sub_labels, sub_pruned;
  for (auto s : b.subfields) sub_labels.push_back(std::to_string(s));
  for (auto s : b.pruned_subfields) sub_pruned.push_back(std::to_string(s));
  if (b.m.rows() == 0 || b.m.cols() == 0) {
    out.countries = detail::genepy_side(Matrix(), {}, b.pruned_countries, GenepyResult::Side::Countries, opt);
    out.subfields = detail::genepy_side(Matrix(), {}, sub_pruned, GenepyResult::Side::Subfields, opt);
    return out;
  }
  const Matrix a = rationalized(b.m);
  const Matrix at = a.transposed();
  out.countries = detail::genepy_side(multiply(a, at), b.countries, b.pruned_countries,
                                      GenepyResult::Side::Countries, opt);
  out.subfields = detail::genepy_side(multiply(at, a), std::move(sub_labels), std::move(sub_pruned),
                                      GenepyResult::Side::Subfields, opt);
  return out;
}

struct RankRow {
  std::string label;
  double score = 0.0;
  std::size_t rank = 0;
  std::size_t position = 0;
  bool tied = false;
  bool pruned = false;
};

// Entities by descending score (label order within ties), then the pruned
// entities sharing one trailing rank.
inline std::vector<RankRow> rank_table(const GenepyResult& g) {
  std::vector<RankRow> rows(g.labels.size());
  std::vector<std::size_t> per_rank(g.labels.size() + 2, 0);
  for (auto r : g.rank) ++per_rank[r];
  for (std::size_t e = 0; e < g.labels.size(); ++e) {
    rows[g.position[e] - 1] = {g.labels[e], g.scores[e], g.rank[e], g.position[e], per_rank[g.rank[e]] > 1, false};
  }
  for (std::size_t i = 0; i < g.pruned.size(); ++i) {
    rows.push_back({g.pruned[i], 0.0, g.pruned_rank, g.labels.size() + i + 1, g.pruned.size() > 1, true});
  }
  return rows;
}

}  // namespace citescope
