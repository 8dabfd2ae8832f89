#pragma once

// Comparison statistics against external country indicators.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "citescope/common.hpp"

namespace citescope {

struct SpearmanResult {
  double rho = 0.0;
  std::size_t common = 0;
  std::vector<std::string> only_a;  // keys missing from b
  std::vector<std::string> only_b;
};

// Ranks 1..n with tied values sharing their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
    i = j;
  }
  return r;
}

// Spearman correlation on the keys both inputs share: Pearson correlation of
// average ranks.
inline SpearmanResult spearman(const std::map<std::string, double>& a,
                               const std::map<std::string, double>& b) {
  SpearmanResult out;
  std::vector<double> xa, xb;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) {
      out.only_a.push_back(k);
      continue;
    }
    xa.push_back(v);
    xb.push_back(it->second);
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) out.only_b.push_back(k);
  out.common = xa.size();
  if (out.common < 3) throw InsufficientDataError("spearman needs at least 3 common entities");

  const auto ra = average_ranks(xa), rb = average_ranks(xb);
  const double n = static_cast<double>(out.common);
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) throw InsufficientDataError("spearman of a constant ranking");
  out.rho = sab / std::sqrt(saa * sbb);
  return out;
}

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // sum of squared residuals in log space
  std::size_t points = 0;
};

// Ordinary least squares of ln y on ln x; y ≈ prefactor * x^exponent.
inline PowerLawFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("x and y differ in length");
  if (x.size() < 3) throw InsufficientDataError("power-law fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("power-law fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("power-law fit needs at least two distinct x values");
  PowerLawFit f;
  f.points = lx.size();
  f.exponent = sxy / sxx;
  const double intercept = my - f.exponent * mx;
  f.prefactor = std::exp(intercept);
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (intercept + f.exponent * lx[i]);
    f.residual += e * e;
  }
  return f;
}

// One value per (country, year) for an external indicator.
struct ExternalIndicator {
  std::map<std::string, std::map<Year, double>> values;

  void set(const std::string& country, Year year, double v) { values[country][year] = v; }

  std::map<std::string, double> in_year(Year y) const {
    std::map<std::string, double> out;
    for (const auto& [c, series] : values) {
      if (auto it = series.find(y); it != series.end()) out[c] = it->second;
    }
    return out;
  }

  std::vector<Year> years() const {
    std::vector<Year> out;
    for (const auto& [c, series] : values)
      for (const auto& [y, v] : series) out.push_back(y);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct GerdMean {
  double value = 0.0;
  double coverage = 0.0;  // fraction of window years with both inputs
};

// ⟨GERD⟩_c: mean over the window of R&D share (percent of GDP) times GDP.
// Years missing either input are skipped.
inline std::map<std::string, GerdMean> gerd_means(const ExternalIndicator& rd_percent,
                                                  const ExternalIndicator& gdp, YearRange window) {
  std::map<std::string, GerdMean> out;
  for (const auto& [c, rd] : rd_percent.values) {
    auto g = gdp.values.find(c);
    if (g == gdp.values.end()) continue;
    double sum = 0.0;
    int n = 0;
    for (Year y = window.first; y <= window.last; ++y) {
      auto a = rd.find(y);
      auto b = g->second.find(y);
      if (a == rd.end() || b == g->second.end()) continue;
      sum += a->second / 100.0 * b->second;
      ++n;
    }
    if (n == 0) continue;
    out[c] = {sum / n, static_cast<double>(n) / window.size()};
  }
  return out;
}

}  // namespace citescope
