#pragma once

// Yearly breakthrough selection and the aggregations built on it: subfield
// time series and country x subfield panels per time window.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/impact_metrics.hpp"
#include "citescope/matrix.hpp"

namespace citescope {

struct BreakthroughRecord {
  WorkIndex work = 0;
  std::string id;
  Year year = 0;
  SubfieldId subfield = kUnlabeledSubfield;
  std::vector<std::string> countries;
  double nbnc = 0.0;
  double cd = 0.0;
  BreakthroughClass kind = BreakthroughClass::Consolidating;
};

struct Selection {
  std::vector<BreakthroughRecord> records;  // by year, then rank within year
  std::vector<Year> skipped_years;          // requested years with no scored work
};

// Number of works kept from a year of `n`: max(1, ceil(q n)). The small
// slack keeps q n that is integral in exact arithmetic from rounding up.
inline std::size_t selection_size(double q, std::size_t n) {
  if (n == 0) return 0;
  const double k = std::ceil(q * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, n);
}

// Top fraction `q` of each year by NBNC (ties by ascending work id), taken
// over all scored works of that year.
inline Selection select_breakthroughs(const CitationCorpus& corpus,
                                      const std::vector<ImpactScores>& scores, double q,
                                      std::optional<YearRange> years = std::nullopt) {
  if (!(q > 0.0 && q < 1.0)) throw ArgumentError("top fraction must lie in (0, 1)");
  std::map<Year, std::vector<const ImpactScores*>> by_year;
  for (const auto& s : scores) by_year[corpus.year(s.nbnc.work)].push_back(&s);

  Selection out;
  if (years) {
    for (Year y = years->first; y <= years->last; ++y) {
      if (!by_year.count(y)) out.skipped_years.push_back(y);
    }
  }
  for (auto& [year, group] : by_year) {
    if (years && !years->contains(year)) continue;
    std::sort(group.begin(), group.end(), [&](const ImpactScores* a, const ImpactScores* b) {
      if (a->nbnc.value != b->nbnc.value) return a->nbnc.value > b->nbnc.value;
      return corpus.id(a->nbnc.work) < corpus.id(b->nbnc.work);
    });
    const std::size_t k = selection_size(q, group.size());
    for (std::size_t i = 0; i < k; ++i) {
      const auto& s = *group[i];
      BreakthroughRecord r;
      r.work = s.nbnc.work;
      r.id = corpus.id(r.work);
      r.year = year;
      r.subfield = corpus.subfield(r.work);
      for (auto c : corpus.countries(r.work)) r.countries.emplace_back(c);
      r.nbnc = s.nbnc.value;
      r.cd = s.cd.value;
      r.kind = classify(s.cd);
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

struct SubfieldSeries {
  SubfieldId subfield = kUnlabeledSubfield;
  YearRange years;
  std::vector<std::uint32_t> breakthroughs;  // N^BT_s(t)
  std::vector<std::uint32_t> consolidating;  // N^CN_s(t)
  std::vector<std::uint32_t> disruptive;     // N^DI_s(t)
  std::vector<std::uint32_t> published;      // N_s(t), whole corpus
  std::vector<double> scaled_consolidating;
  std::vector<double> scaled_disruptive;
  std::vector<bool> no_publications;  // N_s(t) = 0; scaled values set to 0
};

struct SeriesSet {
  std::map<SubfieldId, SubfieldSeries> series;
  std::vector<std::uint32_t> unlabeled;  // selected records without a subfield, per year
};

inline SubfieldSeries& scaled_counts(SubfieldSeries& s) {
  const std::size_t n = s.published.size();
  s.scaled_consolidating.assign(n, 0.0);
  s.scaled_disruptive.assign(n, 0.0);
  s.no_publications.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (s.published[t] == 0) {
      s.no_publications[t] = true;
      continue;
    }
    s.scaled_consolidating[t] = static_cast<double>(s.consolidating[t]) / s.published[t];
    s.scaled_disruptive[t] = static_cast<double>(s.disruptive[t]) / s.published[t];
  }
  return s;
}

// Per-subfield yearly counts over `years`. Subfields are those present in
// the corpus or the records, restricted to `allowlist` when it is non-empty.
inline SeriesSet subfield_series(const std::vector<BreakthroughRecord>& records,
                                 const CitationCorpus& corpus, YearRange years,
                                 const std::set<SubfieldId>& allowlist = {}) {
  if (years.empty()) throw ArgumentError("empty year range");
  const auto width = static_cast<std::size_t>(years.size());
  SeriesSet out;
  out.unlabeled.assign(width, 0);
  auto slot = [&](SubfieldId s) -> SubfieldSeries* {
    if (s == kUnlabeledSubfield) return nullptr;
    if (!allowlist.empty() && !allowlist.count(s)) return nullptr;
    auto [it, fresh] = out.series.try_emplace(s);
    if (fresh) {
      it->second.subfield = s;
      it->second.years = years;
      it->second.breakthroughs.assign(width, 0);
      it->second.consolidating.assign(width, 0);
      it->second.disruptive.assign(width, 0);
      it->second.published.assign(width, 0);
    }
    return &it->second;
  };
  for (Year y = years.first; y <= years.last; ++y) {
    for (WorkIndex w : corpus.works_in_year(y)) {
      if (auto* s = slot(corpus.subfield(w))) ++s->published[y - years.first];
    }
  }
  for (const auto& r : records) {
    if (!years.contains(r.year)) continue;
    const auto t = static_cast<std::size_t>(r.year - years.first);
    if (r.subfield == kUnlabeledSubfield) {
      ++out.unlabeled[t];
      continue;
    }
    auto* s = slot(r.subfield);
    if (!s) continue;
    ++s->breakthroughs[t];
    ++(r.kind == BreakthroughClass::Disruptive ? s->disruptive[t] : s->consolidating[t]);
  }
  for (auto& [id, s] : out.series) scaled_counts(s);
  return out;
}

// Consecutive windows of `width` years covering [first, last]; the final
// window may be shorter.
inline std::vector<YearRange> window_grid(Year first, Year last, int width = 10) {
  if (width <= 0) throw ArgumentError("window width must be positive");
  std::vector<YearRange> out;
  for (Year y = first; y <= last; y += width) out.push_back({y, std::min(last, y + width - 1)});
  return out;
}

struct PanelMatrix {
  YearRange window;
  BreakthroughClass kind = BreakthroughClass::Consolidating;
  std::vector<std::string> countries;  // rows
  std::vector<SubfieldId> subfields;   // columns
  Matrix counts;
  std::size_t unattributed = 0;    // records with no country
  std::size_t outside_columns = 0;  // records whose subfield is not a column
};

// Full counting: every country listed on a record gets one unit of credit.
inline PanelMatrix country_subfield_counts(const std::vector<BreakthroughRecord>& records,
                                           YearRange window, BreakthroughClass kind,
                                           std::vector<std::string> countries,
                                           std::vector<SubfieldId> subfields) {
  if (window.empty()) throw ArgumentError("empty window");
  std::sort(countries.begin(), countries.end());
  countries.erase(std::unique(countries.begin(), countries.end()), countries.end());
  std::sort(subfields.begin(), subfields.end());
  subfields.erase(std::unique(subfields.begin(), subfields.end()), subfields.end());

  PanelMatrix p;
  p.window = window;
  p.kind = kind;
  p.counts = Matrix(countries.size(), subfields.size());
  for (const auto& r : records) {
    if (r.kind != kind || !window.contains(r.year)) continue;
    auto col = std::lower_bound(subfields.begin(), subfields.end(), r.subfield);
    if (col == subfields.end() || *col != r.subfield) {
      ++p.outside_columns;
      continue;
    }
    if (r.countries.empty()) {
      ++p.unattributed;
      continue;
    }
    for (const auto& c : r.countries) {
      auto row = std::lower_bound(countries.begin(), countries.end(), c);
      if (row == countries.end() || *row != c) continue;
      p.counts(static_cast<std::size_t>(row - countries.begin()),
               static_cast<std::size_t>(col - subfields.begin())) += 1.0;
    }
  }
  p.countries = std::move(countries);
  p.subfields = std::move(subfields);
  return p;
}

}  // namespace citescope
