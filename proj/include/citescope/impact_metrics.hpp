#pragma once

// Network-normalized citation score (NBNC) and the CD disruption index.

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "citescope/corpus.hpp"

namespace citescope {

// Which year γ^t is read from when normalizing by a co-cited work.
enum class CocitedAge {
  OwnAge,         // t years after the co-cited work's own publication
  FocalCalendar,  // the calendar year pub_year(focal) + t
};

struct MetricOptions {
  int horizon = 10;
  CocitationSemantics semantics = CocitationSemantics::Multiset;
  CocitedAge age = CocitedAge::OwnAge;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct NbncScore {
  WorkIndex work = 0;
  int horizon = 0;
  double value = 0.0;
  std::vector<double> yearly_terms;  // ĉ_t, t = 0..horizon
  bool truncated_horizon = false;    // focal year + horizon past the corpus end
};

struct CdScore {
  WorkIndex work = 0;
  int horizon = 0;
  double value = 0.0;
  std::uint64_t c_x = 0;     // citers ignoring every reference of the focal
  std::uint64_t c_y = 0;     // citers also citing a reference
  std::uint64_t c_total = 0;
  std::uint64_t c_refs = 0;  // works citing a reference but not the focal
  bool zero_denominator = false;
};

struct ImpactScores {
  NbncScore nbnc;
  CdScore cd;
};

inline BreakthroughClass classify(const CdScore& cd) {
  return cd.value > 0.0 ? BreakthroughClass::Disruptive : BreakthroughClass::Consolidating;
}

// Precomputed own-age citation counts γ^t(w) for every work, t = 0..horizon.
class GammaTable {
 public:
  GammaTable(const CitationCorpus& corpus, int horizon)
      : width_(static_cast<std::size_t>(horizon) + 1), counts_(corpus.size() * width_, 0) {
    for (WorkIndex w = 0; w < corpus.size(); ++w) {
      const Year y0 = corpus.year(w);
      for (WorkIndex c : corpus.citers(w)) {
        const Year dt = corpus.year(c) - y0;
        if (dt >= 0 && static_cast<std::size_t>(dt) < width_) ++counts_[w * width_ + dt];
      }
    }
  }
  std::uint32_t operator()(WorkIndex w, int t) const { return counts_[w * width_ + t]; }

 private:
  std::size_t width_;
  std::vector<std::uint32_t> counts_;
};

namespace detail {

inline std::uint32_t citations_in_year(const CitationCorpus& corpus, WorkIndex w, Year y) {
  std::uint32_t n = 0;
  for (WorkIndex c : corpus.citers(w)) n += corpus.year(c) == y;
  return n;
}

// gamma_at(j, t, calendar_year) supplies the normalizing citation count of a
// co-cited work.
template <class GammaAt>
NbncScore nbnc_impl(const CitationCorpus& corpus, WorkIndex focal, const MetricOptions& opt,
                    GammaAt&& gamma_at) {
  const int T = opt.horizon;
  const Year y0 = corpus.year(focal);
  NbncScore s;
  s.work = focal;
  s.horizon = T;
  s.yearly_terms.assign(static_cast<std::size_t>(T) + 1, 0.0);
  s.truncated_horizon = corpus.empty() || y0 + T > corpus.observed_years().last;

  std::vector<std::uint64_t> cites(s.yearly_terms.size(), 0);
  std::vector<std::uint64_t> bag_size(s.yearly_terms.size(), 0);
  std::vector<std::uint64_t> denom(s.yearly_terms.size(), 0);
  // Set semantics needs the distinct members per offset.
  std::vector<std::vector<WorkIndex>> distinct;
  if (opt.semantics == CocitationSemantics::Set) distinct.resize(s.yearly_terms.size());

  for (WorkIndex c : corpus.citers(focal)) {
    const Year dt = corpus.year(c) - y0;
    if (dt < 0 || dt > T) continue;
    ++cites[dt];
    for (WorkIndex r : corpus.references(c)) {
      if (r == focal) continue;
      if (opt.semantics == CocitationSemantics::Set) {
        distinct[dt].push_back(r);
      } else {
        ++bag_size[dt];
        denom[dt] += gamma_at(r, static_cast<int>(dt), y0 + dt);
      }
    }
  }
  if (opt.semantics == CocitationSemantics::Set) {
    for (std::size_t t = 0; t < distinct.size(); ++t) {
      auto& d = distinct[t];
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
      bag_size[t] = d.size();
      for (WorkIndex r : d) denom[t] += gamma_at(r, static_cast<int>(t), y0 + static_cast<Year>(t));
    }
  }

  for (std::size_t t = 0; t < s.yearly_terms.size(); ++t) {
    if (cites[t] == 0 || denom[t] == 0) continue;
    s.yearly_terms[t] = static_cast<double>(bag_size[t] * cites[t]) / static_cast<double>(denom[t]);
  }
  for (double term : s.yearly_terms) s.value += term;
  return s;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned k = 0; k < threads; ++k) {
    const std::size_t lo = k * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::vector<WorkIndex> works_in_range(const CitationCorpus& corpus, YearRange years) {
  std::vector<WorkIndex> out;
  const YearRange seen = corpus.observed_years();
  for (Year y = std::max(years.first, seen.first); y <= std::min(years.last, seen.last); ++y) {
    auto ws = corpus.works_in_year(y);
    out.insert(out.end(), ws.begin(), ws.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline NbncScore nbnc(const CitationCorpus& corpus, WorkIndex focal, const MetricOptions& opt = {}) {
  corpus.check(focal);
  if (opt.horizon < 0) throw ArgumentError("horizon must be non-negative");
  return detail::nbnc_impl(corpus, focal, opt, [&](WorkIndex r, int t, Year calendar) {
    if (opt.age == CocitedAge::FocalCalendar) return detail::citations_in_year(corpus, r, calendar);
    return detail::citations_in_year(corpus, r, corpus.year(r) + t);
  });
}

inline CdScore cd_index(const CitationCorpus& corpus, WorkIndex focal, int horizon = 10) {
  corpus.check(focal);
  if (horizon < 0) throw ArgumentError("horizon must be non-negative");
  const YearRange window{corpus.year(focal), corpus.year(focal) + horizon};
  const auto refs = corpus.references(focal);
  const auto citers = corpus.citers(focal);

  CdScore s;
  s.work = focal;
  s.horizon = horizon;
  for (WorkIndex c : citers) {
    if (!window.contains(corpus.year(c))) continue;
    const auto theirs = corpus.references(c);
    bool shares = false;
    for (auto a = refs.begin(), b = theirs.begin(); a != refs.end() && b != theirs.end();) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        shares = true;
        break;
      }
    }
    ++(shares ? s.c_y : s.c_x);
  }
  s.c_total = s.c_x + s.c_y;

  std::vector<WorkIndex> ref_citers;
  for (WorkIndex r : refs) {
    for (WorkIndex w : corpus.citers(r)) {
      if (w == focal || !window.contains(corpus.year(w))) continue;
      if (std::binary_search(citers.begin(), citers.end(), w)) continue;
      ref_citers.push_back(w);
    }
  }
  std::sort(ref_citers.begin(), ref_citers.end());
  s.c_refs = static_cast<std::uint64_t>(std::unique(ref_citers.begin(), ref_citers.end()) - ref_citers.begin());

  const std::uint64_t den = s.c_total + s.c_refs;
  if (den == 0) {
    s.zero_denominator = true;
  } else {
    s.value = (static_cast<double>(s.c_x) - static_cast<double>(s.c_y)) / static_cast<double>(den);
  }
  return s;
}

// NBNC for every work published in `years`, ordered by work index.
inline std::vector<NbncScore> nbnc_all(const CitationCorpus& corpus, YearRange years,
                                       const MetricOptions& opt = {}) {
  if (opt.horizon < 0) throw ArgumentError("horizon must be non-negative");
  const auto works = detail::works_in_range(corpus, years);
  std::vector<NbncScore> out(works.size());
  if (works.empty()) return out;
  if (opt.age == CocitedAge::OwnAge) {
    const GammaTable gamma(corpus, opt.horizon);
    detail::parallel_for(works.size(), opt.threads, [&](std::size_t i) {
      out[i] = detail::nbnc_impl(corpus, works[i], opt,
                                 [&](WorkIndex r, int t, Year) { return gamma(r, t); });
    });
  } else {
    detail::parallel_for(works.size(), opt.threads,
                         [&](std::size_t i) { out[i] = nbnc(corpus, works[i], opt); });
  }
  return out;
}

inline std::vector<ImpactScores> impact_all(const CitationCorpus& corpus, YearRange years,
                                            const MetricOptions& opt = {}) {
  auto scores = nbnc_all(corpus, years, opt);
  std::vector<ImpactScores> out(scores.size());
  detail::parallel_for(scores.size(), opt.threads, [&](std::size_t i) {
    out[i].cd = cd_index(corpus, scores[i].work, opt.horizon);
    out[i].nbnc = std::move(scores[i]);
  });
  return out;
}

}  // namespace citescope
