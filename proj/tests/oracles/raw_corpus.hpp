#pragma once

// Test-only helpers: a plain-struct corpus description and brute-force
// reference implementations of the citation metrics that never touch the
// CitationCorpus adjacency.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/random.hpp"

namespace oracle {

struct RawWork {
  std::string id;
  int year = 0;
  std::vector<std::string> refs;
  int subfield = -1;
  std::vector<std::string> countries;
};

inline citescope::CitationCorpus build(const std::vector<RawWork>& works,
                                       citescope::YearRange coverage = {1000, 3000},
                                       citescope::IngestReport* report = nullptr) {
  citescope::CorpusBuilder b(coverage);
  for (const auto& w : works) b.add({w.id, w.year, w.refs, w.subfield, w.countries});
  return b.build(report);
}

// Resolved view: distinct, known, non-self references per work.
struct Resolved {
  std::map<std::string, int> year;
  std::map<std::string, std::set<std::string>> refs;
  std::vector<std::string> order;
  std::map<std::pair<std::string, int>, std::uint64_t> cited_in_year;
  std::map<std::string, std::vector<std::string>> citers;  // in `order`  // (work, calendar year) -> citers
};

inline Resolved resolve(const std::vector<RawWork>& works) {
  Resolved r;
  for (const auto& w : works) {
    if (r.year.count(w.id)) continue;
    r.year[w.id] = w.year;
    r.order.push_back(w.id);
  }
  for (const auto& w : works) {
    if (r.refs.count(w.id)) continue;
    auto& s = r.refs[w.id];
    for (const auto& x : w.refs) {
      if (x != w.id && r.year.count(x)) s.insert(x);
    }
  }
  for (const auto& [citer, refs] : r.refs)
    for (const auto& x : refs) ++r.cited_in_year[{x, r.year.at(citer)}];
  for (const auto& id : r.order)
    for (const auto& x : r.refs.at(id)) r.citers[x].push_back(id);
  return r;
}

inline std::uint64_t citations_at(const Resolved& r, const std::string& work, int calendar_year) {
  auto it = r.cited_in_year.find({work, calendar_year});
  return it == r.cited_in_year.end() ? 0 : it->second;
}

struct NaiveNbnc {
  double value = 0;
  std::vector<double> terms;
};

// Enumerates citers and co-cited bags directly from the definition.
inline NaiveNbnc naive_nbnc(const Resolved& r, const std::string& focal, int horizon,
                            bool set_semantics = false, bool calendar_age = false) {
  NaiveNbnc out;
  const int y0 = r.year.at(focal);
  for (int t = 0; t <= horizon; ++t) {
    std::uint64_t c = 0;
    std::vector<std::string> bag;
    auto cs = r.citers.find(focal);
    for (const auto& id : cs == r.citers.end() ? std::vector<std::string>{} : cs->second) {
      const auto& refs = r.refs.at(id);
      if (r.year.at(id) != y0 + t) continue;
      ++c;
      for (const auto& x : refs) {
        if (x != focal) bag.push_back(x);
      }
    }
    if (set_semantics) {
      std::sort(bag.begin(), bag.end());
      bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
    }
    std::uint64_t denom = 0;
    for (const auto& j : bag) {
      denom += citations_at(r, j, calendar_age ? y0 + t : r.year.at(j) + t);
    }
    double term = 0;
    if (c > 0 && denom > 0) term = static_cast<double>(bag.size() * c) / static_cast<double>(denom);
    out.terms.push_back(term);
  }
  for (double t : out.terms) out.value += t;
  return out;
}

struct NaiveCd {
  double value = 0;
  std::uint64_t cx = 0, cy = 0, crefs = 0;
};

inline NaiveCd naive_cd(const Resolved& r, const std::string& focal, int horizon) {
  NaiveCd out;
  const int y0 = r.year.at(focal);
  const auto& frefs = r.refs.at(focal);
  for (const auto& id : r.order) {
    if (id == focal) continue;
    const int y = r.year.at(id);
    if (y < y0 || y > y0 + horizon) continue;
    const auto& refs = r.refs.at(id);
    bool cites_focal = refs.count(focal) > 0;
    bool cites_ref = false;
    for (const auto& x : frefs) cites_ref = cites_ref || refs.count(x);
    if (cites_focal) {
      ++(cites_ref ? out.cy : out.cx);
    } else if (cites_ref) {
      ++out.crefs;
    }
  }
  const auto den = out.cx + out.cy + out.crefs;
  if (den > 0) out.value = (double(out.cx) - double(out.cy)) / double(den);
  return out;
}

// Random corpus with noise: dangling refs, duplicate refs, citations to
// later works.
inline std::vector<RawWork> random_corpus(std::uint64_t seed, int n, int first_year = 2000,
                                          int years = 15, int max_refs = 6) {
  citescope::Rng rng(seed);
  std::vector<RawWork> works;
  for (int i = 0; i < n; ++i) {
    RawWork w;
    w.id = "W" + std::to_string(i);
    w.year = first_year + static_cast<int>(rng.below(static_cast<std::uint64_t>(years)));
    works.push_back(w);
  }
  std::sort(works.begin(), works.end(), [](const RawWork& a, const RawWork& b) { return a.year < b.year; });
  for (int i = 0; i < n; ++i) {
    auto& w = works[i];
    int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_refs) + 1));
    for (int j = 0; j < k; ++j) {
      double u = rng.uniform();
      if (u < 0.05) {
        w.refs.push_back("missing" + std::to_string(rng.below(10)));
      } else if (u < 0.1) {
        w.refs.push_back(works[rng.below(static_cast<std::uint64_t>(n))].id);
      } else if (i > 0) {
        w.refs.push_back(works[rng.below(static_cast<std::uint64_t>(i))].id);
      }
    }
    if (!w.refs.empty() && rng.bernoulli(0.1)) w.refs.push_back(w.refs.front());
    w.subfield = static_cast<int>(rng.below(5));
  }
  return works;
}

}  // namespace oracle
