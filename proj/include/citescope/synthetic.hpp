#pragma once

// Seeded generator of OpenAlex-shaped work records and country indicator
// tables, for demos and scale tests. Output depends only on the parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "citescope/common.hpp"
#include "citescope/random.hpp"
#include "citescope/table_io.hpp"

namespace citescope {

struct SynthParams {
  std::size_t works = 20000;
  Year first_year = 1950;
  Year last_year = 2023;
  int subfields = 12;
  int countries = 24;
  double growth = 0.045;     // yearly growth rate of output
  double mean_refs = 12.0;   // for the latest year; earlier years scale down
  double dangling = 0.01;    // share of references to unknown ids
  double no_country = 0.03;  // share of works without a country
  double unlabeled = 0.01;   // share of works without a subfield
  std::uint64_t seed = 42;
};

inline const std::vector<std::string>& synthetic_country_pool() {
  static const std::vector<std::string> pool{
      "US", "CN", "GB", "DE", "JP", "FR", "IN", "IT", "CA", "KR", "ES", "AU", "RU", "BR", "NL", "CH",
      "SE", "PL", "IL", "BE", "TW", "DK", "AT", "FI", "NO", "IR", "TR", "MX", "SG", "ZA", "PT", "CZ"};
  return pool;
}

struct SynthCorpus {
  std::vector<std::string> lines;  // one JSON object per work
  std::vector<std::string> countries;
  std::vector<int> subfields;
};

namespace detail {

inline std::size_t weighted_pick(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

// Per-year counts proportional to exp(growth * offset), summing to `n`
// (largest remainder).
inline std::vector<std::size_t> yearly_counts(std::size_t n, Year first, Year last, double growth) {
  const std::size_t years = static_cast<std::size_t>(last - first + 1);
  std::vector<double> w(years);
  double total = 0.0;
  for (std::size_t i = 0; i < years; ++i) total += w[i] = std::exp(growth * static_cast<double>(i));
  std::vector<std::size_t> out(years);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < years; ++i) {
    const double exact = static_cast<double>(n) * w[i] / total;
    out[i] = static_cast<std::size_t>(exact);
    used += out[i];
    rem.emplace_back(exact - static_cast<double>(out[i]), i);
  }
  std::sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++out[rem[k % rem.size()].second];
  return out;
}

}  // namespace detail

inline std::string synthetic_id(std::size_t i) { return "https://openalex.org/W" + std::to_string(1000000 + i); }

inline SynthCorpus synthesize_corpus(const SynthParams& p) {
  if (p.first_year > p.last_year || p.works == 0) throw ArgumentError("empty synthetic corpus");
  if (p.countries < 1 || p.countries > static_cast<int>(synthetic_country_pool().size()))
    throw ArgumentError("synthetic country count out of range");
  if (p.subfields < 1) throw ArgumentError("need at least one subfield");
  Rng rng(p.seed);
  SynthCorpus out;
  out.countries.assign(synthetic_country_pool().begin(), synthetic_country_pool().begin() + p.countries);
  for (int s = 0; s < p.subfields; ++s) out.subfields.push_back(3101 + s);

  // Subfields grow at their own rates and take off at different times.
  std::vector<double> sub_growth(p.subfields), sub_base(p.subfields), sub_disrupt(p.subfields);
  for (int s = 0; s < p.subfields; ++s) {
    sub_growth[s] = -0.02 + 0.07 * rng.uniform();
    sub_base[s] = 0.3 + rng.uniform();
    sub_disrupt[s] = 0.15 + 0.5 * rng.uniform();  // chance a reference slot ignores prior work
  }
  // Country size (Zipf) and specialization across subfields.
  std::vector<double> pop(p.countries);
  std::vector<std::vector<double>> affinity(p.countries, std::vector<double>(p.subfields));
  for (int c = 0; c < p.countries; ++c) {
    pop[c] = 1.0 / std::pow(c + 1.0, 0.9);
    for (int s = 0; s < p.subfields; ++s) {
      const double u = rng.uniform();
      affinity[c][s] = 0.2 + 3.0 * u * u * u;
    }
  }

  const auto counts = detail::yearly_counts(p.works, p.first_year, p.last_year, p.growth);
  const std::size_t span = counts.size();
  std::vector<Year> year_of;
  std::vector<int> sub_of;
  std::vector<std::vector<std::size_t>> refs_of;
  std::vector<std::vector<std::size_t>> by_year(span);
  std::vector<std::vector<std::vector<std::size_t>>> by_year_sub(span, std::vector<std::vector<std::size_t>>(p.subfields));
  std::vector<std::vector<std::size_t>> cited_pool(span);  // one entry per citation received

  std::size_t next = 0;
  for (std::size_t yi = 0; yi < span; ++yi) {
    const Year year = p.first_year + static_cast<Year>(yi);
    std::vector<double> sw(p.subfields);
    for (int s = 0; s < p.subfields; ++s) sw[s] = sub_base[s] * std::exp(sub_growth[s] * static_cast<double>(yi));
    const double ref_scale = 0.35 + 0.65 * static_cast<double>(yi) / std::max<double>(1.0, static_cast<double>(span - 1));

    for (std::size_t k = 0; k < counts[yi]; ++k, ++next) {
      const int sub = static_cast<int>(detail::weighted_pick(rng, sw));
      std::vector<double> cw(p.countries);
      for (int c = 0; c < p.countries; ++c) cw[c] = pop[c] * affinity[c][sub];
      std::vector<std::string> countries;
      if (!rng.bernoulli(p.no_country)) {
        countries.push_back(out.countries[detail::weighted_pick(rng, cw)]);
        if (rng.bernoulli(0.25)) {
          auto extra = out.countries[detail::weighted_pick(rng, cw)];
          if (extra != countries[0]) countries.push_back(extra);
        }
      }

      std::vector<std::size_t> refs;
      const std::size_t want = static_cast<std::size_t>(std::max(0.0, std::round(ref_scale * p.mean_refs * (0.5 + rng.uniform()))));
      for (std::size_t attempt = 0; refs.size() < want && attempt < 4 * want + 4; ++attempt) {
        std::size_t pick = SIZE_MAX;
        if (!refs.empty() && rng.bernoulli(1.0 - sub_disrupt[sub])) {
          // Copy a reference of something already cited.
          const auto& via = refs_of[refs[rng.below(refs.size())]];
          if (!via.empty()) pick = via[rng.below(via.size())];
        }
        if (pick == SIZE_MAX) {
          std::size_t lag = 0;
          while (lag < yi && rng.bernoulli(0.75)) ++lag;
          const std::size_t ty = yi - lag;
          if (!cited_pool[ty].empty() && rng.bernoulli(0.5)) {
            pick = cited_pool[ty][rng.below(cited_pool[ty].size())];
          } else {
            const int ts = rng.bernoulli(0.75) ? sub : static_cast<int>(rng.below(p.subfields));
            const auto& bucket = by_year_sub[ty][ts].empty() ? by_year[ty] : by_year_sub[ty][ts];
            if (!bucket.empty()) pick = bucket[rng.below(bucket.size())];
          }
        }
        if (pick == SIZE_MAX || std::find(refs.begin(), refs.end(), pick) != refs.end()) continue;
        refs.push_back(pick);
      }
      std::sort(refs.begin(), refs.end());
      for (auto r : refs) cited_pool[static_cast<std::size_t>(year_of[r] - p.first_year)].push_back(r);

      nlohmann::json rec;
      rec["id"] = synthetic_id(next);
      rec["publication_year"] = year;
      auto ref_ids = nlohmann::json::array();
      for (auto r : refs) ref_ids.push_back(synthetic_id(r));
      if (rng.bernoulli(p.dangling * static_cast<double>(std::max<std::size_t>(refs.size(), 1)))) {
        ref_ids.push_back("https://openalex.org/W" + std::to_string(900000000 + rng.below(1000000)));
      }
      rec["referenced_works"] = std::move(ref_ids);
      if (!rng.bernoulli(p.unlabeled)) {
        rec["primary_topic"] = {{"subfield", {{"id", "https://openalex.org/subfields/" + std::to_string(out.subfields[sub])}}}};
      } else {
        rec["primary_topic"] = nullptr;
      }
      auto auth = nlohmann::json::array();
      for (const auto& c : countries) auth.push_back({{"countries", {c}}});
      rec["authorships"] = std::move(auth);
      out.lines.push_back(rec.dump());

      year_of.push_back(year);
      sub_of.push_back(sub);
      refs_of.push_back(std::move(refs));
      by_year[yi].push_back(next);
      by_year_sub[yi][sub].push_back(next);
    }
  }
  return out;
}

struct SynthIndicators {
  Table ranking{{"country", "period", "value"}};   // yearly rank, 1 = best
  Table rd_share{{"country", "period", "value"}};  // R&D expenditure, % of GDP
  Table gdp{{"country", "period", "value"}};
};

inline SynthIndicators synthesize_indicators(const SynthParams& p, Year first = 1996, Year last = 2013) {
  Rng rng(p.seed ^ 0x5bd1e995ULL);
  const auto& pool = synthetic_country_pool();
  const int nc = std::min<int>(p.countries, static_cast<int>(pool.size()));
  SynthIndicators out;
  std::vector<double> size(nc), share(nc);
  for (int c = 0; c < nc; ++c) {
    size[c] = 1.0 / std::pow(c + 1.0, 0.9) * (0.6 + 0.8 * rng.uniform());
    share[c] = 0.5 + 3.0 * rng.uniform();
  }
  for (Year y = first; y <= last; ++y) {
    std::vector<std::pair<double, int>> order;
    for (int c = 0; c < nc; ++c) order.emplace_back(-size[c] * (0.7 + 0.6 * rng.uniform()), c);
    std::sort(order.begin(), order.end());
    for (std::size_t r = 0; r < order.size(); ++r) {
      out.ranking.row() << pool[order[r].second] << y << static_cast<double>(r + 1);
    }
    for (int c = 0; c < nc; ++c) {
      if (rng.bernoulli(0.05)) continue;  // gaps in coverage
      out.rd_share.row() << pool[c] << y << share[c] * (0.9 + 0.2 * rng.uniform());
      out.gdp.row() << pool[c] << y << 2e12 * size[c] * std::exp(0.03 * (y - first)) * (0.95 + 0.1 * rng.uniform());
    }
  }
  return out;
}

// Writes works.jsonl, ranking.tsv, rd_share.tsv and gdp.tsv into `dir`.
inline void write_synthetic_dataset(const std::filesystem::path& dir, const SynthParams& p) {
  std::filesystem::create_directories(dir);
  const auto corpus = synthesize_corpus(p);
  {
    std::ofstream out(dir / "works.jsonl", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "works.jsonl").string());
    for (const auto& l : corpus.lines) out << l << '\n';
  }
  const auto ind = synthesize_indicators(p);
  ind.ranking.save((dir / "ranking.tsv").string());
  ind.rd_share.save((dir / "rd_share.tsv").string());
  ind.gdp.save((dir / "gdp.tsv").string());
}

}  // namespace citescope
