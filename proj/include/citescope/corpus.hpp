#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citescope/common.hpp"

namespace citescope {

// One scholarly work as delivered by an ingestion source, before reference
// resolution.
struct WorkRecord {
  std::string id;
  Year year = 0;
  std::vector<std::string> references;
  SubfieldId subfield = kUnlabeledSubfield;
  std::vector<std::string> countries;
};

// Compressed sparse rows over work indices.
struct Adjacency {
  std::vector<std::uint64_t> offsets{0};
  std::vector<WorkIndex> targets;

  std::size_t rows() const { return offsets.size() - 1; }
  std::span<const WorkIndex> row(WorkIndex i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }
  std::size_t edges() const { return targets.size(); }
  bool operator==(const Adjacency&) const = default;
};

// Immutable citation graph. Work indices are assigned in ingestion order;
// every adjacency row is sorted ascending so iteration is deterministic.
class CitationCorpus {
 public:
  // Raw storage, as produced by the builder or read from a snapshot. The
  // citing side (in-adjacency) and the year index are derived.
  struct Parts {
    YearRange coverage;
    std::vector<std::string> ids;
    std::vector<Year> years;
    std::vector<SubfieldId> subfields;
    std::vector<std::string> country_table;  // sorted, unique
    Adjacency countries;                      // work -> country_table slots
    Adjacency references;                     // work -> cited works
  };

  CitationCorpus() = default;

  explicit CitationCorpus(Parts parts) : p_(std::move(parts)) {
    const std::size_t n = p_.ids.size();
    if (p_.years.size() != n || p_.subfields.size() != n || p_.references.rows() != n ||
        p_.countries.rows() != n) {
      throw ArgumentError("corpus parts have inconsistent lengths");
    }
    index_.reserve(n);
    for (WorkIndex i = 0; i < n; ++i) {
      if (!index_.emplace(p_.ids[i], i).second) throw ArgumentError("duplicate work id " + p_.ids[i]);
    }
    for (WorkIndex w = 0; w < n; ++w) {
      auto row = p_.references.row(w);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] >= n || row[k] == w) throw ArgumentError("invalid reference target");
        if (k > 0 && row[k] <= row[k - 1]) throw ArgumentError("reference row not strictly sorted");
      }
    }
    build_citers();
    build_year_index();
  }

  std::size_t size() const { return p_.ids.size(); }
  bool empty() const { return p_.ids.empty(); }
  const Parts& parts() const { return p_; }

  YearRange coverage() const { return p_.coverage; }
  // Years actually present; empty range when the corpus has no works.
  YearRange observed_years() const { return observed_; }

  const std::string& id(WorkIndex w) const { return p_.ids.at(w); }
  Year year(WorkIndex w) const { return p_.years[w]; }
  SubfieldId subfield(WorkIndex w) const { return p_.subfields[w]; }

  std::optional<WorkIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  WorkIndex at(std::string_view id) const {
    if (auto w = find(id)) return *w;
    throw LookupError("unknown work " + std::string(id));
  }
  void check(WorkIndex w) const {
    if (w >= size()) throw LookupError("work index " + std::to_string(w) + " out of range");
  }

  std::span<const WorkIndex> references(WorkIndex w) const { return p_.references.row(w); }
  std::span<const WorkIndex> citers(WorkIndex w) const { return citers_.row(w); }
  bool cites(WorkIndex citer, WorkIndex cited) const {
    auto refs = references(citer);
    return std::binary_search(refs.begin(), refs.end(), cited);
  }

  std::span<const WorkIndex> country_slots(WorkIndex w) const { return p_.countries.row(w); }
  const std::vector<std::string>& country_table() const { return p_.country_table; }
  std::vector<std::string_view> countries(WorkIndex w) const {
    std::vector<std::string_view> out;
    for (WorkIndex k : country_slots(w)) out.emplace_back(p_.country_table[k]);
    return out;
  }

  std::span<const WorkIndex> works_in_year(Year y) const {
    if (!observed_.contains(y)) return {};
    return by_year_.row(static_cast<WorkIndex>(y - observed_.first));
  }

  std::size_t edge_count() const { return p_.references.edges(); }
  // Citations whose citer is published before the cited work.
  std::size_t early_citations() const { return early_citations_; }

  const Adjacency& out_adjacency() const { return p_.references; }
  const Adjacency& in_adjacency() const { return citers_; }

 private:
  void build_citers() {
    const std::size_t n = size();
    std::vector<std::uint64_t> counts(n + 1, 0);
    for (WorkIndex t : p_.references.targets) ++counts[t + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    citers_.offsets = counts;
    citers_.targets.assign(p_.references.edges(), 0);
    std::vector<std::uint64_t> cursor(counts.begin(), counts.end() - 1);
    // Citers visited in ascending order, so each in-row comes out sorted.
    for (WorkIndex u = 0; u < n; ++u) {
      for (WorkIndex v : p_.references.row(u)) {
        citers_.targets[cursor[v]++] = u;
        if (p_.years[u] < p_.years[v]) ++early_citations_;
      }
    }
  }

  void build_year_index() {
    if (empty()) return;
    auto [lo, hi] = std::minmax_element(p_.years.begin(), p_.years.end());
    observed_ = {*lo, *hi};
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(observed_.size()) + 1, 0);
    for (Year y : p_.years) ++counts[static_cast<std::size_t>(y - observed_.first) + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    by_year_.offsets = counts;
    by_year_.targets.assign(size(), 0);
    std::vector<std::uint64_t> cursor(counts.begin(), counts.end() - 1);
    for (WorkIndex w = 0; w < size(); ++w) {
      by_year_.targets[cursor[static_cast<std::size_t>(p_.years[w] - observed_.first)]++] = w;
    }
  }

  Parts p_;
  std::unordered_map<std::string, WorkIndex> index_;
  Adjacency citers_;
  Adjacency by_year_;
  YearRange observed_;
  std::size_t early_citations_ = 0;
};

// Per-reason tallies from building a corpus.
struct IngestReport {
  std::size_t records_seen = 0;
  std::size_t works = 0;
  std::size_t malformed = 0;  // unparsable line or wrong field types
  std::size_t missing_id = 0;
  std::size_t missing_year = 0;
  std::size_t year_out_of_range = 0;
  std::size_t duplicate_id = 0;
  std::size_t dangling_refs = 0;
  std::size_t duplicate_refs = 0;
  std::size_t self_refs = 0;
  std::size_t unlabeled_subfield = 0;

  std::size_t rejected() const {
    return malformed + missing_id + missing_year + year_out_of_range + duplicate_id;
  }
  bool operator==(const IngestReport&) const = default;
};

// Single-writer accumulator of WorkRecords. References may point forward;
// they are resolved in build().
class CorpusBuilder {
 public:
  explicit CorpusBuilder(YearRange coverage) : coverage_(coverage) {}

  IngestReport& report() { return report_; }

  // Returns false when the record is rejected (reason counted).
  bool add(WorkRecord rec) {
    if (rec.id.empty()) {
      ++report_.missing_id;
      return false;
    }
    if (!coverage_.contains(rec.year)) {
      ++report_.year_out_of_range;
      return false;
    }
    if (!seen_.emplace(rec.id, static_cast<WorkIndex>(records_.size())).second) {
      ++report_.duplicate_id;
      return false;
    }
    if (rec.subfield == kUnlabeledSubfield) ++report_.unlabeled_subfield;
    records_.push_back(std::move(rec));
    return true;
  }

  CitationCorpus build(IngestReport* out_report = nullptr) {
    CitationCorpus::Parts parts;
    parts.coverage = coverage_;
    const std::size_t n = records_.size();
    parts.ids.reserve(n);
    parts.years.reserve(n);
    parts.subfields.reserve(n);

    for (const auto& r : records_) {
      for (const auto& c : r.countries) parts.country_table.push_back(c);
    }
    std::sort(parts.country_table.begin(), parts.country_table.end());
    parts.country_table.erase(std::unique(parts.country_table.begin(), parts.country_table.end()),
                              parts.country_table.end());

    std::vector<WorkIndex> row;
    for (WorkIndex w = 0; w < n; ++w) {
      auto& r = records_[w];
      row.clear();
      for (const auto& ref : r.references) {
        auto it = seen_.find(ref);
        if (it == seen_.end()) {
          ++report_.dangling_refs;
        } else if (it->second == w) {
          ++report_.self_refs;
        } else {
          row.push_back(it->second);
        }
      }
      std::sort(row.begin(), row.end());
      auto last = std::unique(row.begin(), row.end());
      report_.duplicate_refs += static_cast<std::size_t>(row.end() - last);
      row.erase(last, row.end());
      parts.references.targets.insert(parts.references.targets.end(), row.begin(), row.end());
      parts.references.offsets.push_back(parts.references.targets.size());

      row.clear();
      for (const auto& c : r.countries) {
        auto it = std::lower_bound(parts.country_table.begin(), parts.country_table.end(), c);
        row.push_back(static_cast<WorkIndex>(it - parts.country_table.begin()));
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      parts.countries.targets.insert(parts.countries.targets.end(), row.begin(), row.end());
      parts.countries.offsets.push_back(parts.countries.targets.size());

      parts.ids.push_back(std::move(r.id));
      parts.years.push_back(r.year);
      parts.subfields.push_back(r.subfield);
    }
    report_.works = n;
    records_.clear();
    seen_.clear();
    if (out_report) *out_report = report_;
    return CitationCorpus(std::move(parts));
  }

 private:
  YearRange coverage_;
  std::vector<WorkRecord> records_;
  std::unordered_map<std::string, WorkIndex> seen_;
  IngestReport report_;
};

// γ^t for t = 0..horizon: citers published exactly t years after the work.
struct YearlyCitationSeries {
  WorkIndex work = 0;
  std::vector<std::uint32_t> gamma;
  std::uint32_t early_citers = 0;  // citers dated before the work itself
};

inline YearlyCitationSeries yearly_citation_series(const CitationCorpus& corpus, WorkIndex work,
                                                   int horizon) {
  corpus.check(work);
  if (horizon < 0) throw ArgumentError("horizon must be non-negative");
  YearlyCitationSeries s{work, std::vector<std::uint32_t>(static_cast<std::size_t>(horizon) + 1, 0), 0};
  const Year y0 = corpus.year(work);
  for (WorkIndex c : corpus.citers(work)) {
    const Year dt = corpus.year(c) - y0;
    if (dt < 0) {
      ++s.early_citers;
    } else if (dt <= horizon) {
      ++s.gamma[static_cast<std::size_t>(dt)];
    }
  }
  return s;
}

enum class CocitationSemantics {
  Multiset,  // every occurrence in every citer counts
  Set,       // each co-cited work counts once per year offset
};

struct CocitedBag {
  WorkIndex focal = 0;
  int t = 0;
  std::vector<std::pair<WorkIndex, std::uint32_t>> members;  // sorted by index
  std::uint64_t size = 0;                                      // N_{f;t}
};

inline CocitedBag cocited_bag(const CitationCorpus& corpus, WorkIndex focal, int t,
                              CocitationSemantics semantics = CocitationSemantics::Multiset) {
  corpus.check(focal);
  if (t < 0) throw ArgumentError("year offset must be non-negative");
  CocitedBag bag{focal, t, {}, 0};
  const Year target = corpus.year(focal) + t;
  std::vector<WorkIndex> flat;
  for (WorkIndex c : corpus.citers(focal)) {
    if (corpus.year(c) != target) continue;
    for (WorkIndex r : corpus.references(c)) {
      if (r != focal) flat.push_back(r);
    }
  }
  std::sort(flat.begin(), flat.end());
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    while (j < flat.size() && flat[j] == flat[i]) ++j;
    const auto mult = semantics == CocitationSemantics::Set ? 1u : static_cast<std::uint32_t>(j - i);
    bag.members.emplace_back(flat[i], mult);
    bag.size += mult;
    i = j;
  }
  return bag;
}

}  // namespace citescope
