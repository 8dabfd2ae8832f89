#pragma once

// Newline-delimited JSON work records (OpenAlex works export layout by
// default), optionally gzip-compressed.

#include <zlib.h>

#include <charconv>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "citescope/corpus.hpp"

namespace citescope {

// Dotted field paths into each JSON record. A segment suffixed with "[]"
// fans out over an array, e.g. "authorships[].countries".
struct IngestSchema {
  std::string id = "id";
  std::string year = "publication_year";
  std::string references = "referenced_works";
  std::string subfield = "primary_topic.subfield.id";
  std::string countries = "authorships[].countries";
  YearRange coverage{1900, 2023};
};

namespace detail {

inline void collect_path(const nlohmann::json& node, std::string_view path,
                         std::vector<const nlohmann::json*>& out) {
  if (path.empty()) {
    out.push_back(&node);
    return;
  }
  const auto dot = path.find('.');
  std::string_view seg = path.substr(0, dot);
  std::string_view rest = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
  bool fan_out = seg.size() >= 2 && seg.substr(seg.size() - 2) == "[]";
  if (fan_out) seg.remove_suffix(2);
  if (!node.is_object()) return;
  auto it = node.find(std::string(seg));
  if (it == node.end() || it->is_null()) return;
  if (fan_out) {
    if (!it->is_array()) return;
    for (const auto& el : *it) collect_path(el, rest, out);
  } else {
    collect_path(*it, rest, out);
  }
}

inline std::optional<std::string> as_id(const nlohmann::json& v) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return std::nullopt;
}

// Integer-valued number, or a string whose trailing run of digits is the
// value (covers "https://openalex.org/subfields/3107").
inline std::optional<long long> as_trailing_int(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
    return std::nullopt;
  }
  if (!v.is_string()) return std::nullopt;
  const auto& s = v.get_ref<const std::string&>();
  std::size_t end = s.size();
  std::size_t begin = end;
  while (begin > 0 && s[begin - 1] >= '0' && s[begin - 1] <= '9') --begin;
  if (begin == end) return std::nullopt;
  long long out = 0;
  auto [p, ec] = std::from_chars(s.data() + begin, s.data() + end, out);
  if (ec != std::errc{}) return std::nullopt;
  return out;
}

enum class Parse { Ok, Malformed, MissingId, MissingYear };

inline Parse parse_record(std::string_view line, const IngestSchema& schema, WorkRecord& rec) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return Parse::Malformed;

  std::vector<const nlohmann::json*> hits;
  collect_path(doc, schema.id, hits);
  if (hits.empty()) return Parse::MissingId;
  auto id = as_id(*hits.front());
  if (!id) return hits.front()->is_string() ? Parse::MissingId : Parse::Malformed;
  rec.id = std::move(*id);

  hits.clear();
  collect_path(doc, schema.year, hits);
  if (hits.empty()) return Parse::MissingYear;
  const auto& yv = *hits.front();
  if (!yv.is_number_integer()) return Parse::Malformed;
  rec.year = static_cast<Year>(yv.get<long long>());

  hits.clear();
  collect_path(doc, schema.references, hits);
  rec.references.clear();
  for (const auto* h : hits) {
    if (h->is_array()) {
      for (const auto& r : *h) {
        auto rid = as_id(r);
        if (!rid) return Parse::Malformed;
        rec.references.push_back(std::move(*rid));
      }
    } else if (auto rid = as_id(*h)) {
      rec.references.push_back(std::move(*rid));
    } else {
      return Parse::Malformed;
    }
  }

  hits.clear();
  collect_path(doc, schema.subfield, hits);
  rec.subfield = kUnlabeledSubfield;
  if (!hits.empty()) {
    if (auto sf = as_trailing_int(*hits.front())) rec.subfield = static_cast<SubfieldId>(*sf);
  }

  hits.clear();
  collect_path(doc, schema.countries, hits);
  rec.countries.clear();
  auto add_country = [&](const nlohmann::json& c) {
    if (c.is_string() && !c.get_ref<const std::string&>().empty()) {
      rec.countries.push_back(c.get<std::string>());
    }
  };
  for (const auto* h : hits) {
    if (h->is_array()) {
      for (const auto& c : *h) add_country(c);
    } else {
      add_country(*h);
    }
  }
  return Parse::Ok;
}

}  // namespace detail

// Feeds one line into the builder, counting the outcome.
inline void ingest_line(CorpusBuilder& builder, std::string_view line, const IngestSchema& schema) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  if (line.empty()) return;
  auto& report = builder.report();
  ++report.records_seen;
  WorkRecord rec;
  switch (detail::parse_record(line, schema, rec)) {
    case detail::Parse::Malformed: ++report.malformed; return;
    case detail::Parse::MissingId: ++report.missing_id; return;
    case detail::Parse::MissingYear: ++report.missing_year; return;
    case detail::Parse::Ok: break;
  }
  builder.add(std::move(rec));
}

inline CitationCorpus ingest_works(std::istream& in, const IngestSchema& schema,
                                   IngestReport* report = nullptr) {
  CorpusBuilder builder(schema.coverage);
  std::string line;
  while (std::getline(in, line)) ingest_line(builder, line, schema);
  return builder.build(report);
}

// Reads plain or gzip-compressed files; zlib passes uncompressed input through.
inline CitationCorpus ingest_file(const std::string& path, const IngestSchema& schema,
                                  IngestReport* report = nullptr) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "rb"), &gzclose);
  if (!gz) throw std::runtime_error("cannot open " + path);
  CorpusBuilder builder(schema.coverage);
  std::string line;
  char buf[1 << 16];
  for (;;) {
    int n = gzread(gz.get(), buf, sizeof buf);
    if (n < 0) throw FormatError("read error in " + path);
    if (n == 0) break;
    std::string_view chunk(buf, static_cast<std::size_t>(n));
    for (;;) {
      auto nl = chunk.find('\n');
      if (nl == std::string_view::npos) {
        line.append(chunk);
        break;
      }
      line.append(chunk.substr(0, nl));
      ingest_line(builder, line, schema);
      line.clear();
      chunk.remove_prefix(nl + 1);
    }
  }
  ingest_line(builder, line, schema);
  return builder.build(report);
}

}  // namespace citescope
