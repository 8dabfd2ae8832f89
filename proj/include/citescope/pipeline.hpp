#pragma once

// End-to-end orchestration: configuration, the eight stages, and the run
// directory with its manifest. Each stage persists its outputs and reloads
// its inputs from disk when they are not already in memory, so stages can be
// run one at a time from the command line.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citescope/analysis.hpp"
#include "citescope/breakthrough_panel.hpp"
#include "citescope/complexity_ranking.hpp"
#include "citescope/dynamics_clustering.hpp"
#include "citescope/impact_metrics.hpp"
#include "citescope/ingest.hpp"
#include "citescope/snapshot.hpp"
#include "citescope/table_io.hpp"

namespace citescope {

namespace fs = std::filesystem;

inline YearRange parse_year_range(std::string_view s) {
  const auto dash = s.find('-', 1);
  if (dash == std::string_view::npos) {
    const auto y = static_cast<Year>(parse_int(s));
    return {y, y};
  }
  return {static_cast<Year>(parse_int(s.substr(0, dash))), static_cast<Year>(parse_int(s.substr(dash + 1)))};
}

inline std::string format_year_range(YearRange r) { return std::to_string(r.first) + "-" + std::to_string(r.last); }

struct PipelineConfig {
  fs::path base_dir = ".";  // relative paths resolve against this

  std::string corpus;  // JSON lines (optionally gzip) or a corpus snapshot
  IngestSchema schema;
  YearRange years{1950, 2013};
  int horizon = 10;
  double top_fraction = 0.05;
  int window = 10;
  std::set<SubfieldId> subfields;          // empty: every labeled subfield
  std::set<SubfieldId> cluster_subfields;  // empty: same as subfields
  CocitationSemantics cocitation = CocitationSemantics::Multiset;
  CocitedAge cocited_age = CocitedAge::OwnAge;
  DtwCost dtw_cost = DtwCost::Euclidean;
  std::optional<double> sigma;  // unset: std of off-diagonal distances
  std::uint64_t seed = 42;
  double resolution = 1.0;
  double rca_threshold = 1.0;
  int components = 2;
  EigenSelection eigen_selection = EigenSelection::Algebraic;
  std::string external_ranking;
  std::string rd_share;
  std::string gdp;
  std::optional<YearRange> gerd_window;
  std::string output = "runs";
  unsigned threads = 0;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k{
        "corpus", "schema.id", "schema.year", "schema.references", "schema.subfield", "schema.countries",
        "coverage", "years", "horizon", "top_fraction", "window", "subfields", "cluster_subfields",
        "cocitation", "cocited_age", "dtw_cost", "sigma", "seed", "resolution", "rca_threshold",
        "components", "eigen_selection", "external_ranking", "rd_share", "gdp", "gerd_window",
        "output", "threads"};
    return k;
  }

  void set(const std::string& key, const std::string& value) {
    auto ids = [&](std::set<SubfieldId>& out) {
      out.clear();
      if (value.empty() || value == "all") return;
      for (auto tok : split(value, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (!tok.empty()) out.insert(static_cast<SubfieldId>(parse_int(tok)));
      }
    };
    auto pick = [&](std::initializer_list<std::string_view> opts) {
      for (std::size_t i = 0; i < opts.size(); ++i)
        if (value == opts.begin()[i]) return i;
      throw ArgumentError("bad value '" + value + "' for " + key);
    };
    try {
      if (key == "corpus") corpus = value;
      else if (key == "schema.id") schema.id = value;
      else if (key == "schema.year") schema.year = value;
      else if (key == "schema.references") schema.references = value;
      else if (key == "schema.subfield") schema.subfield = value;
      else if (key == "schema.countries") schema.countries = value;
      else if (key == "coverage") schema.coverage = parse_year_range(value);
      else if (key == "years") years = parse_year_range(value);
      else if (key == "horizon") horizon = static_cast<int>(parse_int(value));
      else if (key == "top_fraction") top_fraction = parse_double(value);
      else if (key == "window") window = static_cast<int>(parse_int(value));
      else if (key == "subfields") ids(subfields);
      else if (key == "cluster_subfields") ids(cluster_subfields);
      else if (key == "cocitation") cocitation = pick({"multiset", "set"}) ? CocitationSemantics::Set : CocitationSemantics::Multiset;
      else if (key == "cocited_age") cocited_age = pick({"own", "calendar"}) ? CocitedAge::FocalCalendar : CocitedAge::OwnAge;
      else if (key == "dtw_cost") dtw_cost = pick({"euclidean", "per_component"}) ? DtwCost::PerComponent : DtwCost::Euclidean;
      else if (key == "sigma") sigma = value == "auto" ? std::nullopt : std::optional<double>(parse_double(value));
      else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value));
      else if (key == "resolution") resolution = parse_double(value);
      else if (key == "rca_threshold") rca_threshold = parse_double(value);
      else if (key == "components") components = static_cast<int>(parse_int(value));
      else if (key == "eigen_selection") eigen_selection = pick({"algebraic", "magnitude"}) ? EigenSelection::Magnitude : EigenSelection::Algebraic;
      else if (key == "external_ranking") external_ranking = value;
      else if (key == "rd_share") rd_share = value;
      else if (key == "gdp") gdp = value;
      else if (key == "gerd_window") gerd_window = value == "auto" ? std::nullopt : std::optional<YearRange>(parse_year_range(value));
      else if (key == "output") output = value;
      else if (key == "threads") threads = static_cast<unsigned>(parse_int(value));
      else throw ArgumentError("unknown config key '" + key + "'");
    } catch (const FormatError& e) {
      throw ArgumentError("config " + key + ": " + e.what());
    }
  }

  // key = value lines; '#' starts a comment.
  static PipelineConfig from_stream(std::istream& in, const fs::path& base_dir) {
    PipelineConfig c;
    c.base_dir = base_dir;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
  }

  static PipelineConfig from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config " + path.string());
    return from_stream(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
  }

  fs::path resolve(const std::string& p) const {
    if (p.empty()) return {};
    const fs::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal();
  }

  std::string get(const std::string& key) const {
    auto ids = [](const std::set<SubfieldId>& s) {
      std::string out;
      for (auto id : s) out += (out.empty() ? "" : ",") + std::to_string(id);
      return out.empty() ? std::string("all") : out;
    };
    auto path = [&](const std::string& p) { return p.empty() ? std::string() : fs::absolute(resolve(p)).lexically_normal().string(); };
    if (key == "corpus") return path(corpus);
    if (key == "schema.id") return schema.id;
    if (key == "schema.year") return schema.year;
    if (key == "schema.references") return schema.references;
    if (key == "schema.subfield") return schema.subfield;
    if (key == "schema.countries") return schema.countries;
    if (key == "coverage") return format_year_range(schema.coverage);
    if (key == "years") return format_year_range(years);
    if (key == "horizon") return std::to_string(horizon);
    if (key == "top_fraction") return format_double(top_fraction);
    if (key == "window") return std::to_string(window);
    if (key == "subfields") return ids(subfields);
    if (key == "cluster_subfields") return ids(cluster_subfields);
    if (key == "cocitation") return cocitation == CocitationSemantics::Set ? "set" : "multiset";
    if (key == "cocited_age") return cocited_age == CocitedAge::FocalCalendar ? "calendar" : "own";
    if (key == "dtw_cost") return dtw_cost == DtwCost::PerComponent ? "per_component" : "euclidean";
    if (key == "sigma") return sigma ? format_double(*sigma) : "auto";
    if (key == "seed") return std::to_string(seed);
    if (key == "resolution") return format_double(resolution);
    if (key == "rca_threshold") return format_double(rca_threshold);
    if (key == "components") return std::to_string(components);
    if (key == "eigen_selection") return eigen_selection == EigenSelection::Magnitude ? "magnitude" : "algebraic";
    if (key == "external_ranking") return path(external_ranking);
    if (key == "rd_share") return path(rd_share);
    if (key == "gdp") return path(gdp);
    if (key == "gerd_window") return gerd_window ? format_year_range(*gerd_window) : "auto";
    if (key == "output") return path(output);
    if (key == "threads") return std::to_string(threads);
    throw ArgumentError("unknown config key '" + key + "'");
  }

  // Every setting that can change an output, one per line. Output location
  // and thread count are left out.
  std::string canonical() const {
    std::string out;
    for (const auto& k : keys()) {
      if (k == "output" || k == "threads") continue;
      out += k + " = " + get(k) + "\n";
    }
    return out;
  }

  std::string hash() const { return hex64(fnv1a(canonical())); }

  // Fails before any stage runs.
  void validate() const {
    auto need_file = [&](const std::string& what, const std::string& p) {
      if (p.empty()) return;
      if (!fs::is_regular_file(resolve(p))) throw ArgumentError(what + " not found: " + resolve(p).string());
    };
    if (corpus.empty()) throw ArgumentError("config: corpus path is required");
    need_file("corpus", corpus);
    need_file("external_ranking", external_ranking);
    need_file("rd_share", rd_share);
    need_file("gdp", gdp);
    if (rd_share.empty() != gdp.empty()) throw ArgumentError("config: rd_share and gdp go together");
    if (schema.coverage.empty()) throw ArgumentError("config: empty coverage");
    if (years.empty()) throw ArgumentError("config: empty analysis years");
    if (horizon < 0) throw ArgumentError("config: horizon must be non-negative");
    if (!(top_fraction > 0.0 && top_fraction < 1.0)) throw ArgumentError("config: top_fraction must lie in (0, 1)");
    if (window < 1) throw ArgumentError("config: window must be positive");
    if (sigma && !(*sigma > 0.0)) throw ArgumentError("config: sigma must be positive");
    if (!(resolution > 0.0)) throw ArgumentError("config: resolution must be positive");
    if (!(rca_threshold > 0.0)) throw ArgumentError("config: rca_threshold must be positive");
    if (components < 1) throw ArgumentError("config: components must be at least 1");
    if (gerd_window && gerd_window->empty()) throw ArgumentError("config: empty gerd_window");
  }
};

struct PipelineError : std::runtime_error {
  PipelineError(std::string stage_, const std::string& cause)
      : std::runtime_error("stage " + stage_ + ": " + cause), stage(std::move(stage_)) {}
  std::string stage;
};

inline ExternalIndicator read_indicator(const fs::path& path) {
  const auto t = read_table(path.string(), 0);
  const auto c = t.column("country"), p = t.column("period"), v = t.column("value");
  ExternalIndicator out;
  for (const auto& row : t.rows) out.set(row[c], static_cast<Year>(parse_int(row[p])), parse_double(row[v]));
  return out;
}

inline Table matrix_table(const std::string& corner, const std::vector<std::string>& rows,
                          const std::vector<std::string>& cols, const Matrix& m) {
  std::vector<std::string> header{corner};
  header.insert(header.end(), cols.begin(), cols.end());
  Table t(header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.row() << rows[i];
    for (std::size_t j = 0; j < cols.size(); ++j) t << m(i, j);
  }
  return t;
}

inline std::vector<std::string> id_labels(const std::vector<SubfieldId>& ids) {
  std::vector<std::string> out;
  for (auto s : ids) out.push_back(std::to_string(s));
  return out;
}

inline void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

class Pipeline {
 public:
  static const std::vector<std::string>& stages() {
    static const std::vector<std::string> s{"ingest", "metrics", "select", "panel", "cluster", "rank", "correlate", "fit"};
    return s;
  }

  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    run_dir_ = cfg_.resolve(cfg_.output) / ("run-" + cfg_.hash());
  }

  const fs::path& run_dir() const { return run_dir_; }
  const PipelineConfig& config() const { return cfg_; }

  // Every stage in order. Returns the manifest path.
  fs::path run() {
    fs::create_directories(run_dir_);
    for (const auto& s : stages()) status_[s] = "not_run";
    for (const auto& s : stages()) run_stage(s);
    return run_dir_ / "manifest.tsv";
  }

  void run_stage(const std::string& name) {
    fs::create_directories(run_dir_);
    load_manifest();
    const auto start = std::chrono::steady_clock::now();
    try {
      status_[name] = "running";
      notes_.erase(name);
      dispatch(name);
      if (status_[name] == "running") status_[name] = "ok";
    } catch (const std::exception& e) {
      status_[name] = "failed";
      notes_[name] = e.what();
      timings_[name] = seconds_since(start);
      write_manifest();
      throw PipelineError(name, e.what());
    }
    timings_[name] = seconds_since(start);
    write_manifest();
  }

  const std::map<std::string, std::string>& status() const { return status_; }

  // Accessors load from the run directory when needed.
  const CitationCorpus& corpus() {
    if (!corpus_) corpus_ = load_snapshot(need(run_dir_ / "corpus.snapshot", "ingest").string());
    return *corpus_;
  }

  const std::vector<ImpactScores>& scores() {
    if (!scores_) scores_ = load_scores();
    return *scores_;
  }

  const std::vector<BreakthroughRecord>& records() {
    if (!records_) records_ = load_records();
    return *records_;
  }

  const SeriesSet& series() {
    if (!series_) series_ = load_series();
    return *series_;
  }

  const std::vector<PanelMatrix>& panels() {
    if (!panels_) panels_ = load_panels();
    return *panels_;
  }

  // Country rank tables keyed by "<kind>_<window>".
  const std::map<std::string, std::vector<RankRow>>& country_ranks() {
    if (!ranks_) ranks_ = load_ranks();
    return *ranks_;
  }

  std::vector<YearRange> windows() const { return window_grid(cfg_.years.first, cfg_.years.last, cfg_.window); }

  static std::string panel_key(BreakthroughClass kind, YearRange w) {
    return std::string(to_string(kind)) + "_" + format_year_range(w);
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  }

  fs::path need(const fs::path& p, const std::string& stage) const {
    if (!fs::exists(p)) throw InsufficientDataError("missing " + p.string() + "; run stage '" + stage + "' first");
    return p;
  }

  void dispatch(const std::string& name) {
    if (name == "ingest") return stage_ingest();
    if (name == "metrics") return stage_metrics();
    if (name == "select") return stage_select();
    if (name == "panel") return stage_panel();
    if (name == "cluster") return stage_cluster();
    if (name == "rank") return stage_rank();
    if (name == "correlate") return stage_correlate();
    if (name == "fit") return stage_fit();
    throw ArgumentError("unknown stage '" + name + "'");
  }

  void skip(const std::string& stage, const std::string& why) {
    status_[stage] = "skipped";
    notes_[stage] = why;
  }

  // ---- stages -------------------------------------------------------------

  void stage_ingest() {
    const auto src = cfg_.resolve(cfg_.corpus);
    IngestReport report;
    bool snapshot = false;
    {
      std::ifstream in(src, std::ios::binary);
      char magic[8] = {};
      in.read(magic, 8);
      snapshot = in.gcount() == 8 && std::equal(magic, magic + 8, kSnapshotMagic.begin());
    }
    if (snapshot) {
      corpus_ = load_snapshot(src.string());
      report.works = corpus_->size();
    } else {
      corpus_ = ingest_file(src.string(), cfg_.schema, &report);
    }
    save_snapshot((run_dir_ / "corpus.snapshot").string(), *corpus_);
    Table t({"counter", "value"});
    t.row() << "records_seen" << report.records_seen;
    t.row() << "works" << report.works;
    t.row() << "malformed" << report.malformed;
    t.row() << "missing_id" << report.missing_id;
    t.row() << "missing_year" << report.missing_year;
    t.row() << "year_out_of_range" << report.year_out_of_range;
    t.row() << "duplicate_id" << report.duplicate_id;
    t.row() << "dangling_refs" << report.dangling_refs;
    t.row() << "duplicate_refs" << report.duplicate_refs;
    t.row() << "self_refs" << report.self_refs;
    t.row() << "unlabeled_subfield" << report.unlabeled_subfield;
    t.row() << "edges" << corpus_->edge_count();
    t.row() << "early_citations" << corpus_->early_citations();
    t.save((run_dir_ / "ingest_report.tsv").string());
  }

  void stage_metrics() {
    const auto& c = corpus();
    MetricOptions opt{cfg_.horizon, cfg_.cocitation, cfg_.cocited_age, cfg_.threads};
    scores_ = impact_all(c, cfg_.years, opt);
    const auto dir = run_dir_ / "metrics";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::map<Year, Table> per_year;
    for (const auto& s : *scores_) {
      const Year y = c.year(s.nbnc.work);
      auto it = per_year.try_emplace(y, Table({"work_id", "nbnc", "cd", "c_x", "c_y", "c_total", "c_refs",
                                               "truncated_horizon", "cd_zero_denominator"})).first;
      it->second.row() << c.id(s.nbnc.work) << s.nbnc.value << s.cd.value << s.cd.c_x << s.cd.c_y
                       << s.cd.c_total << s.cd.c_refs << s.nbnc.truncated_horizon << s.cd.zero_denominator;
    }
    for (const auto& [y, t] : per_year) t.save((dir / ("scores_" + std::to_string(y) + ".tsv")).string());
  }

  void stage_select() {
    const auto& c = corpus();
    auto sel = select_breakthroughs(c, scores(), cfg_.top_fraction, cfg_.years);
    const auto dir = run_dir_ / "breakthroughs";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::map<Year, Table> per_year;
    std::map<Year, std::size_t> rank;
    for (const auto& r : sel.records) {
      auto it = per_year.try_emplace(r.year, Table({"rank", "work_id", "subfield", "countries", "nbnc", "cd", "class"})).first;
      std::string countries;
      for (const auto& x : r.countries) countries += (countries.empty() ? "" : ";") + x;
      it->second.row() << ++rank[r.year] << r.id
                       << (r.subfield == kUnlabeledSubfield ? std::string("NA") : std::to_string(r.subfield))
                       << countries << r.nbnc << r.cd << to_string(r.kind);
    }
    for (const auto& [y, t] : per_year) t.save((dir / ("breakthroughs_" + std::to_string(y) + ".tsv")).string());
    Table skipped({"year"});
    for (auto y : sel.skipped_years) skipped.row() << y;
    skipped.save((dir / "skipped_years.tsv").string());
    records_ = std::move(sel.records);
  }

  void stage_panel() {
    const auto& c = corpus();
    series_ = subfield_series(records(), c, cfg_.years, cfg_.subfields);
    const auto sdir = run_dir_ / "series";
    fs::remove_all(sdir);
    fs::create_directories(sdir);
    Table st({"subfield", "year", "n_bt", "n_cn", "n_di", "n_s", "scaled_cn", "scaled_di", "no_publications"});
    for (const auto& [id, s] : series_->series) {
      for (std::size_t t = 0; t < s.published.size(); ++t) {
        st.row() << id << cfg_.years.first + static_cast<Year>(t) << s.breakthroughs[t] << s.consolidating[t]
                 << s.disruptive[t] << s.published[t] << s.scaled_consolidating[t] << s.scaled_disruptive[t]
                 << static_cast<bool>(s.no_publications[t]);
      }
    }
    st.save((sdir / "subfield_series.tsv").string());
    Table ul({"year", "unlabeled"});
    for (std::size_t t = 0; t < series_->unlabeled.size(); ++t)
      ul.row() << cfg_.years.first + static_cast<Year>(t) << series_->unlabeled[t];
    ul.save((sdir / "unlabeled.tsv").string());

    std::vector<SubfieldId> columns;
    for (const auto& [id, s] : series_->series) columns.push_back(id);
    const auto& countries = c.country_table();
    const auto pdir = run_dir_ / "panels";
    fs::remove_all(pdir);
    fs::create_directories(pdir);
    Table summary({"kind", "window", "total", "unattributed", "outside_columns"});
    panels_.emplace();
    for (auto w : windows()) {
      for (auto kind : {BreakthroughClass::Consolidating, BreakthroughClass::Disruptive}) {
        auto p = country_subfield_counts(records(), w, kind, countries, columns);
        const auto dir = pdir / panel_key(kind, w);
        fs::create_directories(dir);
        const auto cols = id_labels(p.subfields);
        matrix_table("country", p.countries, cols, p.counts).save((dir / "counts.tsv").string());
        write_lines(dir / "rows.txt", p.countries);
        write_lines(dir / "cols.txt", cols);
        double total = 0;
        for (double v : p.counts.data()) total += v;
        summary.row() << to_string(kind) << format_year_range(w) << total << p.unattributed << p.outside_columns;
        panels_->push_back(std::move(p));
      }
    }
    summary.save((pdir / "summary.tsv").string());
  }

  void stage_cluster() {
    const auto dir = run_dir_ / "clusters";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto all = trajectories_from_series(series());
    std::vector<Trajectory> ts;
    for (auto& t : all)
      if (cfg_.cluster_subfields.empty() || cfg_.cluster_subfields.count(t.subfield)) ts.push_back(std::move(t));
    if (ts.size() < 2) return skip("cluster", "fewer than two subfield trajectories");

    const auto d = distance_matrix(ts, cfg_.dtw_cost, cfg_.threads);
    const double sigma = cfg_.sigma ? *cfg_.sigma : default_sigma(d);
    const auto s = similarity_matrix(d, sigma);
    const auto r = leiden_clusters(s, cfg_.resolution, cfg_.seed);
    const auto labels = id_labels(d.labels);
    matrix_table("subfield", labels, labels, d.values).save((dir / "distance.tsv").string());
    matrix_table("subfield", labels, labels, s.values).save((dir / "similarity.tsv").string());

    Table a({"subfield", "cluster", "singleton", "community"});
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      a.row() << r.labels[i] << (r.cluster[i] < 0 ? std::string("NA") : std::to_string(r.cluster[i]))
              << static_cast<bool>(r.singleton[i]) << r.community[i];
    }
    a.save((dir / "assignments.tsv").string());

    Table m({"cluster", "year", "scaled_cn", "scaled_di", "members"});
    for (const auto& mt : cluster_mean_trajectory(r, ts)) {
      for (std::size_t k = 0; k < mt.points.size(); ++k) {
        m.row() << mt.cluster << mt.years.first + static_cast<Year>(k) << mt.points[k].consolidating
                << mt.points[k].disruptive << mt.members.size();
      }
    }
    m.save((dir / "mean_trajectories.tsv").string());

    std::size_t singletons = 0;
    for (bool b : r.singleton) singletons += b;
    Table sm({"key", "value"});
    sm.row() << "sigma" << sigma;
    sm.row() << "sigma_policy" << (cfg_.sigma ? "config" : "distance_std");
    sm.row() << "seed" << r.seed;
    sm.row() << "resolution" << r.resolution;
    sm.row() << "modularity" << r.modularity;
    sm.row() << "clusters" << r.cluster_count;
    sm.row() << "singletons" << singletons;
    sm.save((dir / "summary.tsv").string());
  }

  void stage_rank() {
    const auto root = run_dir_ / "ranking";
    fs::remove_all(root);
    fs::create_directories(root);
    GenepyOptions opt;
    opt.components = cfg_.components;
    opt.selection = cfg_.eigen_selection;
    Table manifest({"panel", "status", "countries", "subfields", "pruned_countries", "pruned_subfields",
                    "sweeps_u", "sweeps_v", "max_residual", "detail"});
    ranks_.emplace();
    for (const auto& p : panels()) {
      const auto key = panel_key(p.kind, p.window);
      double total = 0;
      for (double v : p.counts.data()) total += v;
      if (total == 0.0) {
        manifest.row() << key << "empty" << 0 << 0 << "" << "" << 0 << 0 << 0.0 << "no breakthroughs";
        continue;
      }
      const auto dir = root / key;
      fs::create_directories(dir);
      const auto r = rca(p);
      const auto b = binarize(r, cfg_.rca_threshold);
      matrix_table("country", r.countries, id_labels(r.subfields), r.values).save((dir / "rca.tsv").string());
      matrix_table("country", b.countries, id_labels(b.subfields), b.m).save((dir / "m.tsv").string());
      write_lines(dir / "rows.txt", b.countries);
      write_lines(dir / "cols.txt", id_labels(b.subfields));
      auto join = [](const auto& xs) {
        std::string out;
        for (const auto& x : xs) {
          std::ostringstream ss;
          ss << x;
          out += (out.empty() ? "" : ";") + ss.str();
        }
        return out;
      };
      GenepyPair g;
      try {
        g = genepy_scores(b, opt);
      } catch (const ConvergenceError& e) {
        manifest.row() << key << "no_convergence" << b.countries.size() << b.subfields.size()
                       << join(b.pruned_countries) << join(b.pruned_subfields) << 0 << 0 << e.residual << e.what();
        continue;
      }
      double worst = 0;
      Table eig({"side", "index", "eigenvalue", "multiplicity", "residual"});
      Table vec({"side", "label", "index", "component"});
      for (const auto* side : {&g.countries, &g.subfields}) {
        const char* name = side->side == GenepyResult::Side::Countries ? "countries" : "subfields";
        for (std::size_t i = 0; i < side->eigenvalues.size(); ++i) {
          eig.row() << name << i + 1 << side->eigenvalues[i] << side->multiplicity[i] << side->residuals[i];
          worst = std::max(worst, side->residuals[i]);
          for (std::size_t e = 0; e < side->labels.size(); ++e)
            vec.row() << name << side->labels[e] << i + 1 << side->eigenvectors[i][e];
        }
        Table rt({"label", "score", "rank", "position", "tied", "pruned"});
        auto rows = rank_table(*side);
        for (const auto& row : rows) rt.row() << row.label << row.score << row.rank << row.position << row.tied << row.pruned;
        rt.save((dir / (std::string(side == &g.countries ? "country" : "subfield") + "_ranks.tsv")).string());
        if (side == &g.countries) (*ranks_)[key] = std::move(rows);
      }
      eig.save((dir / "eigen.tsv").string());
      vec.save((dir / "eigenvectors.tsv").string());
      manifest.row() << key << "ok" << b.countries.size() << b.subfields.size() << join(b.pruned_countries)
                     << join(b.pruned_subfields) << g.countries.sweeps << g.subfields.sweeps << worst << "";
    }
    manifest.save((root / "manifest.tsv").string());
  }

  void stage_correlate() {
    const auto dir = run_dir_ / "analysis";
    fs::create_directories(dir);
    fs::remove(dir / "spearman.tsv");
    if (cfg_.external_ranking.empty()) return skip("correlate", "no external_ranking configured");
    const auto ext = read_indicator(cfg_.resolve(cfg_.external_ranking));
    const auto& ranks = country_ranks();
    Table t({"kind", "year", "window", "common", "rho", "status", "only_genepy", "only_external"});
    for (Year y : ext.years()) {
      if (!cfg_.years.contains(y)) continue;
      YearRange w{};
      for (auto x : windows())
        if (x.contains(y)) w = x;
      for (auto kind : {BreakthroughClass::Consolidating, BreakthroughClass::Disruptive}) {
        auto it = ranks.find(panel_key(kind, w));
        if (it == ranks.end()) {
          t.row() << to_string(kind) << y << format_year_range(w) << 0 << "NA" << "no_ranking" << "" << "";
          continue;
        }
        std::map<std::string, double> mine;
        for (const auto& r : it->second) mine[r.label] = static_cast<double>(r.rank);
        auto join = [](const std::vector<std::string>& xs) {
          std::string out;
          for (const auto& x : xs) out += (out.empty() ? "" : ";") + x;
          return out;
        };
        try {
          auto s = spearman(mine, ext.in_year(y));
          t.row() << to_string(kind) << y << format_year_range(w) << s.common << s.rho << "ok" << join(s.only_a) << join(s.only_b);
        } catch (const InsufficientDataError& e) {
          t.row() << to_string(kind) << y << format_year_range(w) << 0 << "NA" << "insufficient_data" << "" << "";
        }
      }
    }
    t.save((dir / "spearman.tsv").string());
  }

  YearRange gerd_window() const {
    if (cfg_.gerd_window) return *cfg_.gerd_window;
    const auto ws = windows();
    for (auto it = ws.rbegin(); it != ws.rend(); ++it)
      if (it->size() == cfg_.window) return *it;
    return ws.back();
  }

  void stage_fit() {
    const auto dir = run_dir_ / "analysis";
    fs::create_directories(dir);
    fs::remove(dir / "gerd.tsv");
    fs::remove(dir / "fits.tsv");
    if (cfg_.rd_share.empty()) return skip("fit", "no rd_share/gdp configured");
    const YearRange w = gerd_window();
    const auto gerd = gerd_means(read_indicator(cfg_.resolve(cfg_.rd_share)), read_indicator(cfg_.resolve(cfg_.gdp)), w);
    Table g({"country", "window", "gerd", "coverage"});
    for (const auto& [c, v] : gerd) g.row() << c << format_year_range(w) << v.value << v.coverage;
    g.save((dir / "gerd.tsv").string());

    Table f({"kind", "window", "target", "points", "exponent", "prefactor", "residual", "status"});
    const auto& ranks = country_ranks();
    for (auto kind : {BreakthroughClass::Consolidating, BreakthroughClass::Disruptive}) {
      const PanelMatrix* panel = nullptr;
      for (const auto& p : panels())
        if (p.kind == kind && p.window == w) panel = &p;
      std::map<std::string, double> counts, rank;
      if (panel) {
        for (std::size_t c = 0; c < panel->countries.size(); ++c) {
          double sum = 0;
          for (std::size_t s = 0; s < panel->subfields.size(); ++s) sum += panel->counts(c, s);
          counts[panel->countries[c]] = sum;
        }
      }
      if (auto it = ranks.find(panel_key(kind, w)); it != ranks.end()) {
        for (const auto& r : it->second)
          if (!r.pruned) rank[r.label] = static_cast<double>(r.rank);
      }
      for (const auto& [target, ys] : {std::pair{"breakthroughs", &counts}, std::pair{"genepy_rank", &rank}}) {
        std::vector<double> x, y;
        for (const auto& [c, v] : gerd) {
          auto it = ys->find(c);
          if (it == ys->end() || !(it->second > 0.0) || !(v.value > 0.0)) continue;
          x.push_back(v.value);
          y.push_back(it->second);
        }
        try {
          auto fit = loglog_fit(x, y);
          f.row() << to_string(kind) << format_year_range(w) << target << fit.points << fit.exponent
                  << fit.prefactor << fit.residual << "ok";
        } catch (const std::exception&) {
          f.row() << to_string(kind) << format_year_range(w) << target << x.size() << "NA" << "NA" << "NA"
                  << "insufficient_data";
        }
      }
    }
    f.save((dir / "fits.tsv").string());
  }

  // ---- loaders ------------------------------------------------------------

  std::vector<ImpactScores> load_scores() {
    const auto& c = corpus();
    std::vector<ImpactScores> out;
    for (Year y = cfg_.years.first; y <= cfg_.years.last; ++y) {
      const auto path = run_dir_ / "metrics" / ("scores_" + std::to_string(y) + ".tsv");
      if (!fs::exists(path)) continue;
      const auto t = read_table(path.string());
      const auto id = t.column("work_id"), nb = t.column("nbnc"), cd = t.column("cd"), cx = t.column("c_x"),
                 cy = t.column("c_y"), ct = t.column("c_total"), cr = t.column("c_refs"),
                 tr = t.column("truncated_horizon"), zd = t.column("cd_zero_denominator");
      for (const auto& row : t.rows) {
        ImpactScores s;
        s.nbnc.work = s.cd.work = c.at(row[id]);
        s.nbnc.horizon = s.cd.horizon = cfg_.horizon;
        s.nbnc.value = parse_double(row[nb]);
        s.nbnc.truncated_horizon = row[tr] == "1";
        s.cd.value = parse_double(row[cd]);
        s.cd.c_x = static_cast<std::uint64_t>(parse_int(row[cx]));
        s.cd.c_y = static_cast<std::uint64_t>(parse_int(row[cy]));
        s.cd.c_total = static_cast<std::uint64_t>(parse_int(row[ct]));
        s.cd.c_refs = static_cast<std::uint64_t>(parse_int(row[cr]));
        s.cd.zero_denominator = row[zd] == "1";
        out.push_back(std::move(s));
      }
    }
    if (out.empty()) need(run_dir_ / "metrics", "metrics");
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.nbnc.work < b.nbnc.work; });
    return out;
  }

  std::vector<BreakthroughRecord> load_records() {
    const auto& c = corpus();
    need(run_dir_ / "breakthroughs" / "skipped_years.tsv", "select");
    std::vector<BreakthroughRecord> out;
    for (Year y = cfg_.years.first; y <= cfg_.years.last; ++y) {
      const auto path = run_dir_ / "breakthroughs" / ("breakthroughs_" + std::to_string(y) + ".tsv");
      if (!fs::exists(path)) continue;
      const auto t = read_table(path.string());
      const auto id = t.column("work_id"), sf = t.column("subfield"), cs = t.column("countries"),
                 nb = t.column("nbnc"), cd = t.column("cd"), cl = t.column("class");
      for (const auto& row : t.rows) {
        BreakthroughRecord r;
        r.work = c.at(row[id]);
        r.id = row[id];
        r.year = y;
        r.subfield = row[sf] == "NA" ? kUnlabeledSubfield : static_cast<SubfieldId>(parse_int(row[sf]));
        if (!row[cs].empty()) r.countries = split(row[cs], ';');
        r.nbnc = parse_double(row[nb]);
        r.cd = parse_double(row[cd]);
        r.kind = row[cl] == "DI" ? BreakthroughClass::Disruptive : BreakthroughClass::Consolidating;
        out.push_back(std::move(r));
      }
    }
    return out;
  }

  SeriesSet load_series() {
    const auto t = read_table(need(run_dir_ / "series" / "subfield_series.tsv", "panel").string());
    SeriesSet out;
    const auto width = static_cast<std::size_t>(cfg_.years.size());
    out.unlabeled.assign(width, 0);
    const auto sid = t.column("subfield"), yr = t.column("year"), bt = t.column("n_bt"), cn = t.column("n_cn"),
               di = t.column("n_di"), ns = t.column("n_s");
    for (const auto& row : t.rows) {
      const auto id = static_cast<SubfieldId>(parse_int(row[sid]));
      auto [it, fresh] = out.series.try_emplace(id);
      auto& s = it->second;
      if (fresh) {
        s.subfield = id;
        s.years = cfg_.years;
        s.breakthroughs.assign(width, 0);
        s.consolidating.assign(width, 0);
        s.disruptive.assign(width, 0);
        s.published.assign(width, 0);
      }
      const auto k = static_cast<std::size_t>(parse_int(row[yr]) - cfg_.years.first);
      s.breakthroughs.at(k) = static_cast<std::uint32_t>(parse_int(row[bt]));
      s.consolidating.at(k) = static_cast<std::uint32_t>(parse_int(row[cn]));
      s.disruptive.at(k) = static_cast<std::uint32_t>(parse_int(row[di]));
      s.published.at(k) = static_cast<std::uint32_t>(parse_int(row[ns]));
    }
    for (auto& [id, s] : out.series) scaled_counts(s);
    return out;
  }

  std::vector<PanelMatrix> load_panels() {
    need(run_dir_ / "panels" / "summary.tsv", "panel");
    std::vector<PanelMatrix> out;
    for (auto w : windows()) {
      for (auto kind : {BreakthroughClass::Consolidating, BreakthroughClass::Disruptive}) {
        const auto t = read_table((run_dir_ / "panels" / panel_key(kind, w) / "counts.tsv").string());
        PanelMatrix p;
        p.window = w;
        p.kind = kind;
        for (std::size_t j = 1; j < t.header.size(); ++j) p.subfields.push_back(static_cast<SubfieldId>(parse_int(t.header[j])));
        p.counts = Matrix(t.rows.size(), p.subfields.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          p.countries.push_back(t.rows[i][0]);
          for (std::size_t j = 0; j < p.subfields.size(); ++j) p.counts(i, j) = parse_double(t.rows[i][j + 1]);
        }
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  std::map<std::string, std::vector<RankRow>> load_ranks() {
    const auto m = read_table(need(run_dir_ / "ranking" / "manifest.tsv", "rank").string());
    std::map<std::string, std::vector<RankRow>> out;
    const auto pk = m.column("panel"), st = m.column("status");
    for (const auto& row : m.rows) {
      if (row[st] != "ok") continue;
      const auto t = read_table((run_dir_ / "ranking" / row[pk] / "country_ranks.tsv").string());
      auto& rows = out[row[pk]];
      for (const auto& r : t.rows) {
        rows.push_back({r[0], parse_double(r[1]), static_cast<std::size_t>(parse_int(r[2])),
                        static_cast<std::size_t>(parse_int(r[3])), r[4] == "1", r[5] == "1"});
      }
    }
    return out;
  }

  // ---- manifest -----------------------------------------------------------

  void load_manifest() {
    const auto path = run_dir_ / "manifest.tsv";
    if (fs::exists(path)) {
      for (const auto& row : read_table(path.string()).rows) {
        if (row[0].rfind("stage.", 0) == 0) status_[row[0].substr(6)] = row[1];
        if (row[0].rfind("note.", 0) == 0) notes_[row[0].substr(5)] = row[1];
      }
    }
    const auto tpath = run_dir_ / "timings.tsv";
    if (fs::exists(tpath)) {
      for (const auto& row : read_table(tpath.string()).rows) timings_[row[0]] = parse_double(row[1]);
    }
    for (const auto& s : stages()) status_.try_emplace(s, "not_run");
  }

  void write_manifest() {
    {
      std::ofstream out(run_dir_ / "config.txt", std::ios::binary);
      out << cfg_.canonical();
    }
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(run_dir_)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), run_dir_).generic_string();
      if (rel == "manifest.tsv" || rel == "timings.tsv") continue;
      files.push_back(rel);
    }
    std::sort(files.begin(), files.end());

    bool complete = true;
    for (const auto& s : stages()) complete = complete && (status_[s] == "ok" || status_[s] == "skipped");
    Table m({"entry", "value"});
    m.row() << "config_hash" << cfg_.hash();
    m.row() << "complete" << complete;
    for (const auto& s : stages()) m.row() << "stage." + s << status_[s];
    for (const auto& s : stages()) {
      if (auto it = notes_.find(s); it != notes_.end()) {
        std::string note = it->second;
        std::replace(note.begin(), note.end(), '\t', ' ');
        std::replace(note.begin(), note.end(), '\n', ' ');
        m.row() << "note." + s << note;
      }
    }
    for (const auto& f : files) m.row() << "file." + f << file_checksum((run_dir_ / f).string());
    m.save((run_dir_ / "manifest.tsv").string());

    Table t({"stage", "seconds"});
    for (const auto& s : stages())
      if (auto it = timings_.find(s); it != timings_.end()) t.row() << s << it->second;
    t.save((run_dir_ / "timings.tsv").string());
  }

  PipelineConfig cfg_;
  fs::path run_dir_;
  std::map<std::string, std::string> status_, notes_;
  std::map<std::string, double> timings_;
  std::optional<CitationCorpus> corpus_;
  std::optional<std::vector<ImpactScores>> scores_;
  std::optional<std::vector<BreakthroughRecord>> records_;
  std::optional<SeriesSet> series_;
  std::optional<std::vector<PanelMatrix>> panels_;
  std::optional<std::map<std::string, std::vector<RankRow>>> ranks_;
};

}  // namespace citescope
