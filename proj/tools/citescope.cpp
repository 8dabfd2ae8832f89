// citescope: command-line front end for the breakthrough analysis pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citescope/analysis.hpp"
#include "citescope/pipeline.hpp"
#include "citescope/synthetic.hpp"
#include "citescope/table_io.hpp"

namespace fs = std::filesystem;
using namespace citescope;

namespace {

// Options shared by every pipeline subcommand: a config file, and one flag
// per config key that overrides it.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "key = value config file");
    app->add_option("--set", sets, "override as key=value (repeatable)");
    for (const auto& key : PipelineConfig::keys()) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '.', '-');
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option_function<std::string>("--" + flag, [this, key](const std::string& v) { overrides[key] = v; },
                                            "config key " + key);
    }
  }

  PipelineConfig build() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
    // Flag values are relative to the working directory, not the config.
    auto set_cli = [&](const std::string& key, const std::string& value) {
      static const std::set<std::string> paths{"corpus", "external_ranking", "rd_share", "gdp", "output"};
      if (paths.count(key) && !value.empty() && fs::path(value).is_relative()) {
        cfg.set(key, fs::absolute(value).lexically_normal().string());
      } else {
        cfg.set(key, value);
      }
    };
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + s + "'");
      set_cli(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : overrides) set_cli(k, v);
    return cfg;
  }
};

void print_status(const Pipeline& p) {
  std::cout << "run directory: " << p.run_dir().string() << "\n";
  for (const auto& s : Pipeline::stages()) std::cout << "  " << s << ": " << p.status().at(s) << "\n";
}

int run_stage(const ConfigOptions& opts, const std::string& stage) {
  Pipeline p(opts.build());
  if (stage == "run") {
    p.run();
  } else {
    p.run_stage(stage);
  }
  print_status(p);
  return 0;
}

std::map<std::string, double> key_values(const std::string& path, const std::string& key_col, const std::string& value_col) {
  const auto t = read_table(path, 0);
  const auto k = key_col.empty() ? 0 : t.column(key_col);
  const auto v = value_col.empty() ? 1 : t.column(value_col);
  std::map<std::string, double> out;
  for (const auto& row : t.rows) out[row[k]] = parse_double(row[v]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citescope: citation breakthroughs, phase-trajectory clustering and country complexity ranking"};
  app.require_subcommand(1);

  std::map<std::string, ConfigOptions> stage_opts;
  const std::map<std::string, std::string> help{
      {"ingest", "parse the corpus into a snapshot with an ingest report"},
      {"metrics", "NBNC and CD index for every work in the analysis years"},
      {"select", "yearly top-fraction breakthroughs with DI/CN classes"},
      {"panel", "subfield time series and country x subfield window panels"},
      {"cluster", "DTW + Gaussian kernel + Leiden clustering of subfield trajectories"},
      {"rank", "RCA, binary adjacency and GENEPY ranks per panel"},
      {"correlate", "Spearman correlation against an external ranking"},
      {"fit", "log-log power-law fits against window-averaged GERD"},
      {"run", "every stage in order"}};
  for (const auto& name : {"ingest", "metrics", "select", "panel", "cluster", "rank", "correlate", "fit", "run"}) {
    auto* sub = app.add_subcommand(name, help.at(name));
    stage_opts[name].attach(sub);
  }

  // Standalone statistics that need no pipeline run.
  std::string left, right, key_col, value_col, fit_input, x_col = "x", y_col = "y";
  auto* corr = app.get_subcommand("correlate");
  corr->add_option("--left", left, "standalone: first (key, value) table");
  corr->add_option("--right", right, "standalone: second (key, value) table");
  corr->add_option("--key-column", key_col, "standalone: key column name (default: first)");
  corr->add_option("--value-column", value_col, "standalone: value column name (default: second)");
  auto* fit = app.get_subcommand("fit");
  fit->add_option("--input", fit_input, "standalone: table with x and y columns");
  fit->add_option("--x-column", x_col, "standalone: x column name");
  fit->add_option("--y-column", y_col, "standalone: y column name");

  SynthParams synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("synth", "write a seeded synthetic corpus and indicator tables");
  gen->add_option("-o,--out", synth_out, "output directory")->required();
  gen->add_option("--works", synth.works, "number of works");
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--first-year", synth.first_year, "first publication year");
  gen->add_option("--last-year", synth.last_year, "last publication year");
  gen->add_option("--subfields", synth.subfields, "number of subfields");
  gen->add_option("--countries", synth.countries, "number of countries");
  gen->add_option("--mean-refs", synth.mean_refs, "mean reference-list length in the last year");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      write_synthetic_dataset(synth_out, synth);
      std::cout << "wrote " << synth.works << " works to " << (fs::path(synth_out) / "works.jsonl").string() << "\n";
      return 0;
    }
    if (corr->parsed() && (!left.empty() || !right.empty())) {
      if (left.empty() || right.empty()) throw ArgumentError("standalone correlate needs --left and --right");
      const auto r = spearman(key_values(left, key_col, value_col), key_values(right, key_col, value_col));
      Table t({"common", "rho", "only_left", "only_right"});
      t.row() << r.common << r.rho << r.only_a.size() << r.only_b.size();
      std::cout << t.str();
      return 0;
    }
    if (fit->parsed() && !fit_input.empty()) {
      const auto t = read_table(fit_input, 0);
      std::vector<double> x, y;
      for (const auto& row : t.rows) {
        x.push_back(parse_double(row[t.column(x_col)]));
        y.push_back(parse_double(row[t.column(y_col)]));
      }
      const auto f = loglog_fit(x, y);
      Table out({"points", "exponent", "prefactor", "residual"});
      out.row() << f.points << f.exponent << f.prefactor << f.residual;
      std::cout << out.str();
      return 0;
    }
    for (auto* sub : app.get_subcommands()) return run_stage(stage_opts.at(sub->get_name()), sub->get_name());
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
