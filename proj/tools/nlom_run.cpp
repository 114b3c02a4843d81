// Scenario runner: parses a scenario config, dispatches the requested
// pipelines and writes deterministic CSV/JSON artifacts.
//
//   nlom_run --pipeline analytic [--pipeline oracle ...] [--compare]
//            [--out DIR] [--grid-refine K] [--jobs N] scenario.json
//
// Exit codes: 0 success, 2 parse failure, 3 validation failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "nlom/nlom.hpp"
#include "nlom/scenario.hpp"

namespace fs = std::filesystem;
using nlom::json;

namespace {

struct RunOptions {
  std::vector<std::string> pipelines;
  bool compare = false;
  std::size_t grid_refine = 1;
  std::string out_dir = ".";
};

bool has_pipeline(const RunOptions& opt, const std::string& name) {
  for (const auto& p : opt.pipelines)
    if (p == name) return true;
  return false;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

int run_one(const json& config, const RunOptions& opt, const fs::path& out_dir) {
  nlom::Scenario sc = nlom::parse_scenario(config);

  const auto report = nlom::validate_spec(sc.system, sc.state, sc.grid);
  for (const auto& issue : report.issues)
    std::cerr << (issue.is_error ? "error: " : "warning: ") << issue.message << "\n";
  if (!report.ok()) {
    json err;
    err["error"] = "validation";
    err["issues"] = json::array();
    for (const auto& issue : report.issues)
      err["issues"].push_back({{"severity", issue.is_error ? "error" : "warning"},
                               {"message", issue.message}});
    std::cerr << err.dump(2) << "\n";
    return 3;
  }

  fs::create_directories(out_dir);

  std::optional<nlom::FSet> fset;
  std::optional<nlom::Table> analytic;
  auto need_analytic = [&]() {
    if (!fset) {
      fset.emplace(nlom::compute_f_set(sc.system, sc.grid, nlom::QuadratureRule::Simpson,
                                       opt.grid_refine));
      for (const auto& w : fset->warnings()) std::cerr << "warning: " << w << "\n";
    }
    if (!analytic) analytic.emplace(nlom::analytic_table(sc, *fset));
  };

  if (has_pipeline(opt, "analytic")) {
    need_analytic();
    analytic->write_csv((out_dir / "analytic.csv").string());
    nlom::fset_table(*fset).write_csv((out_dir / "fset.csv").string());
  }

  if (has_pipeline(opt, "oracle") || (opt.compare && sc.oracle)) {
    if (!sc.oracle) {
      std::cerr << "error: oracle pipeline requested but the scenario has no 'oracle' section\n";
      return 3;
    }
    nlom::OracleOptions oo;
    oo.budget = sc.oracle->budget;
    oo.measure_purity = sc.oracle->purity;
    oo.prop.local_tol = sc.oracle->tolerance;
    auto prob = nlom::make_oracle_problem(sc.system, sc.state, sc.oracle->cutoffs_cavity,
                                          sc.oracle->cutoffs_mech, sc.oracle->budget);
    auto series = nlom::run_oracle(prob, sc.grid,
                                   nlom::all_pairs(sc.system.n_cavity, sc.system.n_mech), oo);
    auto table = nlom::oracle_table(series, sc.system.n_cavity, sc.system.n_mech);
    table.write_csv((out_dir / "oracle.csv").string());
    if (opt.compare) {
      need_analytic();
      json cmp = nlom::compare_tables(*analytic, table);
      cmp["max_norm_drift"] = series.max_norm_drift;
      write_json(out_dir / "compare.json", cmp);
    }
  }

  if (has_pipeline(opt, "linearized")) {
    if (!sc.linearized) {
      std::cerr << "error: linearized pipeline requested but no 'linearized' section\n";
      return 3;
    }
    const auto& lc = *sc.linearized;
    nlom::LinearizedSpec lin{lc.alpha, lc.mode, lc.res, sc.system};
    const auto regime = lc.regime == "squeezing" ? nlom::ResonantRegime::Squeezing
                                                 : nlom::ResonantRegime::ModeMixing;
    std::optional<nlom::OracleSeries> oracle_series;
    if (lc.cutoff_cavity > 0 && !lc.cutoffs_mech.empty()) {
      nlom::OracleOptions lo;
      lo.prop.local_tol = lc.tolerance;
      oracle_series = nlom::linearized_oracle_populations(lin, sc.state, sc.grid,
                                                          lc.cutoff_cavity, lc.cutoffs_mech, lo);
    }
    nlom::Table tb;
    tb.header = {"t", "rwa_pop_c", "rwa_pop_m"};
    if (oracle_series) {
      tb.header.push_back("oracle_pop_c");
      tb.header.push_back("oracle_pop_m");
    }
    for (std::size_t ti = 0; ti < sc.grid.size(); ++ti) {
      const auto rwa =
          nlom::linearized_resonant_populations(lin, regime, sc.state, sc.grid.t[ti]);
      std::vector<std::string> row = {nlom::Table::fmt(sc.grid.t[ti]),
                                      nlom::Table::fmt(rwa.cavity), nlom::Table::fmt(rwa.mech)};
      if (oracle_series) {
        row.push_back(nlom::Table::fmt(lc.alpha * lc.alpha +
                                       oracle_series->cavity_pop[0][ti]));
        row.push_back(nlom::Table::fmt(oracle_series->mech_pop[lc.res][ti]));
      }
      tb.rows.push_back(std::move(row));
    }
    tb.write_csv((out_dir / "linearized.csv").string());
  }

  if (has_pipeline(opt, "scan")) {
    if (!sc.scan || !sc.linearized) {
      std::cerr << "error: scan pipeline needs 'scan' and 'linearized' sections\n";
      return 3;
    }
    nlom::LinearizedSpec lin{sc.linearized->alpha, sc.linearized->mode, sc.linearized->res,
                             sc.system};
    auto scan = nlom::resonance_scan(lin, sc.state, sc.scan->omega_d, sc.scan->horizon);
    for (const auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
    nlom::scan_table(scan).write_csv((out_dir / "scan.csv").string());
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimode optomechanical dynamics scenario runner"};
  RunOptions opt;
  std::string scenario_path;
  std::size_t jobs = 1;
  app.add_option("--pipeline", opt.pipelines,
                 "pipelines to run: analytic, oracle, linearized, scan, identities")
      ->required();
  app.add_flag("--compare", opt.compare, "emit the analytic-vs-oracle deviation report");
  app.add_option("--jobs", jobs, "parallel sweep points")->default_val(1);
  app.add_option("--out", opt.out_dir, "output directory")->default_val(".");
  app.add_option("--grid-refine", opt.grid_refine, "quadrature ladder refinement factor")
      ->default_val(1);
  app.add_option("scenario", scenario_path, "scenario config file (JSON)");
  CLI11_PARSE(app, argc, argv);

  for (const auto& p : opt.pipelines)
    if (p != "analytic" && p != "oracle" && p != "linearized" && p != "scan" &&
        p != "identities") {
      std::cerr << "error: unknown pipeline '" << p
                << "' (expected analytic, oracle, linearized, scan, identities)\n";
      return 2;
    }

  try {
    // The identities pipeline needs no scenario.
    if (has_pipeline(opt, "identities")) {
      const auto rep = nlom::identity_suite();
      fs::create_directories(opt.out_dir);
      nlom::identity_table(rep).write_csv((fs::path(opt.out_dir) / "identities.csv").string());
      std::cout << "identity suite: " << rep.rows.size()
                << " checks, max deviation = " << rep.max_deviation << "\n";
    }

    const bool needs_scenario =
        has_pipeline(opt, "analytic") || has_pipeline(opt, "oracle") ||
        has_pipeline(opt, "linearized") || has_pipeline(opt, "scan");
    if (!needs_scenario) return 0;

    if (scenario_path.empty()) {
      std::cerr << "error: a scenario file is required for the requested pipelines\n";
      return 2;
    }
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "error: cannot open '" << scenario_path << "'\n";
      return 2;
    }
    json config;
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      std::cerr << "{\"error\":\"parse\",\"detail\":" << json(e.what()).dump() << "}\n";
      return 2;
    }

    json sweep = config.value("sweep", json::array());
    if (sweep.empty()) return run_one(config, opt, opt.out_dir);

    std::vector<json> configs;
    for (const auto& patch : sweep) {
      json merged = config;
      merged.erase("sweep");
      merged.merge_patch(patch);
      configs.push_back(std::move(merged));
    }
    std::vector<int> status(configs.size(), 0);
    auto worker = [&](std::size_t begin, std::size_t step) {
      for (std::size_t i = begin; i < configs.size(); i += step)
        status[i] = run_one(configs[i], opt,
                            fs::path(opt.out_dir) / ("sweep_" + std::to_string(i)));
    };
    if (jobs <= 1) {
      worker(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker, j, jobs);
      for (auto& th : pool) th.join();
    }
    for (int s : status)
      if (s != 0) return s;
    return 0;
  } catch (const nlom::ScenarioError& e) {
    std::cerr << "{\"error\":\"parse\",\"detail\":" << json(e.what()).dump() << "}\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
