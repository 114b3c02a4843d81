#pragma once

// Scenario configuration (JSON), the pipeline runners behind the CLI, CSV
// emission and the analytic-vs-oracle deviation report. Field names mirror
// SystemSpec / InitialState / TimeGrid one-to-one; see scenarios/example.json.

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/f_functions.hpp"
#include "nlom/linearized.hpp"
#include "nlom/observables.hpp"
#include "nlom/oracle.hpp"
#include "nlom/reduced_state.hpp"
#include "nlom/special_functions.hpp"

namespace nlom {

using json = nlohmann::json;

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OracleConfig {
  std::vector<std::size_t> cutoffs_cavity;
  std::vector<std::size_t> cutoffs_mech;
  std::size_t budget = FockSpace::default_budget;
  bool purity = false;
  double tolerance = 1e-9;
};

struct EntropyConfig {
  bool enabled = false;
  std::size_t truncation = 0;  // 0: Poisson-tail rule
};

struct LinearizedConfig {
  double alpha = 0.0;
  std::size_t mode = 0;
  std::size_t res = 0;
  std::string regime = "mode-mixing";  // or "squeezing"
  std::size_t cutoff_cavity = 0;       // 0: skip the linearised oracle
  std::vector<std::size_t> cutoffs_mech;
  double tolerance = 1e-9;
};

struct ScanConfig {
  std::vector<double> omega_d;
  double horizon = 0.0;
};

struct Scenario {
  SystemSpec system;
  InitialState state;
  TimeGrid grid;
  std::optional<OracleConfig> oracle;
  EntropyConfig entropy;
  std::optional<LinearizedConfig> linearized;
  std::optional<ScanConfig> scan;
  std::vector<json> sweep;
};

namespace detail {

inline CouplingSpec parse_coupling(const json& j, const std::string& where) {
  if (j.is_number()) return CouplingSpec::constant(j.get<double>());
  if (!j.is_object()) throw ScenarioError(where + ": coupling must be a number or object");
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") return CouplingSpec::constant(j.value("base", 0.0));
  if (kind == "modulated_sin" || kind == "modulated_cos") {
    if (!j.contains("omega_d")) throw ScenarioError(where + ": modulated coupling needs omega_d");
    const double base = j.value("base", 0.0);
    const double kappa = j.value("kappa", 0.0);
    const double wd = j.at("omega_d").get<double>();
    return kind == "modulated_sin" ? CouplingSpec::modulated_sin(base, kappa, wd)
                                   : CouplingSpec::modulated_cos(base, kappa, wd);
  }
  if (kind == "tabulated") {
    if (!j.contains("samples")) throw ScenarioError(where + ": tabulated coupling needs samples");
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : j.at("samples")) {
      if (!row.is_array() || row.size() != 2)
        throw ScenarioError(where + ": tabulated samples must be [t, value] pairs");
      samples.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    return CouplingSpec::tabulated(std::move(samples));
  }
  throw ScenarioError(where + ": unknown coupling kind '" + kind + "'");
}

inline void parse_coupling_matrix(const json& j, const std::string& where, std::size_t n_cavity,
                                  std::size_t n_mech, std::vector<CouplingSpec>& out) {
  if (!j.is_array() || j.size() != n_cavity)
    throw ScenarioError(where + ": expected " + std::to_string(n_cavity) + " rows");
  for (std::size_t n = 0; n < n_cavity; ++n) {
    const auto& row = j[n];
    if (!row.is_array() || row.size() != n_mech)
      throw ScenarioError(where + "[" + std::to_string(n) + "]: expected " +
                          std::to_string(n_mech) + " entries");
    for (std::size_t p = 0; p < n_mech; ++p)
      out[n * n_mech + p] =
          parse_coupling(row[p], where + "[" + std::to_string(n) + "][" + std::to_string(p) + "]");
  }
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  Scenario sc;
  if (!j.contains("system")) throw ScenarioError("missing 'system' section");
  const auto& sys = j.at("system");
  if (!sys.contains("omega_c") || !sys.contains("omega_m"))
    throw ScenarioError("system: omega_c and omega_m are required");
  sc.system = SystemSpec::make(sys.at("omega_c").get<std::vector<double>>(),
                               sys.at("omega_m").get<std::vector<double>>());
  if (sys.contains("g_plus"))
    detail::parse_coupling_matrix(sys.at("g_plus"), "system.g_plus", sc.system.n_cavity,
                                  sc.system.n_mech, sc.system.g_plus);
  if (sys.contains("g_minus"))
    detail::parse_coupling_matrix(sys.at("g_minus"), "system.g_minus", sc.system.n_cavity,
                                  sc.system.n_mech, sc.system.g_minus);
  auto parse_lambda = [&](const char* key, std::vector<CouplingSpec>& out) {
    if (!sys.contains(key)) return;
    const auto& arr = sys.at(key);
    if (!arr.is_array() || arr.size() != sc.system.n_mech)
      throw ScenarioError(std::string("system.") + key + ": expected n_mech entries");
    for (std::size_t p = 0; p < sc.system.n_mech; ++p)
      out[p] = detail::parse_coupling(arr[p], std::string("system.") + key + "[" +
                                                  std::to_string(p) + "]");
  };
  parse_lambda("lambda_plus", sc.system.lambda_plus);
  parse_lambda("lambda_minus", sc.system.lambda_minus);

  if (j.contains("initial_state")) {
    const auto& st = j.at("initial_state");
    if (st.contains("coherent")) {
      for (const auto& [key, val] : st.at("coherent").items()) {
        const std::size_t k = static_cast<std::size_t>(std::stoul(key));
        if (val.is_array() && val.size() == 2)
          sc.state.coherent[k] = cplx(val[0].get<double>(), val[1].get<double>());
        else if (val.is_number())
          sc.state.coherent[k] = cplx(val.get<double>(), 0.0);
        else
          throw ScenarioError("initial_state.coherent['" + key + "']: expected [re, im]");
      }
    }
    if (st.contains("r"))
      sc.state.r = st.at("r").get<std::vector<double>>();
    else if (st.contains("thermal_occupation")) {
      for (double n : st.at("thermal_occupation").get<std::vector<double>>())
        sc.state.r.push_back(InitialState::r_from_occupation(n));
    }
  }
  if (sc.state.r.empty()) sc.state.r.assign(sc.system.n_mech, 0.0);

  if (!j.contains("grid")) throw ScenarioError("missing 'grid' section");
  const auto& gr = j.at("grid");
  if (gr.contains("times"))
    sc.grid.t = gr.at("times").get<std::vector<double>>();
  else if (gr.contains("t_end") && gr.contains("samples"))
    sc.grid = TimeGrid::uniform(gr.at("t_end").get<double>(), gr.at("samples").get<std::size_t>());
  else
    throw ScenarioError("grid: provide either 'times' or 't_end' + 'samples'");

  if (j.contains("oracle")) {
    const auto& orc = j.at("oracle");
    OracleConfig oc;
    oc.cutoffs_cavity = orc.at("cutoffs_cavity").get<std::vector<std::size_t>>();
    oc.cutoffs_mech = orc.at("cutoffs_mech").get<std::vector<std::size_t>>();
    oc.budget = orc.value("budget", FockSpace::default_budget);
    oc.purity = orc.value("purity", false);
    oc.tolerance = orc.value("tolerance", 1e-9);
    sc.oracle = oc;
  }
  if (j.contains("entropy")) {
    sc.entropy.enabled = j.at("entropy").value("enabled", true);
    sc.entropy.truncation = j.at("entropy").value("truncation", 0);
  }
  if (j.contains("linearized")) {
    const auto& lin = j.at("linearized");
    LinearizedConfig lc;
    lc.alpha = lin.at("alpha").get<double>();
    lc.mode = lin.value("mode", 0);
    lc.res = lin.value("res", 0);
    lc.regime = lin.value("regime", "mode-mixing");
    if (lc.regime != "mode-mixing" && lc.regime != "squeezing")
      throw ScenarioError("linearized.regime must be 'squeezing' or 'mode-mixing'");
    lc.cutoff_cavity = lin.value("cutoff_cavity", 0);
    if (lin.contains("cutoffs_mech"))
      lc.cutoffs_mech = lin.at("cutoffs_mech").get<std::vector<std::size_t>>();
    lc.tolerance = lin.value("tolerance", 1e-9);
    sc.linearized = lc;
  }
  if (j.contains("scan")) {
    ScanConfig scfg;
    scfg.omega_d = j.at("scan").at("omega_d").get<std::vector<double>>();
    scfg.horizon = j.at("scan").at("horizon").get<double>();
    sc.scan = scfg;
  }
  if (j.contains("sweep"))
    for (const auto& s : j.at("sweep")) sc.sweep.push_back(s);
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("parse error in '" + path + "': " + e.what());
  }
  return parse_scenario(j);
}

// ---------------------------------------------------------------------------
// Tables and CSV
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // full-precision scientific notation, 17 significant digits
  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
  }
  static std::string fmt(const G1Result& g) { return g.defined ? fmt(g.value) : "undefined"; }

  std::string to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i)
      out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << row[i] << (i + 1 < row.size() ? "," : "");
      out << "\n";
    }
    return out.str();
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_csv();
  }
};

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

inline std::vector<Pair> all_pairs(std::size_t n_cavity, std::size_t n_mech) {
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < n_cavity; ++k)
    for (std::size_t kp = k + 1; kp < n_cavity; ++kp) pairs.push_back(Pair::mode_mode(k, kp));
  for (std::size_t k = 0; k < n_cavity; ++k)
    for (std::size_t p = 0; p < n_mech; ++p) pairs.push_back(Pair::mode_res(k, p));
  for (std::size_t p = 0; p < n_mech; ++p)
    for (std::size_t pp = p + 1; pp < n_mech; ++pp) pairs.push_back(Pair::res_res(p, pp));
  return pairs;
}

inline std::string pair_column(const Pair& pr) {
  switch (pr.kind) {
    case Pair::Kind::ModeMode:
      return "g1_cc[" + std::to_string(pr.a) + "][" + std::to_string(pr.b) + "]";
    case Pair::Kind::ModeRes:
      return "g1_cm[" + std::to_string(pr.a) + "][" + std::to_string(pr.b) + "]";
    case Pair::Kind::ResRes:
      return "g1_mm[" + std::to_string(pr.a) + "][" + std::to_string(pr.b) + "]";
  }
  return {};
}

/// Populations, every g1 pair, and optionally S_N, over the grid.
inline Table analytic_table(const Scenario& sc, const FSet& fs) {
  const std::size_t N = sc.system.n_cavity, M = sc.system.n_mech;
  const auto pairs = all_pairs(N, M);
  Table tb;
  tb.header.push_back("t");
  for (std::size_t k = 0; k < N; ++k) tb.header.push_back("pop_c[" + std::to_string(k) + "]");
  for (std::size_t p = 0; p < M; ++p) tb.header.push_back("pop_m[" + std::to_string(p) + "]");
  for (const auto& pr : pairs) tb.header.push_back(pair_column(pr));
  if (sc.entropy.enabled) tb.header.push_back("S_N");
  for (std::size_t ti = 0; ti < fs.n_times(); ++ti) {
    std::vector<std::string> row;
    row.push_back(Table::fmt(fs.time(ti)));
    for (std::size_t k = 0; k < N; ++k)
      row.push_back(Table::fmt(cavity_population(sc.state, k)));
    for (std::size_t p = 0; p < M; ++p)
      row.push_back(Table::fmt(mech_population(sc.state, fs, p, ti)));
    for (const auto& pr : pairs) row.push_back(Table::fmt(g1(sc.state, fs, pr, ti)));
    if (sc.entropy.enabled)
      row.push_back(Table::fmt(linear_entropy(sc.state, fs, ti, sc.entropy.truncation)));
    tb.rows.push_back(std::move(row));
  }
  return tb;
}

/// Full FSet dump, one column per function.
inline Table fset_table(const FSet& fs) {
  const std::size_t N = fs.n_cavity(), M = fs.n_mech();
  Table tb;
  tb.header.push_back("t");
  for (std::size_t p = 0; p < M; ++p) tb.header.push_back("F_m[" + std::to_string(p) + "]");
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t p = 0; p < M; ++p)
      tb.header.push_back("Fc[" + std::to_string(n) + "][" + std::to_string(p) + "]");
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t p = 0; p < M; ++p)
        tb.header.push_back("Fnm[" + std::to_string(n) + "][" + std::to_string(m) + "][" +
                            std::to_string(p) + "]");
  for (std::size_t p = 0; p < M; ++p) tb.header.push_back("Fp[" + std::to_string(p) + "]");
  for (std::size_t p = 0; p < M; ++p) tb.header.push_back("Fm_[" + std::to_string(p) + "]");
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t p = 0; p < M; ++p)
      tb.header.push_back("Fk_plus[" + std::to_string(n) + "][" + std::to_string(p) + "]");
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t p = 0; p < M; ++p)
      tb.header.push_back("Fk_minus[" + std::to_string(n) + "][" + std::to_string(p) + "]");
  for (std::size_t ti = 0; ti < fs.n_times(); ++ti) {
    std::vector<std::string> row;
    row.push_back(Table::fmt(fs.time(ti)));
    for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_m(p, ti)));
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_c(n, p, ti)));
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t m = 0; m < N; ++m)
        for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_nm(n, m, p, ti)));
    for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_plus(p, ti)));
    for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_minus(p, ti)));
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_k_plus(n, p, ti)));
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t p = 0; p < M; ++p) row.push_back(Table::fmt(fs.f_k_minus(n, p, ti)));
    tb.rows.push_back(std::move(row));
  }
  return tb;
}

inline Table oracle_table(const OracleSeries& os, std::size_t n_cavity, std::size_t n_mech) {
  Table tb;
  tb.header.push_back("t");
  for (std::size_t k = 0; k < n_cavity; ++k) tb.header.push_back("pop_c[" + std::to_string(k) + "]");
  for (std::size_t p = 0; p < n_mech; ++p) tb.header.push_back("pop_m[" + std::to_string(p) + "]");
  for (const auto& pr : os.pairs) tb.header.push_back(pair_column(pr));
  if (!os.purity.empty()) tb.header.push_back("S_N");
  for (std::size_t ti = 0; ti < os.t.size(); ++ti) {
    std::vector<std::string> row;
    row.push_back(Table::fmt(os.t[ti]));
    for (std::size_t k = 0; k < n_cavity; ++k) row.push_back(Table::fmt(os.cavity_pop[k][ti]));
    for (std::size_t p = 0; p < n_mech; ++p) row.push_back(Table::fmt(os.mech_pop[p][ti]));
    for (std::size_t q = 0; q < os.pairs.size(); ++q)
      row.push_back(Table::fmt(os.g1_at(q, ti)));
    if (!os.purity.empty()) row.push_back(Table::fmt(1.0 - os.purity[ti]));
    tb.rows.push_back(std::move(row));
  }
  return tb;
}

/// Per-column max absolute and relative deviation between two tables sharing
/// header names (columns present in both are compared; undefined cells skip).
inline json compare_tables(const Table& a, const Table& b) {
  json out;
  json cols = json::object();
  for (std::size_t ca = 0; ca < a.header.size(); ++ca) {
    if (a.header[ca] == "t") continue;
    std::size_t cb = b.header.size();
    for (std::size_t j = 0; j < b.header.size(); ++j)
      if (b.header[j] == a.header[ca]) {
        cb = j;
        break;
      }
    if (cb == b.header.size()) continue;
    double max_abs = 0.0, max_rel = 0.0;
    std::size_t compared = 0;
    const std::size_t nrows = std::min(a.rows.size(), b.rows.size());
    for (std::size_t r = 0; r < nrows; ++r) {
      const std::string& sa = a.rows[r][ca];
      const std::string& sb = b.rows[r][cb];
      if (sa == "undefined" || sb == "undefined") continue;
      const double va = std::stod(sa), vb = std::stod(sb);
      const double dev = std::abs(va - vb);
      max_abs = std::max(max_abs, dev);
      max_rel = std::max(max_rel, dev / std::max({std::abs(va), std::abs(vb), 1e-12}));
      ++compared;
    }
    cols[a.header[ca]] = {{"max_abs_deviation", max_abs},
                          {"max_rel_deviation", max_rel},
                          {"points", compared}};
  }
  out["columns"] = cols;
  return out;
}

inline Table scan_table(const ResonanceScan& scan) {
  Table tb;
  tb.header = {"omega_d", "model", "exponent", "label"};
  for (const auto& row : scan.rows)
    tb.rows.push_back({Table::fmt(row.omega_d), row.model, Table::fmt(row.exponent), row.label});
  return tb;
}

inline Table identity_table(const IdentityReport& rep) {
  Table tb;
  tb.header = {"identity", "alpha", "r", "mu_abs2", "deviation"};
  for (const auto& row : rep.rows)
    tb.rows.push_back({row.name, Table::fmt(row.alpha), Table::fmt(row.r),
                       Table::fmt(row.mu_abs2), Table::fmt(row.deviation)});
  return tb;
}

}  // namespace nlom
