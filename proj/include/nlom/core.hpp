#pragma once

// Physical system description for multimode/multiresonator optomechanical-like
// models: mode frequencies, time-dependent couplings, initial states and time
// grids. All types are immutable value types once constructed and can be shared
// freely across threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlom {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// hbar / k_B in SI units (K*s), used only for temperature conversion.
inline constexpr double hbar_over_kb = 7.638232577577646e-12;

enum class CouplingKind { Constant, ModulatedSin, ModulatedCos, Tabulated };

/// One scalar coupling g(t) entering the Hamiltonian. Modulated kinds evaluate
/// to base*(1 + kappa*sin(omega_d*t)) or base*(1 + kappa*cos(omega_d*t));
/// tabulated couplings are linearly interpolated between samples.
struct CouplingSpec {
  CouplingKind kind = CouplingKind::Constant;
  double base = 0.0;
  double kappa = 0.0;
  double omega_d = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t, value), strictly increasing t

  static CouplingSpec zero() { return CouplingSpec{}; }

  static CouplingSpec constant(double base) {
    CouplingSpec c;
    c.base = base;
    return c;
  }

  static CouplingSpec modulated_sin(double base, double kappa, double omega_d) {
    CouplingSpec c;
    c.kind = CouplingKind::ModulatedSin;
    c.base = base;
    c.kappa = kappa;
    c.omega_d = omega_d;
    return c;
  }

  static CouplingSpec modulated_cos(double base, double kappa, double omega_d) {
    CouplingSpec c;
    c.kind = CouplingKind::ModulatedCos;
    c.base = base;
    c.kappa = kappa;
    c.omega_d = omega_d;
    return c;
  }

  static CouplingSpec tabulated(std::vector<std::pair<double, double>> samples) {
    CouplingSpec c;
    c.kind = CouplingKind::Tabulated;
    c.samples = std::move(samples);
    return c;
  }

  bool is_identically_zero() const {
    if (kind == CouplingKind::Tabulated) {
      return std::all_of(samples.begin(), samples.end(),
                         [](const auto& s) { return s.second == 0.0; });
    }
    return base == 0.0;
  }

  /// g(t). Tabulated kinds throw std::out_of_range outside the sample range.
  double operator()(double t) const {
    switch (kind) {
      case CouplingKind::Constant:
        return base;
      case CouplingKind::ModulatedSin:
        return base * (1.0 + kappa * std::sin(omega_d * t));
      case CouplingKind::ModulatedCos:
        return base * (1.0 + kappa * std::cos(omega_d * t));
      case CouplingKind::Tabulated: {
        if (samples.empty()) throw std::out_of_range("tabulated coupling has no samples");
        if (t < samples.front().first || t > samples.back().first)
          throw std::out_of_range("tabulated coupling evaluated at t=" + std::to_string(t) +
                                  " outside sample range");
        auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const auto& s, double x) { return s.first < x; });
        if (hi == samples.begin()) return hi->second;
        auto lo = std::prev(hi);
        if (hi == samples.end()) return lo->second;
        const double w = (t - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
      }
    }
    return 0.0;
  }
};

/// The closed multimode Hamiltonian: cavity modes a_n with frequencies
/// omega_c[n], resonators b_p with frequencies omega_m[p], quadrature drives
/// lambda_p^(+-) and radiation-pressure-like couplings g_np^(+-) which multiply
/// N_n B_p^(+-). Optical displacement drives are intentionally not representable.
struct SystemSpec {
  std::size_t n_cavity = 0;
  std::size_t n_mech = 0;
  std::vector<double> omega_c;  // length n_cavity
  std::vector<double> omega_m;  // length n_mech
  std::vector<CouplingSpec> g_plus;   // n_cavity x n_mech, row-major [n*n_mech + p]
  std::vector<CouplingSpec> g_minus;  // same layout
  std::vector<CouplingSpec> lambda_plus;   // length n_mech
  std::vector<CouplingSpec> lambda_minus;  // length n_mech

  static SystemSpec make(std::vector<double> omega_c_in, std::vector<double> omega_m_in) {
    SystemSpec s;
    s.n_cavity = omega_c_in.size();
    s.n_mech = omega_m_in.size();
    s.omega_c = std::move(omega_c_in);
    s.omega_m = std::move(omega_m_in);
    s.g_plus.assign(s.n_cavity * s.n_mech, CouplingSpec::zero());
    s.g_minus.assign(s.n_cavity * s.n_mech, CouplingSpec::zero());
    s.lambda_plus.assign(s.n_mech, CouplingSpec::zero());
    s.lambda_minus.assign(s.n_mech, CouplingSpec::zero());
    return s;
  }

  const CouplingSpec& g_p(std::size_t n, std::size_t p) const { return g_plus[n * n_mech + p]; }
  const CouplingSpec& g_m(std::size_t n, std::size_t p) const { return g_minus[n * n_mech + p]; }
  CouplingSpec& g_p(std::size_t n, std::size_t p) { return g_plus[n * n_mech + p]; }
  CouplingSpec& g_m(std::size_t n, std::size_t p) { return g_minus[n * n_mech + p]; }
};

/// Initial state: selected cavity modes in coherent states |mu_k> (all others
/// vacuum), resonators in thermal states with parameter r_p >= 0 defined by
/// tanh(r_p) = exp(-hbar*omega/(2 kB T)). N_i,p = sinh^2(r_p) is the initial
/// thermal phonon number.
struct InitialState {
  std::map<std::size_t, cplx> coherent;  // mode index -> mu_k
  std::vector<double> r;                 // length n_mech

  cplx mu(std::size_t k) const {
    auto it = coherent.find(k);
    return it == coherent.end() ? cplx(0.0, 0.0) : it->second;
  }

  double thermal_occupation(std::size_t p) const {
    const double s = std::sinh(r[p]);
    return s * s;
  }

  std::vector<std::size_t> coherent_modes() const {
    std::vector<std::size_t> out;
    for (const auto& [k, m] : coherent)
      if (m != cplx(0.0, 0.0)) out.push_back(k);
    return out;
  }

  static double r_from_temperature(double omega_m, double temperature_kelvin) {
    if (temperature_kelvin <= 0.0) return 0.0;
    return std::atanh(std::exp(-hbar_over_kb * omega_m / (2.0 * temperature_kelvin)));
  }

  static double r_from_occupation(double n_thermal) {
    return std::asinh(std::sqrt(std::max(0.0, n_thermal)));
  }
};

/// Strictly increasing sample times starting at 0.
struct TimeGrid {
  std::vector<double> t;

  static TimeGrid uniform(double t_end, std::size_t n_samples) {
    TimeGrid g;
    g.t.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
      g.t[i] = t_end * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    return g;
  }

  std::size_t size() const { return t.size(); }
  double back() const { return t.back(); }
  bool is_uniform(double rel_tol = 1e-12) const {
    if (t.size() < 3) return true;
    const double h = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i)
      if (std::abs((t[i] - t[i - 1]) - h) > rel_tol * std::max(1.0, std::abs(h))) return false;
    return true;
  }
};

struct ValidationIssue {
  bool is_error = true;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const {
    return std::none_of(issues.begin(), issues.end(),
                        [](const ValidationIssue& i) { return i.is_error; });
  }
  bool empty() const { return issues.empty(); }
  std::size_t error_count() const {
    return static_cast<std::size_t>(std::count_if(
        issues.begin(), issues.end(), [](const ValidationIssue& i) { return i.is_error; }));
  }
  void error(std::string msg) { issues.push_back({true, std::move(msg)}); }
  void warn(std::string msg) { issues.push_back({false, std::move(msg)}); }
};

namespace detail {

inline void validate_coupling(const CouplingSpec& c, const std::string& name,
                              ValidationReport& rep, double t_end) {
  if (c.kind == CouplingKind::Tabulated) {
    if (c.samples.empty()) {
      rep.error(name + ": tabulated coupling has no samples");
      return;
    }
    for (std::size_t i = 1; i < c.samples.size(); ++i)
      if (c.samples[i].first <= c.samples[i - 1].first) {
        rep.error(name + ": tabulated sample times must be strictly increasing");
        break;
      }
    if (c.samples.front().first > 0.0 || c.samples.back().first < t_end)
      rep.error(name + ": tabulated samples must cover the grid range [0, " +
                std::to_string(t_end) + "]");
  }
  if ((c.kind == CouplingKind::ModulatedSin || c.kind == CouplingKind::ModulatedCos) &&
      c.omega_d <= 0.0 && c.base != 0.0)
    rep.error(name + ": modulated coupling requires omega_d > 0");
  if (c.base < 0.0) rep.warn(name + ": negative base amplitude");
}

}  // namespace detail

/// Collects every violated invariant of (spec, state, grid). An empty report
/// means the scenario is runnable as-is.
inline ValidationReport validate_spec(const SystemSpec& spec, const InitialState& state,
                                      const TimeGrid& grid) {
  ValidationReport rep;

  if (spec.n_cavity == 0) rep.error("system must have at least one cavity mode");
  if (spec.n_mech == 0) rep.error("system must have at least one resonator");
  if (spec.omega_c.size() != spec.n_cavity)
    rep.error("omega_c length does not match n_cavity");
  if (spec.omega_m.size() != spec.n_mech) rep.error("omega_m length does not match n_mech");
  for (double w : spec.omega_c)
    if (!(w > 0.0)) rep.error("cavity frequency must be positive");
  for (double w : spec.omega_m)
    if (!(w > 0.0)) rep.error("frequency must be positive");

  if (spec.g_plus.size() != spec.n_cavity * spec.n_mech)
    rep.error("g_plus shape does not match n_cavity x n_mech");
  if (spec.g_minus.size() != spec.n_cavity * spec.n_mech)
    rep.error("g_minus shape does not match n_cavity x n_mech");
  if (spec.lambda_plus.size() != spec.n_mech)
    rep.error("lambda_plus length does not match n_mech");
  if (spec.lambda_minus.size() != spec.n_mech)
    rep.error("lambda_minus length does not match n_mech");

  const double t_end = grid.t.empty() ? 0.0 : grid.t.back();
  for (std::size_t i = 0; i < spec.g_plus.size(); ++i)
    detail::validate_coupling(spec.g_plus[i], "g_plus[" + std::to_string(i / spec.n_mech) +
                                                  "][" + std::to_string(i % spec.n_mech) + "]",
                              rep, t_end);
  for (std::size_t i = 0; i < spec.g_minus.size(); ++i)
    detail::validate_coupling(spec.g_minus[i], "g_minus[" + std::to_string(i / spec.n_mech) +
                                                   "][" + std::to_string(i % spec.n_mech) + "]",
                              rep, t_end);
  for (std::size_t p = 0; p < spec.lambda_plus.size(); ++p)
    detail::validate_coupling(spec.lambda_plus[p], "lambda_plus[" + std::to_string(p) + "]", rep,
                              t_end);
  for (std::size_t p = 0; p < spec.lambda_minus.size(); ++p)
    detail::validate_coupling(spec.lambda_minus[p], "lambda_minus[" + std::to_string(p) + "]",
                              rep, t_end);

  if (state.r.size() != spec.n_mech) rep.error("thermal parameter list length must be n_mech");
  for (double rp : state.r)
    if (rp < 0.0) rep.error("thermal parameter r_p must be >= 0");
  for (const auto& [k, m] : state.coherent) {
    if (k >= spec.n_cavity)
      rep.error("coherent amplitude given for nonexistent mode " + std::to_string(k));
    if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
      rep.error("coherent amplitude must be finite");
  }

  if (grid.t.size() < 2) rep.error("time grid needs at least 2 points");
  if (!grid.t.empty() && grid.t.front() != 0.0) rep.error("time grid must start at t=0");
  for (std::size_t i = 1; i < grid.t.size(); ++i)
    if (grid.t[i] <= grid.t[i - 1]) {
      rep.error("time grid must be strictly increasing");
      break;
    }

  return rep;
}

}  // namespace nlom
