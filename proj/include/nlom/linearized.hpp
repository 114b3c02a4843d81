#pragma once

// Linearised-model resonant (RWA) closed forms, the full model's modulated
// populations, the resonance scan that contrasts the two, and a truncated-Fock
// oracle for the time-dependent linearised Hamiltonian (no RWA).
//
// RWA forms: modulating g(t) = g (1 + kappa sin(w_d t)) at w_d = w_c + w_m
// leaves the pair term with effective strength alpha kappa g / 2, so the
// squeeze/mixing angle is theta = alpha kappa g t / 2 and the vacuum
// contributes alongside N_i. These forms were checked against the linearised
// oracle below.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/f_functions.hpp"
#include "nlom/fock.hpp"
#include "nlom/oracle.hpp"

namespace nlom {

enum class ResonantRegime { Squeezing, ModeMixing };

struct PopulationPair {
  double cavity = 0.0;
  double mech = 0.0;
};

/// Classical amplitudes and the driven mode/resonator of the linearised model.
struct LinearizedSpec {
  double alpha = 0.0;      // real classical amplitude of the driven mode
  std::size_t mode = 0;    // cavity index k~
  std::size_t res = 0;     // resonator index p~
  SystemSpec base;         // frequencies and the modulated couplings
};

/// RWA populations: squeezing (w_d = w_c + w_m) grows as sinh^2, mode mixing
/// (w_d = w_c - w_m) swaps populations as sin^2/cos^2; theta = alpha kappa g t / 2.
inline PopulationPair linearized_resonant_populations(double alpha, double kappa, double g,
                                                      double n_i, ResonantRegime regime,
                                                      double t) {
  const double theta = 0.5 * alpha * kappa * g * t;
  PopulationPair out;
  if (regime == ResonantRegime::Squeezing) {
    const double sh = std::sinh(theta);
    out.cavity = alpha * alpha + (n_i + 1.0) * sh * sh;
    out.mech = n_i + (n_i + 1.0) * sh * sh;
  } else {
    const double sn = std::sin(theta);
    out.cavity = alpha * alpha + n_i * sn * sn;
    out.mech = n_i * (1.0 - sn * sn);
  }
  return out;
}

inline PopulationPair linearized_resonant_populations(const LinearizedSpec& lin,
                                                      ResonantRegime regime,
                                                      const InitialState& state, double t) {
  const CouplingSpec& g = lin.base.g_p(lin.mode, lin.res);
  return linearized_resonant_populations(lin.alpha, g.kappa, g.base,
                                         state.thermal_occupation(lin.res), regime, t);
}

/// Full-model populations for a single coherent mode with a constant or
/// modulated coupling, from the closed-form F_k integral.
inline PopulationPair full_model_modulated_populations(const CouplingSpec& g, double omega_m,
                                                       cplx mu, double n_i, double t) {
  const double mu2 = std::norm(mu);
  const cplx fk = coupling_phase_integral(g, omega_m, t);
  return {mu2, n_i + std::norm(fk) * (mu2 + mu2 * mu2)};
}

inline PopulationPair full_model_modulated_populations(const SystemSpec& spec,
                                                       const InitialState& state, double t) {
  const auto modes = state.coherent_modes();
  if (modes.size() != 1)
    throw std::invalid_argument("full_model_modulated_populations: one coherent mode required");
  const std::size_t kt = modes.front();
  if (spec.n_mech != 1)
    throw std::invalid_argument("full_model_modulated_populations: single resonator expected");
  return full_model_modulated_populations(spec.g_p(kt, 0), spec.omega_m[0], state.mu(kt),
                                          state.thermal_occupation(0), t);
}

// ---------------------------------------------------------------------------
// Growth-metric fitting
// ---------------------------------------------------------------------------

namespace detail {

/// Least-squares slope of log(mean-over-window of y) against log(window
/// center), for windows of length `window` covering [t_min, t_max]. Window
/// means suppress the oscillatory cross terms that bias a pointwise fit.
inline double fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& y,
                                  double t_min, double t_max, double window) {
  std::vector<double> lx, ly;
  double w_start = t_min;
  while (w_start + window <= t_max + 1e-12) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= w_start && t[i] < w_start + window) {
        acc += y[i];
        ++count;
      }
    if (count > 0) {
      const double mean = acc / static_cast<double>(count);
      if (mean > 1e-300) {
        lx.push_back(std::log(w_start + 0.5 * window));
        ly.push_back(std::log(mean));
      }
    }
    w_start += window;
  }
  if (lx.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Least-squares fit of y ~ c2 t^2 + c1 t + c0 over [t_min, t_max]; returns c2.
inline double fit_quadratic_coefficient(const std::vector<double>& t,
                                        const std::vector<double>& y, double t_min,
                                        double t_max) {
  double s[5] = {0, 0, 0, 0, 0};
  double b[3] = {0, 0, 0};
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    double pw = 1.0;
    for (int k = 0; k <= 4; ++k) {
      s[k] += pw;
      if (k <= 2) b[k] += pw * y[i];
      pw *= t[i];
    }
  }
  // solve the 3x3 normal equations [s0 s1 s2; s1 s2 s3; s2 s3 s4] c = b
  double A[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  double rhs[3] = {b[0], b[1], b[2]};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c2 = col; c2 < 3; ++c2) A[r][c2] -= f * A[col][c2];
      rhs[r] -= f * rhs[col];
    }
  }
  double c[3];
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int c2 = r + 1; c2 < 3; ++c2) acc -= A[r][c2] * c[c2];
    c[r] = acc / A[r][r];
  }
  return c[2];
}

}  // namespace detail

struct ScanRow {
  double omega_d = 0.0;
  std::string model;  // "full" | "linearized"
  double exponent = 0.0;
  std::string label;  // "resonant" | "bounded"
};

struct ResonanceScan {
  std::vector<ScanRow> rows;
  std::vector<std::string> warnings;
};

inline constexpr double resonance_exponent_threshold = 1.5;

/// For each drive frequency, fits the growth exponent of the phonon-population
/// envelope for the full model and for the linearised RWA prediction, and
/// labels each resonant (exponent > 1.5) or bounded.
inline ResonanceScan resonance_scan(const LinearizedSpec& lin, const InitialState& state,
                                    const std::vector<double>& omega_d_list, double horizon) {
  const std::size_t kt = lin.mode, pt = lin.res;
  const CouplingSpec& g0 = lin.base.g_p(kt, pt);
  const double omega_m = lin.base.omega_m[pt];
  const double omega_c = lin.base.omega_c[kt];
  const double n_i = state.thermal_occupation(pt);
  const cplx mu = state.mu(kt);

  ResonanceScan scan;
  for (double wd : omega_d_list) {
    if (wd > 0.0 && horizon < 10.0 * (2.0 * pi / wd)) {
      scan.warnings.push_back("horizon " + std::to_string(horizon) +
                              " is shorter than 10 drive periods at omega_d = " +
                              std::to_string(wd));
      break;
    }
  }

  for (double wd : omega_d_list) {
    CouplingSpec g = g0;
    g.omega_d = wd;
    const double fastest = std::max({omega_m, wd, 1e-6});
    const double window = 2.0 * pi / std::min(omega_m, wd > 0 ? wd : omega_m);
    const std::size_t samples =
        static_cast<std::size_t>(std::ceil(horizon * fastest / (2.0 * pi) * 40.0)) + 1;
    std::vector<double> t(samples), y_full(samples), y_lin(samples);
    const bool squeeze = std::abs(wd - (omega_c + omega_m)) < 1e-9 * std::max(1.0, omega_c);
    const bool mixing = std::abs(wd - (omega_c - omega_m)) < 1e-9 * std::max(1.0, omega_c);
    for (std::size_t i = 0; i < samples; ++i) {
      t[i] = horizon * static_cast<double>(i) / static_cast<double>(samples - 1);
      const auto full = full_model_modulated_populations(g, omega_m, mu, n_i, t[i]);
      y_full[i] = std::abs(full.mech - n_i);
      if (squeeze)
        y_lin[i] = std::abs(
            linearized_resonant_populations(lin.alpha, g.kappa, g.base, n_i,
                                            ResonantRegime::Squeezing, t[i])
                .mech -
            n_i);
      else if (mixing)
        y_lin[i] = std::abs(
            linearized_resonant_populations(lin.alpha, g.kappa, g.base, n_i,
                                            ResonantRegime::ModeMixing, t[i])
                .mech -
            n_i);
      else
        y_lin[i] = 0.0;  // no RWA-resonant term survives
    }
    auto classify = [&](const std::vector<double>& y) -> ScanRow {
      const double peak = *std::max_element(y.begin(), y.end());
      if (peak < 1e-14) return {wd, "", 0.0, "bounded"};
      const double expn =
          detail::fit_growth_exponent(t, y, 0.25 * horizon, horizon, window);
      return {wd, "", expn, expn > resonance_exponent_threshold ? "resonant" : "bounded"};
    };
    ScanRow full_row = classify(y_full);
    full_row.model = "full";
    ScanRow lin_row = classify(y_lin);
    lin_row.model = "linearized";
    scan.rows.push_back(full_row);
    scan.rows.push_back(lin_row);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Linearised truncated-Fock oracle (no RWA)
// ---------------------------------------------------------------------------

namespace detail {

inline CouplingSpec scale_coupling(CouplingSpec c, double factor) {
  c.base *= factor;
  for (auto& s : c.samples) s.second *= factor;
  return c;
}

}  // namespace detail

/// H_lin(t) = w_c da^dag da + sum_p w_m,p b^dag b + sum_p g_p(t) alpha^2 B_p^+
///            + sum_p alpha g_p(t) (da^dag + da) B_p^+,
/// with da the fluctuation mode of the single driven cavity.
inline std::vector<FockTerm> hamiltonian_terms_linearized(const LinearizedSpec& lin) {
  std::vector<FockTerm> terms;
  terms.push_back(
      {FockTerm::Kind::Number, 0, 0, CouplingSpec::constant(lin.base.omega_c[lin.mode])});
  for (std::size_t p = 0; p < lin.base.n_mech; ++p)
    terms.push_back(
        {FockTerm::Kind::Number, 1 + p, 0, CouplingSpec::constant(lin.base.omega_m[p])});
  for (std::size_t p = 0; p < lin.base.n_mech; ++p) {
    const CouplingSpec& g = lin.base.g_p(lin.mode, p);
    if (g.is_identically_zero()) continue;
    terms.push_back(
        {FockTerm::Kind::BPlus, 0, p, detail::scale_coupling(g, lin.alpha * lin.alpha)});
    terms.push_back({FockTerm::Kind::APlusBPlus, 0, p, detail::scale_coupling(g, lin.alpha)});
  }
  return terms;
}

/// One rotating interaction-picture term c(t) (X e^{i w t} + X^dag e^{-i w t}),
/// with X one of a^dag b_p^dag, a^dag b_p, b_p^dag.
struct RotatingTerm {
  enum class Kind { PairCreate, Hop, BDisp };
  Kind kind;
  std::size_t res = 0;
  CouplingSpec coeff;
  double phase_freq = 0.0;
};

/// Interaction picture of H_lin with respect to the free Hamiltonian: only the
/// coupling terms survive, carrying phases at w_c +- w_m,p and w_m,p. The
/// occupation numbers are picture-independent, so populations can be measured
/// directly on the interaction-picture state.
inline std::vector<RotatingTerm> interaction_picture_terms(const LinearizedSpec& lin) {
  std::vector<RotatingTerm> terms;
  const double wc = lin.base.omega_c[lin.mode];
  for (std::size_t p = 0; p < lin.base.n_mech; ++p) {
    const CouplingSpec& g = lin.base.g_p(lin.mode, p);
    if (g.is_identically_zero()) continue;
    const double wm = lin.base.omega_m[p];
    terms.push_back({RotatingTerm::Kind::PairCreate, p, detail::scale_coupling(g, lin.alpha),
                     wc + wm});
    terms.push_back({RotatingTerm::Kind::Hop, p, detail::scale_coupling(g, lin.alpha), wc - wm});
    terms.push_back({RotatingTerm::Kind::BDisp, p,
                     detail::scale_coupling(g, lin.alpha * lin.alpha), wm});
  }
  return terms;
}

namespace detail {

inline void apply_rotating(const std::vector<RotatingTerm>& terms, const FockSpace& space,
                           double t, const StateVector& in, StateVector& out) {
  out.setZero(in.size());
  const std::size_t sa = space.strides[0];
  const std::size_t ca = space.cutoffs[0];
  for (const auto& term : terms) {
    const double c = term.coeff(t);
    if (c == 0.0) continue;
    const cplx up = c * std::exp(cplx(0.0, term.phase_freq * t));
    const cplx down = std::conj(up);
    const std::size_t ub = space.mech_mode(term.res);
    const std::size_t sb = space.strides[ub];
    const std::size_t cb = space.cutoffs[ub];
    for (std::size_t idx = 0; idx < space.dim; ++idx) {
      const cplx v = in[idx];
      if (v == cplx(0.0, 0.0)) continue;
      const std::size_t nb = space.occupation(idx, ub);
      switch (term.kind) {
        case RotatingTerm::Kind::PairCreate: {
          const std::size_t na = space.occupation(idx, 0);
          if (na < ca && nb < cb)
            out[idx + sa + sb] += up * std::sqrt(double(na + 1)) * std::sqrt(double(nb + 1)) * v;
          if (na > 0 && nb > 0)
            out[idx - sa - sb] += down * std::sqrt(double(na)) * std::sqrt(double(nb)) * v;
          break;
        }
        case RotatingTerm::Kind::Hop: {
          const std::size_t na = space.occupation(idx, 0);
          if (na < ca && nb > 0)
            out[idx + sa - sb] += up * std::sqrt(double(na + 1)) * std::sqrt(double(nb)) * v;
          if (na > 0 && nb < cb)
            out[idx - sa + sb] += down * std::sqrt(double(na)) * std::sqrt(double(nb + 1)) * v;
          break;
        }
        case RotatingTerm::Kind::BDisp: {
          if (nb < cb) out[idx + sb] += up * std::sqrt(double(nb + 1)) * v;
          if (nb > 0) out[idx - sb] += down * std::sqrt(double(nb)) * v;
          break;
        }
      }
    }
  }
}

}  // namespace detail

/// Propagates the linearised Hamiltonian without RWA and measures fluctuation
/// and phonon populations. The fluctuation mode starts in vacuum; resonators
/// start thermal with the state's r_p. Propagation runs in the interaction
/// picture, which leaves populations unchanged and lets the step size follow
/// the coupling scale rather than the optical frequency.
inline OracleSeries linearized_oracle_populations(const LinearizedSpec& lin,
                                                  const InitialState& state,
                                                  const TimeGrid& grid,
                                                  std::size_t cutoff_cavity,
                                                  const std::vector<std::size_t>& cutoffs_mech,
                                                  OracleOptions opts = {}) {
  const FockSpace space = FockSpace::make({cutoff_cavity}, cutoffs_mech, opts.budget);
  const auto terms = interaction_picture_terms(lin);
  double fastest = 1.0;
  for (const auto& term : terms) {
    fastest = std::max(fastest, std::abs(term.phase_freq));
    if (term.coeff.kind == CouplingKind::ModulatedSin ||
        term.coeff.kind == CouplingKind::ModulatedCos)
      fastest = std::max(fastest, term.coeff.omega_d + std::abs(term.phase_freq));
  }
  auto deriv = [&](double t, const StateVector& y, StateVector& dy) {
    detail::apply_rotating(terms, space, t, y, dy);
    dy *= cplx(0.0, -1.0);
  };

  InitialState vac_state;
  vac_state.r = state.r;
  const auto mixture = thermal_mixture(vac_state, space, opts.thermal_tail);

  OracleSeries out;
  out.t = grid.t;
  out.cavity_pop.assign(1, std::vector<double>(grid.size(), 0.0));
  out.mech_pop.assign(space.n_mech, std::vector<double>(grid.size(), 0.0));
  double total_weight = 0.0;
  for (const auto& [weight, mech_occ] : mixture) {
    total_weight += weight;
    const StateVector psi0 = product_state(space, vac_state, mech_occ);
    PropagationOptions popts = opts.prop;
    popts.top_layer_threshold = opts.prop.top_layer_threshold / std::max(weight, 1e-300);
    auto run = propagate_with(deriv, space, psi0, grid, popts, 8.0 * fastest);
    out.max_norm_drift = std::max(out.max_norm_drift, run.max_norm_drift);
    for (std::size_t ti = 0; ti < grid.size(); ++ti) {
      out.cavity_pop[0][ti] += weight * occupation_expectation(space, run.states[ti], 0);
      for (std::size_t p = 0; p < space.n_mech; ++p)
        out.mech_pop[p][ti] +=
            weight * occupation_expectation(space, run.states[ti], space.mech_mode(p));
    }
  }
  const double inv_w = 1.0 / total_weight;
  for (auto& row : out.cavity_pop)
    for (double& v : row) v *= inv_w;
  for (auto& row : out.mech_pop)
    for (double& v : row) v *= inv_w;
  return out;
}

}  // namespace nlom
