#pragma once

// Closed-form expectation values for the coherent/thermal initial state:
// populations and normalised first-order bipartite coherence g1, in the
// general multimode case and the single-coherent-mode specialization.
//
// Everything below is written in terms of the complex accessors FSet::F and
// FSet::F_k and the quadratic phases FSet::quad_phase. The mechanical mode in
// the Heisenberg picture is
//   b_p(t) = e^{-i w_m t} [ b_p - i F^(p) - i sum_n F_n^(p) N_n ],
// the cavity mode
//   a_k(t) = (scalar phase) e^{-i sum_m quad_phase(k,m) N_m}
//            prod_p D_p(-i F_k^(p)) a_k.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/f_functions.hpp"

namespace nlom {

struct Pair {
  enum class Kind { ModeMode, ModeRes, ResRes };
  Kind kind;
  std::size_t a = 0;  // cavity index (ModeMode, ModeRes) or resonator (ResRes)
  std::size_t b = 0;  // second cavity / resonator index

  static Pair mode_mode(std::size_t k, std::size_t kp) { return {Kind::ModeMode, k, kp}; }
  static Pair mode_res(std::size_t k, std::size_t p) { return {Kind::ModeRes, k, p}; }
  static Pair res_res(std::size_t p, std::size_t pp) { return {Kind::ResRes, p, pp}; }
};

/// g1 value with an explicit undefined tag for 0/0 coherences (vacuum modes,
/// uncoupled zero-temperature resonators). Undefined is a signal, not an error.
struct G1Result {
  double value = 0.0;
  bool defined = false;

  static G1Result undefined() { return {}; }
  static G1Result of(double v) { return {v, true}; }
};

inline constexpr double population_floor = 1e-30;

/// <a_k^dag a_k> = |mu_k|^2, conserved by the full Hamiltonian.
inline double cavity_population(const InitialState& state, std::size_t k) {
  return std::norm(state.mu(k));
}

/// <b_p^dag b_p>(t): thermal occupation plus the coupling-driven terms,
/// including the cross term between the c-number drive F^(p) and the
/// per-photon displacements F_n^(p).
inline double mech_population(const InitialState& state, const FSet& fs, std::size_t p,
                              std::size_t ti) {
  const cplx F = fs.F(p, ti);
  double acc = state.thermal_occupation(p) + std::norm(F);
  const std::size_t N = fs.n_cavity();
  for (std::size_t n = 0; n < N; ++n) {
    const double mu2 = std::norm(state.mu(n));
    if (mu2 == 0.0) continue;
    const cplx Fn = fs.F_k(n, p, ti);
    acc += 2.0 * (F * std::conj(Fn)).real() * mu2;
    acc += std::norm(Fn) * (mu2 + mu2 * mu2);
    for (std::size_t m = 0; m < n; ++m) {
      const double mu2m = std::norm(state.mu(m));
      if (mu2m == 0.0) continue;
      acc += 2.0 * (Fn * std::conj(fs.F_k(m, p, ti))).real() * mu2 * mu2m;
    }
  }
  return acc;
}

namespace detail {

/// |<a_k^dag a_k'>| for k != k'.
inline double mode_mode_correlator(const InitialState& state, const FSet& fs, std::size_t k,
                                   std::size_t kp, std::size_t ti) {
  double log_supp = 0.0;
  for (std::size_t m = 0; m < fs.n_cavity(); ++m) {
    const double mu2 = std::norm(state.mu(m));
    if (mu2 == 0.0) continue;
    const double half_delta = 0.5 * (fs.quad_phase(k, m, ti) - fs.quad_phase(kp, m, ti));
    const double s = std::sin(half_delta);
    log_supp -= 2.0 * mu2 * s * s;
  }
  for (std::size_t p = 0; p < fs.n_mech(); ++p) {
    const double c2r = std::cosh(2.0 * state.r[p]);
    log_supp -= 0.5 * c2r * std::norm(fs.F_k(k, p, ti) - fs.F_k(kp, p, ti));
  }
  return std::abs(state.mu(k)) * std::abs(state.mu(kp)) * std::exp(log_supp);
}

/// |<a_k^dag b_p'>|.
inline double mode_res_correlator(const InitialState& state, const FSet& fs, std::size_t k,
                                  std::size_t pp, std::size_t ti) {
  double log_supp = 0.0;
  cplx bracket = state.thermal_occupation(pp) * fs.F_k(k, pp, ti) - fs.F(pp, ti);
  for (std::size_t n = 0; n < fs.n_cavity(); ++n) {
    const double mu2 = std::norm(state.mu(n));
    if (mu2 == 0.0) continue;
    const double c_n = fs.quad_phase(k, n, ti);
    const double s = std::sin(0.5 * c_n);
    log_supp -= 2.0 * mu2 * s * s;
    bracket -= fs.F_k(n, pp, ti) * std::exp(cplx(0.0, c_n)) * mu2;
  }
  for (std::size_t p = 0; p < fs.n_mech(); ++p) {
    const double c2r = std::cosh(2.0 * state.r[p]);
    log_supp -= 0.5 * c2r * std::norm(fs.F_k(k, p, ti));
  }
  return std::abs(state.mu(k)) * std::exp(log_supp) * std::abs(bracket);
}

/// |<b_p^dag b_p'>| (p = p' reproduces mech_population).
inline double res_res_correlator(const InitialState& state, const FSet& fs, std::size_t p,
                                 std::size_t pp, std::size_t ti) {
  const cplx Fp = fs.F(p, ti), Fpp = fs.F(pp, ti);
  cplx acc = std::conj(Fp) * Fpp;
  const std::size_t N = fs.n_cavity();
  for (std::size_t n = 0; n < N; ++n) {
    const double mu2 = std::norm(state.mu(n));
    if (mu2 == 0.0) continue;
    const cplx Fn_p = fs.F_k(n, p, ti), Fn_pp = fs.F_k(n, pp, ti);
    acc += (std::conj(Fp) * Fn_pp + Fpp * std::conj(Fn_p)) * mu2;
    acc += std::conj(Fn_p) * Fn_pp * (mu2 + mu2 * mu2);
    for (std::size_t m = 0; m < N; ++m) {
      if (m == n) continue;
      const double mu2m = std::norm(state.mu(m));
      if (mu2m == 0.0) continue;
      acc += std::conj(Fn_p) * fs.F_k(m, pp, ti) * mu2 * mu2m;
    }
  }
  return std::abs(acc);
}

}  // namespace detail

/// Normalised first-order coherence |<d_m^dag d_n>| / sqrt(<N_m><N_n>) for any
/// pair kind, from the exact multimode expressions.
inline G1Result g1(const InitialState& state, const FSet& fs, Pair pair, std::size_t ti) {
  switch (pair.kind) {
    case Pair::Kind::ModeMode: {
      const double na = cavity_population(state, pair.a);
      const double nb = cavity_population(state, pair.b);
      if (na < population_floor || nb < population_floor) return G1Result::undefined();
      if (pair.a == pair.b) return G1Result::of(1.0);
      return G1Result::of(detail::mode_mode_correlator(state, fs, pair.a, pair.b, ti) /
                          std::sqrt(na * nb));
    }
    case Pair::Kind::ModeRes: {
      const double na = cavity_population(state, pair.a);
      const double nb = mech_population(state, fs, pair.b, ti);
      if (na < population_floor || nb < population_floor) return G1Result::undefined();
      return G1Result::of(detail::mode_res_correlator(state, fs, pair.a, pair.b, ti) /
                          std::sqrt(na * nb));
    }
    case Pair::Kind::ResRes: {
      const double na = mech_population(state, fs, pair.a, ti);
      const double nb = mech_population(state, fs, pair.b, ti);
      if (na < population_floor || nb < population_floor) return G1Result::undefined();
      if (pair.a == pair.b) return G1Result::of(1.0);
      return G1Result::of(detail::res_res_correlator(state, fs, pair.a, pair.b, ti) /
                          std::sqrt(na * nb));
    }
  }
  return G1Result::undefined();
}

namespace detail {

inline std::size_t single_coherent_mode(const InitialState& state) {
  const auto modes = state.coherent_modes();
  if (modes.size() != 1)
    throw std::invalid_argument("single-mode specialization requires exactly one coherent mode");
  return modes.front();
}

}  // namespace detail

/// Compact closed forms for one coherent mode and no lambda drives:
/// mode-resonator and resonator-resonator coherence via the Kerr angle phi.
inline G1Result g1_single_mode(const InitialState& state, const FSet& fs, Pair pair,
                               std::size_t ti) {
  const std::size_t kt = detail::single_coherent_mode(state);
  const double mu2 = std::norm(state.mu(kt));
  auto mech_pop = [&](std::size_t p) {
    return state.thermal_occupation(p) + std::norm(fs.F_k(kt, p, ti)) * (mu2 + mu2 * mu2);
  };
  switch (pair.kind) {
    case Pair::Kind::ModeRes: {
      const std::size_t pp = pair.b;
      const double den2 = mu2 * mech_pop(pp);
      if (den2 < population_floor) return G1Result::undefined();
      const double phi = fs.phi(kt, ti);
      const double sphi = std::sin(phi);
      double log_supp = -2.0 * mu2 * sphi * sphi;
      for (std::size_t p = 0; p < fs.n_mech(); ++p)
        log_supp -= 0.5 * (1.0 + 2.0 * state.thermal_occupation(p)) *
                    std::norm(fs.F_k(kt, p, ti));
      const double num = std::abs(state.mu(kt)) * std::abs(fs.F_k(kt, pp, ti)) *
                         std::abs(state.thermal_occupation(pp) -
                                  std::exp(cplx(0.0, 2.0 * phi)) * mu2) *
                         std::exp(log_supp);
      return G1Result::of(num / std::sqrt(den2));
    }
    case Pair::Kind::ResRes: {
      const std::size_t p = pair.a, pp = pair.b;
      const double den2 = mech_pop(p) * mech_pop(pp);
      if (den2 < population_floor) return G1Result::undefined();
      if (p == pp) return G1Result::of(1.0);
      const double num = std::abs(fs.F_k(kt, p, ti)) * std::abs(fs.F_k(kt, pp, ti)) * mu2 *
                         (1.0 + mu2);
      return G1Result::of(num / std::sqrt(den2));
    }
    case Pair::Kind::ModeMode:
      return G1Result::of(1.0);
  }
  return G1Result::undefined();
}

// ---------------------------------------------------------------------------
// Weak-coupling leading order, full model vs linearised model. The coupling
// specs of `spec` play the role of the O(1) shapes g~(t); epsilon scales them.
// ---------------------------------------------------------------------------

enum class WeakModel { Full, Linearized };

namespace detail {

inline cplx phase_weighted_integral(const CouplingSpec& c, double omega, double t) {
  if (c.kind != CouplingKind::Tabulated) return coupling_phase_integral(c, omega, t);
  // composite Simpson fallback for tabulated shapes
  const std::size_t steps = 2048;
  const double h = t / static_cast<double>(steps);
  cplx acc(0.0, 0.0);
  for (std::size_t j = 0; j + 2 <= steps; j += 2) {
    const double t0 = h * j, t1 = h * (j + 1), t2 = h * (j + 2);
    auto f = [&](double s) { return c(s) * std::exp(cplx(0.0, omega * s)); };
    acc += h / 3.0 * (f(t0) + 4.0 * f(t1) + f(t2));
  }
  return acc;
}

}  // namespace detail

/// Leading term of g1 in epsilon for weak couplings g -> eps*g~. Mode-mode
/// pairs are 1 + O(eps^2), resonator pairs O(eps^2); the mode-resonator pair
/// is O(eps) with the model-dependent coefficient. Requires N_i > 0 for the
/// mode-resonator pair (the thermal population dominates the denominator).
inline double weak_coupling_g1(const InitialState& state, const SystemSpec& spec, Pair pair,
                               double t, double epsilon, WeakModel model) {
  switch (pair.kind) {
    case Pair::Kind::ModeMode:
      return 1.0;
    case Pair::Kind::ResRes:
      return 0.0;
    case Pair::Kind::ModeRes: {
      const std::size_t kt = pair.a, pp = pair.b;
      const double ni = state.thermal_occupation(pp);
      if (!(ni > 0.0))
        throw std::domain_error("weak_coupling_g1: mode-resonator pair requires N_i > 0");
      const double w = spec.omega_m[pp];
      if (model == WeakModel::Linearized) {
        const cplx I =
            detail::phase_weighted_integral(spec.g_p(kt, pp), spec.omega_c[kt] + w, t);
        return epsilon * std::sqrt(ni) * std::abs(I);
      }
      cplx bracket = ni * detail::phase_weighted_integral(spec.g_p(kt, pp), w, t);
      for (std::size_t n = 0; n < spec.n_cavity; ++n) {
        const double mu2 = std::norm(state.mu(n));
        if (mu2 == 0.0) continue;
        bracket -= mu2 * detail::phase_weighted_integral(spec.g_p(n, pp), w, t);
      }
      return epsilon * std::abs(bracket) / std::sqrt(ni);
    }
  }
  return 0.0;
}

}  // namespace nlom
