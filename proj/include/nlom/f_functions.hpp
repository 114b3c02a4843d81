#pragma once

// Time-dependent coefficient functions of the decoupled evolution operator,
// evaluated on a time grid by cumulative quadrature of the nested integrals.
//
// Stored component convention (the one the raw integrals below define):
//   F_m^(p)      = omega_m,p * t
//   F~_c,n^(p)   = -2 int [l+ sin + l- cos] * int[g+ cos - g- sin]
//                  -2 int [g+ sin + g- cos] * int[l+ cos - l- sin]
//   F_nm^(p)     = -4 int [g_m+ sin + g_m- cos] * int[g_n+ cos - g_n- sin]
//   F_+^(p)      =  int [l+ cos - l- sin]
//   F_-^(p)      = -int [l+ sin + l- cos]
//   F_n^(p,+)    =  int [g_n+ cos - g_n- sin]
//   F_n^(p,-)    = -int [g_n+ sin + g_n- cos]
// (all sines/cosines at the resonator frequency omega_m,p).
//
// The complex combinations that drive the Heisenberg-picture operators are
//   F^(p)   := F_+^(p)   - i F_-^(p)
//   F_k^(p) := F_k^(p,+) - i F_k^(p,-)
// with  b_p(t) = e^{-i F_m^(p)} [ b_p - i F^(p) - i sum_k F_k^(p) N_k ].
// This sign resolution was fixed by solving the decoupling ODEs independently
// and checking the result against the exactly solvable constant-drive
// oscillator and against truncated-Fock propagation; see also quad_phase().

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/quadrature.hpp"

namespace nlom {

/// All F-functions of one system sampled on a grid. Immutable after
/// compute_f_set; layout is [n][p][time] (cavity-major) for per-mode data.
class FSet {
 public:
  FSet(const SystemSpec& spec, const TimeGrid& grid)
      : n_cavity_(spec.n_cavity),
        n_mech_(spec.n_mech),
        t_(grid.t),
        nt_(grid.t.size()),
        f_m_(n_mech_ * nt_, 0.0),
        f_c_(n_cavity_ * n_mech_ * nt_, 0.0),
        f_nm_(n_cavity_ * n_cavity_ * n_mech_ * nt_, 0.0),
        f_plus_(n_mech_ * nt_, 0.0),
        f_minus_(n_mech_ * nt_, 0.0),
        f_k_plus_(n_cavity_ * n_mech_ * nt_, 0.0),
        f_k_minus_(n_cavity_ * n_mech_ * nt_, 0.0) {}

  std::size_t n_cavity() const { return n_cavity_; }
  std::size_t n_mech() const { return n_mech_; }
  std::size_t n_times() const { return nt_; }
  const std::vector<double>& times() const { return t_; }
  double time(std::size_t ti) const { return t_[ti]; }

  double f_m(std::size_t p, std::size_t ti) const { return f_m_[p * nt_ + ti]; }
  double f_c(std::size_t n, std::size_t p, std::size_t ti) const {
    return f_c_[(n * n_mech_ + p) * nt_ + ti];
  }
  double f_nm(std::size_t n, std::size_t m, std::size_t p, std::size_t ti) const {
    return f_nm_[((n * n_cavity_ + m) * n_mech_ + p) * nt_ + ti];
  }
  double f_nm_sym(std::size_t n, std::size_t m, std::size_t p, std::size_t ti) const {
    return 0.5 * (f_nm(n, m, p, ti) + f_nm(m, n, p, ti));
  }
  double f_plus(std::size_t p, std::size_t ti) const { return f_plus_[p * nt_ + ti]; }
  double f_minus(std::size_t p, std::size_t ti) const { return f_minus_[p * nt_ + ti]; }
  double f_k_plus(std::size_t n, std::size_t p, std::size_t ti) const {
    return f_k_plus_[(n * n_mech_ + p) * nt_ + ti];
  }
  double f_k_minus(std::size_t n, std::size_t p, std::size_t ti) const {
    return f_k_minus_[(n * n_mech_ + p) * nt_ + ti];
  }

  /// F^(p) = F_+ - i F_-; the c-number displacement source of b_p(t).
  cplx F(std::size_t p, std::size_t ti) const { return {f_plus(p, ti), -f_minus(p, ti)}; }

  /// F_k^(p) = F_k^(+) - i F_k^(-); the per-photon displacement of b_p(t).
  cplx F_k(std::size_t k, std::size_t p, std::size_t ti) const {
    return {f_k_plus(k, p, ti), -f_k_minus(k, p, ti)};
  }

  /// Coefficient of N_m in the phase of a_k(t):
  ///   sum_p [ F_{km}_sym^(p) - 2 F_k^(p,+) F_m^(p,-) ].
  /// The minus sign on the product is tied to the stored F^(p,-) convention;
  /// it reproduces the known Kerr phase -(g^2/w^2)(wt - sin wt) and agrees
  /// with the truncated-Fock oracle.
  double quad_phase(std::size_t k, std::size_t m, std::size_t ti) const {
    double acc = 0.0;
    for (std::size_t p = 0; p < n_mech_; ++p)
      acc += f_nm_sym(k, m, p, ti) - 2.0 * f_k_plus(k, p, ti) * f_k_minus(m, p, ti);
    return acc;
  }

  /// phi_k = quad_phase(k, k) / 2, the self-Kerr angle of mode k.
  double phi(std::size_t k, std::size_t ti) const { return 0.5 * quad_phase(k, k, ti); }

  /// Delta^(p)_{n,m} = sum_k (n_k - m_k) F_k^(p) over the given modes.
  cplx delta(std::size_t p, std::span<const std::size_t> modes, std::span<const int> n_occ,
             std::span<const int> m_occ, std::size_t ti) const {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < modes.size(); ++j)
      acc += static_cast<double>(n_occ[j] - m_occ[j]) * F_k(modes[j], p, ti);
    return acc;
  }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend FSet compute_f_set(const SystemSpec&, const TimeGrid&, QuadratureRule, std::size_t);

  double& at_m(std::size_t p, std::size_t ti) { return f_m_[p * nt_ + ti]; }
  double& at_c(std::size_t n, std::size_t p, std::size_t ti) {
    return f_c_[(n * n_mech_ + p) * nt_ + ti];
  }
  double& at_nm(std::size_t n, std::size_t m, std::size_t p, std::size_t ti) {
    return f_nm_[((n * n_cavity_ + m) * n_mech_ + p) * nt_ + ti];
  }
  double& at_plus(std::size_t p, std::size_t ti) { return f_plus_[p * nt_ + ti]; }
  double& at_minus(std::size_t p, std::size_t ti) { return f_minus_[p * nt_ + ti]; }
  double& at_k_plus(std::size_t n, std::size_t p, std::size_t ti) {
    return f_k_plus_[(n * n_mech_ + p) * nt_ + ti];
  }
  double& at_k_minus(std::size_t n, std::size_t p, std::size_t ti) {
    return f_k_minus_[(n * n_mech_ + p) * nt_ + ti];
  }

  std::size_t n_cavity_, n_mech_;
  std::vector<double> t_;
  std::size_t nt_;
  std::vector<double> f_m_, f_c_, f_nm_, f_plus_, f_minus_, f_k_plus_, f_k_minus_;
  std::vector<std::string> warnings_;
};

/// Evaluates every F-function on the grid. Inner integrals accumulate in a
/// single forward pass over a refined ladder (2*refine substeps per grid
/// interval); outer integrals consume the cumulative inner values on the same
/// pass, so the whole computation is O(ladder) per (n, p).
inline FSet compute_f_set(const SystemSpec& spec, const TimeGrid& grid,
                          QuadratureRule rule = QuadratureRule::Simpson,
                          std::size_t refine = 1) {
  FSet fs(spec, grid);
  const std::size_t N = spec.n_cavity, M = spec.n_mech;
  const TimeLadder ladder = TimeLadder::build(grid, refine);
  const std::size_t L = ladder.size();

  // Grid coarseness warning against the fastest scale present.
  double fastest = 0.0;
  for (double w : spec.omega_m) fastest = std::max(fastest, w);
  auto scan_drive = [&fastest](const CouplingSpec& c) {
    if ((c.kind == CouplingKind::ModulatedSin || c.kind == CouplingKind::ModulatedCos) &&
        c.base != 0.0)
      fastest = std::max(fastest, c.omega_d);
  };
  for (const auto& c : spec.g_plus) scan_drive(c);
  for (const auto& c : spec.g_minus) scan_drive(c);
  for (const auto& c : spec.lambda_plus) scan_drive(c);
  for (const auto& c : spec.lambda_minus) scan_drive(c);
  if (fastest > 0.0) {
    double hmax = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) hmax = std::max(hmax, grid.t[i] - grid.t[i - 1]);
    const double recommended = (2.0 * pi / fastest) / 20.0;
    if (hmax > recommended)
      fs.warnings_.push_back("grid step " + std::to_string(hmax) +
                             " exceeds 1/20 of the fastest period; recommended step <= " +
                             std::to_string(recommended));
  }

  std::vector<double> raw_a(3 * N), raw_b(3 * N);  // per-mode integrands at pair nodes
  std::vector<double> inner_a(3 * N), inner_b(3 * N);
  std::vector<double> raw_c(3), raw_d(3), inner_c(3), inner_d(3);

  for (std::size_t p = 0; p < M; ++p) {
    const double w = spec.omega_m[p];
    std::vector<CumulativeIntegrator> ia, ib;
    std::vector<CumulativeIntegrator> oc1, oc2;         // components of F~_c,n
    std::vector<CumulativeIntegrator> onm;              // N*N outer integrals
    for (std::size_t n = 0; n < N; ++n) {
      ia.emplace_back(ladder, rule);
      ib.emplace_back(ladder, rule);
      oc1.emplace_back(ladder, rule);
      oc2.emplace_back(ladder, rule);
    }
    for (std::size_t q = 0; q < N * N; ++q) onm.emplace_back(ladder, rule);
    CumulativeIntegrator ic(ladder, rule), id(ladder, rule);

    // t = 0 row is identically zero except F_m.
    std::size_t next_grid = 1;

    for (std::size_t q = 0; q + 2 < L; q += 2) {
      for (int j = 0; j < 3; ++j) {
        const double t = ladder.t[q + j];
        const double cs = std::cos(w * t), sn = std::sin(w * t);
        for (std::size_t n = 0; n < N; ++n) {
          const double gp = spec.g_p(n, p)(t);
          const double gm = spec.g_m(n, p)(t);
          raw_a[3 * n + j] = gp * cs - gm * sn;
          raw_b[3 * n + j] = gp * sn + gm * cs;
        }
        const double lp = spec.lambda_plus[p](t);
        const double lm = spec.lambda_minus[p](t);
        raw_c[j] = lp * cs - lm * sn;
        raw_d[j] = lp * sn + lm * cs;
      }
      // inner integrals: cumulative values at all three pair nodes
      for (std::size_t n = 0; n < N; ++n) {
        inner_a[3 * n] = ia[n].value();
        inner_b[3 * n] = ib[n].value();
        ia[n].advance_pair(raw_a[3 * n], raw_a[3 * n + 1], raw_a[3 * n + 2], inner_a[3 * n + 1]);
        ib[n].advance_pair(raw_b[3 * n], raw_b[3 * n + 1], raw_b[3 * n + 2], inner_b[3 * n + 1]);
        inner_a[3 * n + 2] = ia[n].value();
        inner_b[3 * n + 2] = ib[n].value();
      }
      inner_c[0] = ic.value();
      inner_d[0] = id.value();
      ic.advance_pair(raw_c[0], raw_c[1], raw_c[2], inner_c[1]);
      id.advance_pair(raw_d[0], raw_d[1], raw_d[2], inner_d[1]);
      inner_c[2] = ic.value();
      inner_d[2] = id.value();

      // outer integrals over the same pair
      double dump;
      for (std::size_t n = 0; n < N; ++n) {
        oc1[n].advance_pair(raw_d[0] * inner_a[3 * n], raw_d[1] * inner_a[3 * n + 1],
                            raw_d[2] * inner_a[3 * n + 2], dump);
        oc2[n].advance_pair(raw_b[3 * n] * inner_c[0], raw_b[3 * n + 1] * inner_c[1],
                            raw_b[3 * n + 2] * inner_c[2], dump);
        for (std::size_t m = 0; m < N; ++m)
          onm[n * N + m].advance_pair(raw_b[3 * m] * inner_a[3 * n],
                                      raw_b[3 * m + 1] * inner_a[3 * n + 1],
                                      raw_b[3 * m + 2] * inner_a[3 * n + 2], dump);
      }

      while (next_grid < grid.size() && ladder.grid_index[next_grid] == q + 2) {
        const std::size_t ti = next_grid;
        fs.at_m(p, ti) = w * grid.t[ti];
        fs.at_plus(p, ti) = ic.value();
        fs.at_minus(p, ti) = -id.value();
        for (std::size_t n = 0; n < N; ++n) {
          fs.at_k_plus(n, p, ti) = ia[n].value();
          fs.at_k_minus(n, p, ti) = -ib[n].value();
          fs.at_c(n, p, ti) = -2.0 * (oc1[n].value() + oc2[n].value());
          for (std::size_t m = 0; m < N; ++m)
            fs.at_nm(n, m, p, ti) = -4.0 * onm[n * N + m].value();
        }
        ++next_grid;
      }
    }
  }
  return fs;
}

// ---------------------------------------------------------------------------
// Exact antiderivatives for time-constant couplings (quadrature oracle).
// ---------------------------------------------------------------------------

/// All single-mode F-functions for constant couplings at one time.
struct FSnapshot {
  double f_m = 0.0;
  double f_c = 0.0;
  double f_nm = 0.0;  // diagonal n = m entry
  double f_plus = 0.0;
  double f_minus = 0.0;
  double f_k_plus = 0.0;
  double f_k_minus = 0.0;
};

namespace detail {

struct TrigPrimitives {
  double pc, ps, pss, pcc, psc;
  TrigPrimitives(double w, double t) {
    pc = std::sin(w * t) / w;
    ps = (1.0 - std::cos(w * t)) / w;
    pss = 0.5 * t - std::sin(2.0 * w * t) / (4.0 * w);
    pcc = 0.5 * t + std::sin(2.0 * w * t) / (4.0 * w);
    const double s = std::sin(w * t);
    psc = s * s / (2.0 * w);
  }
};

// int_0^t [b+ sin + b- cos](t') * (int_0^t' [a+ cos - a- sin]) dt'
inline double nested_sc(double a_plus, double a_minus, double b_plus, double b_minus,
                        const TrigPrimitives& P, double w) {
  return (a_plus * b_plus * P.pss + a_plus * b_minus * P.psc -
          a_minus * b_plus * (P.ps - P.psc) - a_minus * b_minus * (P.pc - P.pcc)) /
         w;
}

}  // namespace detail

/// F_nm^(p) for constant couplings: outer factor from mode m, inner from mode n.
inline double f_nm_closed_form_constant(double gn_plus, double gn_minus, double gm_plus,
                                        double gm_minus, double omega_m, double t) {
  detail::TrigPrimitives P(omega_m, t);
  return -4.0 * detail::nested_sc(gn_plus, gn_minus, gm_plus, gm_minus, P, omega_m);
}

/// F~_c,n^(p) for constant couplings.
inline double f_c_closed_form_constant(double g_plus, double g_minus, double lam_plus,
                                       double lam_minus, double omega_m, double t) {
  detail::TrigPrimitives P(omega_m, t);
  return -2.0 * (detail::nested_sc(g_plus, g_minus, lam_plus, lam_minus, P, omega_m) +
                 detail::nested_sc(lam_plus, lam_minus, g_plus, g_minus, P, omega_m));
}

inline FSnapshot f_closed_form_constant(double g_plus, double g_minus, double lam_plus,
                                        double lam_minus, double omega_m, double t) {
  if (!(omega_m > 0.0)) throw std::invalid_argument("f_closed_form_constant: omega_m must be > 0");
  detail::TrigPrimitives P(omega_m, t);
  FSnapshot s;
  s.f_m = omega_m * t;
  s.f_plus = lam_plus * P.pc - lam_minus * P.ps;
  s.f_minus = -(lam_plus * P.ps + lam_minus * P.pc);
  s.f_k_plus = g_plus * P.pc - g_minus * P.ps;
  s.f_k_minus = -(g_plus * P.ps + g_minus * P.pc);
  s.f_nm = f_nm_closed_form_constant(g_plus, g_minus, g_plus, g_minus, omega_m, t);
  s.f_c = f_c_closed_form_constant(g_plus, g_minus, lam_plus, lam_minus, omega_m, t);
  return s;
}

/// int_0^t exp(i a s) ds, stable for a -> 0.
inline cplx phase_integral(double a, double t) {
  const double x = 0.5 * a * t;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return t * sinc * std::exp(cplx(0.0, x));
}

/// int_0^t c(t') exp(i omega t') dt' for constant/modulated couplings; this is
/// the complex F_k^(p) of a pure g^(+) coupling in closed form.
inline cplx coupling_phase_integral(const CouplingSpec& c, double omega, double t) {
  switch (c.kind) {
    case CouplingKind::Constant:
      return c.base * phase_integral(omega, t);
    case CouplingKind::ModulatedSin:
      return c.base * (phase_integral(omega, t) +
                       c.kappa / cplx(0.0, 2.0) *
                           (phase_integral(omega + c.omega_d, t) -
                            phase_integral(omega - c.omega_d, t)));
    case CouplingKind::ModulatedCos:
      return c.base * (phase_integral(omega, t) +
                       0.5 * c.kappa *
                           (phase_integral(omega + c.omega_d, t) +
                            phase_integral(omega - c.omega_d, t)));
    case CouplingKind::Tabulated:
      throw std::invalid_argument("coupling_phase_integral: no closed form for tabulated");
  }
  return {};
}

}  // namespace nlom
