#pragma once

// Reduced state of the mechanical resonators as a Poisson-weighted ensemble of
// displaced thermal states, and its linear entropy S_N = 1 - Tr(rho_m^2).
// Conditioned on the cavity Fock tuple {n_k}, resonator p is displaced by
//   beta_p = -i ( F^(p) + sum_k n_k F_k^(p) )
// up to a rotation e^{-i w_m t} and term-independent phases that cancel in all
// quantities computed here.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/f_functions.hpp"
#include "nlom/special_functions.hpp"

namespace nlom {

namespace detail {

/// Poisson pmf values for mean `mean` up to n_max inclusive.
inline std::vector<double> poisson_weights(double mean, std::size_t n_max) {
  std::vector<double> w(n_max + 1);
  w[0] = std::exp(-mean);
  for (std::size_t n = 1; n <= n_max; ++n) w[n] = w[n - 1] * mean / static_cast<double>(n);
  return w;
}

/// Smallest n_max with Poisson tail mass beyond it below `tail`.
inline std::size_t poisson_cutoff(double mean, double tail) {
  double w = std::exp(-mean), cum = w;
  std::size_t n = 0;
  while (1.0 - cum > tail && n < 4000) {
    ++n;
    w *= mean / static_cast<double>(n);
    cum += w;
  }
  return n;
}

/// Odometer over occupation tuples bounded per mode; f(tuple) for each.
template <typename F>
void for_each_tuple(const std::vector<std::size_t>& bounds, F&& f) {
  std::vector<int> occ(bounds.size(), 0);
  if (bounds.empty()) {
    f(occ);
    return;
  }
  while (true) {
    f(occ);
    std::size_t j = 0;
    while (j < occ.size()) {
      if (occ[j] < static_cast<int>(bounds[j])) {
        ++occ[j];
        break;
      }
      occ[j] = 0;
      ++j;
    }
    if (j == occ.size()) break;
  }
}

}  // namespace detail

struct EnsembleTerm {
  double weight = 0.0;
  std::vector<int> occupation;        // cavity Fock tuple over coherent modes
  std::vector<cplx> displacement;     // per resonator
};

struct ReducedStateEnsemble {
  std::vector<std::size_t> modes;  // coherent-mode indices the tuples refer to
  std::vector<EnsembleTerm> terms;
  std::size_t truncation = 0;      // max total photon number included
  double truncated_mass = 0.0;     // 1 - sum of weights
  std::vector<std::string> warnings;
};

/// Enumerates the ensemble terms with total photon number <= truncation.
inline ReducedStateEnsemble reduced_state(const InitialState& state, const FSet& fs,
                                          std::size_t ti, std::size_t truncation) {
  ReducedStateEnsemble ens;
  ens.modes = state.coherent_modes();
  ens.truncation = truncation;
  const std::size_t K = ens.modes.size();
  const std::size_t M = fs.n_mech();

  std::vector<std::vector<double>> pois(K);
  for (std::size_t j = 0; j < K; ++j)
    pois[j] = detail::poisson_weights(std::norm(state.mu(ens.modes[j])), truncation);

  std::vector<cplx> base(M), shift(K * M);
  for (std::size_t p = 0; p < M; ++p) {
    base[p] = cplx(0.0, -1.0) * fs.F(p, ti);
    for (std::size_t j = 0; j < K; ++j)
      shift[j * M + p] = cplx(0.0, -1.0) * fs.F_k(ens.modes[j], p, ti);
  }

  double mass = 0.0;
  std::vector<std::size_t> bounds(K, truncation);
  detail::for_each_tuple(bounds, [&](const std::vector<int>& occ) {
    std::size_t total = 0;
    for (int n : occ) total += static_cast<std::size_t>(n);
    if (total > truncation) return;
    EnsembleTerm term;
    term.weight = 1.0;
    for (std::size_t j = 0; j < K; ++j) term.weight *= pois[j][occ[j]];
    term.occupation = occ;
    term.displacement.resize(M);
    for (std::size_t p = 0; p < M; ++p) {
      cplx d = base[p];
      for (std::size_t j = 0; j < K; ++j) d += static_cast<double>(occ[j]) * shift[j * M + p];
      term.displacement[p] = d;
    }
    mass += term.weight;
    ens.terms.push_back(std::move(term));
  });
  ens.truncated_mass = 1.0 - mass;
  if (ens.truncated_mass > 1e-6) {
    double mean_total = 0.0;
    for (std::size_t j = 0; j < K; ++j) mean_total += std::norm(state.mu(ens.modes[j]));
    const std::size_t suggested = detail::poisson_cutoff(mean_total, 1e-9);
    ens.warnings.push_back("truncated ensemble mass " + std::to_string(ens.truncated_mass) +
                           " exceeds 1e-6; suggested truncation >= " +
                           std::to_string(suggested));
  }
  return ens;
}

/// Mixedness of the initial thermal state: S_N^in = 1 - prod_p 1/cosh(2 r_p).
inline double initial_linear_entropy(const InitialState& state) {
  double prod = 1.0;
  for (double r : state.r) prod /= std::cosh(2.0 * r);
  return 1.0 - prod;
}

namespace detail {

struct EntropySums {
  double direct;  // sum_{n,m} P(n) P(m) prod_p exp(-|Delta|^2 / cosh 2r) / cosh 2r
  double corr;    // sum_{n,m} P(n) P(m) (1 - prod_p exp(-|Delta|^2 / cosh 2r)) / prod cosh 2r
};

inline EntropySums entropy_double_sum(const InitialState& state, const FSet& fs, std::size_t ti,
                                      std::size_t n_max_override) {
  const auto modes = state.coherent_modes();
  const std::size_t K = modes.size();
  const std::size_t M = fs.n_mech();

  std::vector<std::size_t> bounds(K);
  std::vector<std::vector<double>> pois(K);
  for (std::size_t j = 0; j < K; ++j) {
    const double mean = std::norm(state.mu(modes[j]));
    bounds[j] = n_max_override > 0 ? n_max_override : poisson_cutoff(mean, 1e-12);
    pois[j] = poisson_weights(mean, bounds[j]);
  }

  std::vector<double> inv_c2r(M);
  double prod_c2r = 1.0;
  for (std::size_t p = 0; p < M; ++p) {
    const double c = std::cosh(2.0 * state.r[p]);
    inv_c2r[p] = 1.0 / c;
    prod_c2r *= c;
  }
  std::vector<cplx> fk(K * M);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t p = 0; p < M; ++p) fk[j * M + p] = fs.F_k(modes[j], p, ti);

  CompensatedSum<double> direct, corr;
  for_each_tuple(bounds, [&](const std::vector<int>& n_occ) {
    double wn = 1.0;
    for (std::size_t j = 0; j < K; ++j) wn *= pois[j][n_occ[j]];
    for_each_tuple(bounds, [&](const std::vector<int>& m_occ) {
      double w = wn;
      for (std::size_t j = 0; j < K; ++j) w *= pois[j][m_occ[j]];
      double kernel = 1.0;
      for (std::size_t p = 0; p < M; ++p) {
        cplx delta(0.0, 0.0);
        for (std::size_t j = 0; j < K; ++j)
          delta += static_cast<double>(n_occ[j] - m_occ[j]) * fk[j * M + p];
        kernel *= std::exp(-std::norm(delta) * inv_c2r[p]);
      }
      direct.add(w * kernel / prod_c2r);
      corr.add(w * (1.0 - kernel) / prod_c2r);
    });
  });
  return {direct.value(), corr.value()};
}

}  // namespace detail

/// S_N as S_N^in plus the manifestly nonnegative nonlinearity correction
/// (split form). n_max_override = 0 selects the Poisson-tail truncation rule
/// (tail mass < 1e-12 per mode).
inline double linear_entropy(const InitialState& state, const FSet& fs, std::size_t ti,
                             std::size_t n_max_override = 0) {
  return initial_linear_entropy(state) +
         detail::entropy_double_sum(state, fs, ti, n_max_override).corr;
}

/// S_N computed from the direct double sum (no split); agrees with
/// linear_entropy at equal truncation and is kept as the algebraic cross-check.
inline double linear_entropy_direct(const InitialState& state, const FSet& fs, std::size_t ti,
                                    std::size_t n_max_override = 0) {
  return 1.0 - detail::entropy_double_sum(state, fs, ti, n_max_override).direct;
}

/// Single coherent mode: Bessel-series form. m_max = 0 picks the cutoff from
/// the scaled-Bessel decay, exp(-2|mu|^2) I_m(2|mu|^2) < 1e-14.
inline double linear_entropy_single_mode(const InitialState& state, const FSet& fs,
                                         std::size_t ti, std::size_t m_max = 0) {
  const auto modes = state.coherent_modes();
  if (modes.size() != 1)
    throw std::invalid_argument("linear_entropy_single_mode: exactly one coherent mode required");
  const std::size_t kt = modes.front();
  const double mu2 = std::norm(state.mu(kt));

  double a = 0.0;     // sum_p |F_k|^2 / (1 + 2 N_i,p)
  double prod = 1.0;  // prod_p (1 + 2 N_i,p)
  for (std::size_t p = 0; p < fs.n_mech(); ++p) {
    const double c2r = 1.0 + 2.0 * state.thermal_occupation(p);
    a += std::norm(fs.F_k(kt, p, ti)) / c2r;
    prod *= c2r;
  }

  if (m_max == 0) {
    m_max = 1;
    while (m_max < 2000 && bessel_i_scaled(static_cast<int>(m_max), 2.0 * mu2) > 1e-14) ++m_max;
  }
  CompensatedSum<double> s;
  for (std::size_t m = 1; m <= m_max; ++m) {
    const double md = static_cast<double>(m);
    s.add(bessel_i_scaled(static_cast<int>(m), 2.0 * mu2) * -std::expm1(-a * md * md));
  }
  return initial_linear_entropy(state) + 2.0 * s.value() / prod;
}

/// Lambda_alpha by the Bessel series: 1 - 2 e^{-2|mu|^2} sum_d I_d(2|mu|^2)(1 - e^{-alpha d^2}).
inline double lambda_alpha(double alpha, double mu_abs2, std::size_t m_max = 0) {
  if (m_max == 0) {
    m_max = 1;
    while (m_max < 2000 && bessel_i_scaled(static_cast<int>(m_max), 2.0 * mu_abs2) > 1e-16) ++m_max;
  }
  CompensatedSum<double> s;
  for (std::size_t d = 1; d <= m_max; ++d) {
    const double dd = static_cast<double>(d);
    s.add(bessel_i_scaled(static_cast<int>(d), 2.0 * mu_abs2) * -std::expm1(-alpha * dd * dd));
  }
  return 1.0 - 2.0 * s.value();
}

/// Lambda_alpha by the defining double sum over (n, m), the brute-force route.
inline double lambda_alpha_direct(double alpha, double mu_abs2, std::size_t n_max = 40) {
  const auto w = detail::poisson_weights(mu_abs2, n_max);
  CompensatedSum<double> s;
  for (std::size_t n = 0; n <= n_max; ++n)
    for (std::size_t m = 0; m <= n_max; ++m) {
      const double d = static_cast<double>(n) - static_cast<double>(m);
      s.add(w[n] * w[m] * std::exp(-alpha * d * d));
    }
  return s.value();
}

}  // namespace nlom
