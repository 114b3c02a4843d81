#pragma once

// Schrodinger propagation in the truncated Fock space: classical RK4 with
// Richardson step-doubling error control, plus a dense matrix-exponential
// route for time-independent Hamiltonians, and the measurement helpers
// (populations, pair correlators, reduced mechanical density matrix, purity).

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/fock.hpp"

namespace nlom {

using StateVector = Eigen::VectorXcd;

struct PropagationOptions {
  double local_tol = 1e-9;         // per-substep error budget, scaled by substep length
  double initial_steps_per_unit = 0.0;  // 0: derive from the fastest frequency
  double max_norm_drift_per_unit_time = 1e-8;
  double top_layer_threshold = 1e-4;  // truncation-overflow abort level
  bool check_top_layer = true;
};

namespace detail {

template <typename Deriv>
class Rk4Stepper {
 public:
  explicit Rk4Stepper(Deriv& deriv) : deriv_(&deriv) {}

  void step(double t, double h, const StateVector& y, StateVector& out) {
    (*deriv_)(t, y, k1_);
    tmp_ = y + 0.5 * h * k1_;
    (*deriv_)(t + 0.5 * h, tmp_, k2_);
    tmp_ = y + 0.5 * h * k2_;
    (*deriv_)(t + 0.5 * h, tmp_, k3_);
    tmp_ = y + h * k3_;
    (*deriv_)(t + h, tmp_, k4_);
    out = y + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  Deriv* deriv_;
  StateVector k1_, k2_, k3_, k4_, tmp_;
};

inline void check_top_layer(const FockSpace& space, const StateVector& psi, double threshold,
                            double t) {
  for (std::size_t u = 0; u < space.n_modes(); ++u) {
    double mass = 0.0;
    for (std::size_t idx = 0; idx < space.dim; ++idx)
      if (space.occupation(idx, u) == space.cutoffs[u]) mass += std::norm(psi[idx]);
    if (mass > threshold)
      throw std::runtime_error(
          "truncation overflow at t=" + std::to_string(t) + ": mode " + std::to_string(u) +
          " holds probability " + std::to_string(mass) +
          " in its top Fock layer; raise the cutoff");
  }
}

}  // namespace detail

struct PropagationResult {
  std::vector<StateVector> states;  // one per grid point
  double max_norm_drift = 0.0;      // max | ||psi|| - 1 |
};

/// Core driver: propagates psi0 with y' = deriv(t, y) over the grid. Each
/// substep is advanced with one full and two half RK4 steps; the Richardson
/// difference is the error estimate and the extrapolated state is kept.
/// Substeps shrink until the estimate meets local_tol * h.
template <typename Deriv>
PropagationResult propagate_with(Deriv&& deriv, const FockSpace& space, const StateVector& psi0,
                                 const TimeGrid& grid, PropagationOptions opts,
                                 double steps_per_unit) {
  if (static_cast<std::size_t>(psi0.size()) != space.dim)
    throw std::invalid_argument("propagate: state size does not match Fock space");
  detail::Rk4Stepper<std::remove_reference_t<Deriv>> stepper(deriv);
  if (steps_per_unit <= 0.0) steps_per_unit = 8.0;

  PropagationResult res;
  res.states.reserve(grid.size());
  StateVector psi = psi0, y_full, y_half, y_tmp;
  res.states.push_back(psi);

  for (std::size_t gi = 0; gi + 1 < grid.size(); ++gi) {
    const double t0 = grid.t[gi], t1 = grid.t[gi + 1];
    double t = t0;
    double h = 1.0 / steps_per_unit;
    while (t < t1 - 1e-15 * std::max(1.0, t1)) {
      h = std::min(h, t1 - t);
      while (true) {
        stepper.step(t, h, psi, y_full);
        stepper.step(t, 0.5 * h, psi, y_tmp);
        stepper.step(t + 0.5 * h, 0.5 * h, y_tmp, y_half);
        const double err = (y_full - y_half).norm() / 15.0;
        const double budget = std::max(opts.local_tol * h, 5e-15);
        const double factor =
            err > 0.0 ? std::clamp(0.9 * std::pow(budget / err, 0.25), 0.2, 2.0) : 2.0;
        if (err <= budget) {
          psi = y_half + (y_half - y_full) / 15.0;
          t += h;
          h *= factor;
          break;
        }
        h *= factor;
        if (h < 1e-14) throw std::runtime_error("propagate: step size underflow");
      }
    }
    res.max_norm_drift = std::max(res.max_norm_drift, std::abs(psi.norm() - 1.0));
    if (opts.check_top_layer)
      detail::check_top_layer(space, psi, opts.top_layer_threshold, t1);
    res.states.push_back(psi);
  }
  return res;
}

/// Propagates psi0 through the FockTerm Hamiltonian H(t).
inline PropagationResult propagate(const std::vector<FockTerm>& terms, const FockSpace& space,
                                   const StateVector& psi0, const TimeGrid& grid,
                                   PropagationOptions opts = {}) {
  double steps_per_unit = opts.initial_steps_per_unit;
  if (steps_per_unit <= 0.0) {
    double fastest = 1.0;
    for (const auto& term : terms) {
      if (term.kind == FockTerm::Kind::Number) fastest = std::max(fastest, term.coeff.base);
      if (term.coeff.kind == CouplingKind::ModulatedSin ||
          term.coeff.kind == CouplingKind::ModulatedCos)
        fastest = std::max(fastest, term.coeff.omega_d);
    }
    steps_per_unit = 8.0 * fastest;  // ~50 steps per fastest period
  }
  std::vector<double> scratch;
  auto deriv = [&](double t, const StateVector& y, StateVector& dy) {
    dy.setZero(y.size());
    apply_hamiltonian(terms, space, t, y.data(), dy.data(), scratch);
    dy *= cplx(0.0, -1.0);
  };
  return propagate_with(deriv, space, psi0, grid, opts, steps_per_unit);
}

/// Single-step dense matrix exponential for time-independent Hamiltonians.
inline StateVector propagate_expm(const std::vector<FockTerm>& terms, const FockSpace& space,
                                  const StateVector& psi0, double t) {
  Eigen::MatrixXcd H = build_hamiltonian(terms, space, 0.0);
  Eigen::MatrixXcd U = (cplx(0.0, -1.0) * t * H).exp();
  return U * psi0;
}

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

inline double occupation_expectation(const FockSpace& space, const StateVector& psi,
                                     std::size_t mode) {
  double acc = 0.0;
  for (std::size_t idx = 0; idx < space.dim; ++idx)
    acc += static_cast<double>(space.occupation(idx, mode)) * std::norm(psi[idx]);
  return acc;
}

/// (annihilation_u psi)
inline StateVector apply_annihilation(const FockSpace& space, const StateVector& psi,
                                      std::size_t mode) {
  StateVector out = StateVector::Zero(psi.size());
  const std::size_t s = space.strides[mode];
  const std::size_t c = space.cutoffs[mode];
  for (std::size_t idx = 0; idx < space.dim; ++idx) {
    const std::size_t n = space.occupation(idx, mode);
    if (n < c) out[idx] = std::sqrt(static_cast<double>(n + 1)) * psi[idx + s];
  }
  return out;
}

/// <d_a^dag d_b> for one pure state.
inline cplx pair_correlator(const FockSpace& space, const StateVector& psi, std::size_t mode_a,
                            std::size_t mode_b) {
  const StateVector da = apply_annihilation(space, psi, mode_a);
  const StateVector db = apply_annihilation(space, psi, mode_b);
  return da.dot(db);  // conjugates the first argument
}

/// Energy expectation Re <psi| H(t) |psi>.
inline double energy_expectation(const std::vector<FockTerm>& terms, const FockSpace& space,
                                 double t, const StateVector& psi) {
  StateVector hpsi = StateVector::Zero(psi.size());
  std::vector<double> scratch;
  apply_hamiltonian(terms, space, t, psi.data(), hpsi.data(), scratch);
  return psi.dot(hpsi).real();
}

/// Partial trace over all cavity modes; returns the mechanical density matrix.
/// With the cavity-major index layout the mechanical block is contiguous.
inline Eigen::MatrixXcd reduced_mech_density(const FockSpace& space, const StateVector& psi) {
  std::size_t dim_mech = 1;
  for (std::size_t p = 0; p < space.n_mech; ++p) dim_mech *= space.cutoffs[space.n_cavity + p] + 1;
  const std::size_t blocks = space.dim / dim_mech;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_mech, dim_mech);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto seg = psi.segment(static_cast<Eigen::Index>(b * dim_mech),
                                 static_cast<Eigen::Index>(dim_mech));
    rho.noalias() += seg * seg.adjoint();
  }
  return rho;
}

inline double purity(const Eigen::MatrixXcd& rho) { return rho.squaredNorm(); }

// ---------------------------------------------------------------------------
// Initial states
// ---------------------------------------------------------------------------

/// Coherent (cavities) x Fock (resonators) product state, normalised within
/// the truncated space.
inline StateVector product_state(const FockSpace& space, const InitialState& state,
                                 const std::vector<std::size_t>& mech_occ) {
  std::vector<std::vector<cplx>> amp(space.n_cavity);
  for (std::size_t k = 0; k < space.n_cavity; ++k) {
    const cplx mu = state.mu(k);
    amp[k].resize(space.cutoffs[k] + 1);
    amp[k][0] = std::exp(-0.5 * std::norm(mu));
    for (std::size_t n = 1; n <= space.cutoffs[k]; ++n)
      amp[k][n] = amp[k][n - 1] * mu / std::sqrt(static_cast<double>(n));
  }
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(space.dim));
  for (std::size_t idx = 0; idx < space.dim; ++idx) {
    bool match = true;
    for (std::size_t p = 0; p < space.n_mech; ++p)
      if (space.occupation(idx, space.mech_mode(p)) != mech_occ[p]) {
        match = false;
        break;
      }
    if (!match) continue;
    cplx a(1.0, 0.0);
    for (std::size_t k = 0; k < space.n_cavity; ++k) a *= amp[k][space.occupation(idx, k)];
    psi[idx] = a;
  }
  psi.normalize();
  return psi;
}

/// Thermal mixture of mechanical Fock tuples with total tail mass below
/// `tail`: deterministic enumeration of (weight, occupation) pairs.
inline std::vector<std::pair<double, std::vector<std::size_t>>> thermal_mixture(
    const InitialState& state, const FockSpace& space, double tail = 1e-12) {
  std::vector<std::vector<double>> w(space.n_mech);
  for (std::size_t p = 0; p < space.n_mech; ++p) {
    const double T2 = std::tanh(state.r[p]) * std::tanh(state.r[p]);
    const double C2 = std::cosh(state.r[p]) * std::cosh(state.r[p]);
    const std::size_t jmax = space.cutoffs[space.mech_mode(p)];
    w[p].resize(jmax + 1);
    double wj = 1.0 / C2;
    for (std::size_t j = 0; j <= jmax; ++j) {
      w[p][j] = wj;
      wj *= T2;
    }
  }
  std::vector<std::pair<double, std::vector<std::size_t>>> mix;
  std::vector<std::size_t> occ(space.n_mech, 0);
  const double per_mode_tail = tail / static_cast<double>(space.n_mech);
  // enumerate the product distribution over per-mode truncations chosen so the
  // discarded mass stays below `tail`
  std::vector<std::size_t> bounds(space.n_mech);
  for (std::size_t p = 0; p < space.n_mech; ++p) {
    double cum = 0.0;
    std::size_t j = 0;
    for (; j < w[p].size(); ++j) {
      cum += w[p][j];
      if (1.0 - cum < per_mode_tail) break;
    }
    bounds[p] = std::min(j, w[p].size() - 1);
  }
  while (true) {
    double weight = 1.0;
    for (std::size_t p = 0; p < space.n_mech; ++p) weight *= w[p][occ[p]];
    mix.emplace_back(weight, occ);
    std::size_t p = 0;
    while (p < space.n_mech) {
      if (occ[p] < bounds[p]) {
        ++occ[p];
        break;
      }
      occ[p] = 0;
      ++p;
    }
    if (p == space.n_mech) break;
  }
  return mix;
}

}  // namespace nlom
