#pragma once

// Scenario-level brute-force verification: propagate the truncated-Fock
// Hamiltonian over a grid (thermal initial states as deterministic Fock
// mixtures) and measure the same observables the analytic modules predict.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlom/core.hpp"
#include "nlom/fock.hpp"
#include "nlom/observables.hpp"
#include "nlom/propagate.hpp"

namespace nlom {

struct OracleOptions {
  std::size_t budget = FockSpace::default_budget;
  PropagationOptions prop;
  bool measure_purity = false;
  double thermal_tail = 1e-12;
  // Propagate in the interaction picture of the free Hamiltonian. Populations,
  // correlator moduli, and the reduced-state purity are picture-invariant, and
  // the step size then follows the couplings instead of the optical frequency.
  bool interaction_picture = true;
};

struct OracleSeries {
  std::vector<double> t;
  std::vector<std::vector<double>> cavity_pop;  // [k][ti]
  std::vector<std::vector<double>> mech_pop;    // [p][ti]
  std::vector<Pair> pairs;
  std::vector<std::vector<cplx>> corr;          // [pair][ti], <d_a^dag d_b>
  std::vector<double> purity;                   // [ti] when requested
  double max_norm_drift = 0.0;

  G1Result g1_at(std::size_t pair_idx, std::size_t ti) const {
    const Pair& pr = pairs[pair_idx];
    auto pop = [&](Pair::Kind kind, std::size_t which, bool first) -> double {
      switch (kind) {
        case Pair::Kind::ModeMode:
          return cavity_pop[which][ti];
        case Pair::Kind::ModeRes:
          return first ? cavity_pop[which][ti] : mech_pop[which][ti];
        case Pair::Kind::ResRes:
          return mech_pop[which][ti];
      }
      return 0.0;
    };
    const double na = pop(pr.kind, pr.a, true);
    const double nb = pop(pr.kind, pr.b, false);
    if (na < population_floor || nb < population_floor) return G1Result::undefined();
    return G1Result::of(std::abs(corr[pair_idx][ti]) / std::sqrt(na * nb));
  }
};

/// A propagation problem: Hamiltonian terms over a Fock space plus the initial
/// state (coherent cavities, thermal resonators).
struct OracleProblem {
  std::vector<FockTerm> terms;
  FockSpace space;
  InitialState state;
};

inline OracleProblem make_oracle_problem(const SystemSpec& spec, const InitialState& state,
                                         const std::vector<std::size_t>& cutoffs_cavity,
                                         const std::vector<std::size_t>& cutoffs_mech,
                                         std::size_t budget = FockSpace::default_budget) {
  if (cutoffs_cavity.size() != spec.n_cavity || cutoffs_mech.size() != spec.n_mech)
    throw std::invalid_argument("oracle cutoffs must match the system mode counts");
  return {hamiltonian_terms(spec), FockSpace::make(cutoffs_cavity, cutoffs_mech, budget), state};
}

/// Propagates every thermal-mixture component and accumulates the
/// mixture-weighted observables. Correlators are averaged as complex numbers;
/// the reduced-state purity uses the mixture-combined density matrix.
inline OracleSeries run_oracle(const OracleProblem& prob, const TimeGrid& grid,
                               std::vector<Pair> pairs, OracleOptions opts = {}) {
  const FockSpace& space = prob.space;
  const std::size_t T = grid.size();
  OracleSeries out;
  out.t = grid.t;
  out.pairs = std::move(pairs);
  out.cavity_pop.assign(space.n_cavity, std::vector<double>(T, 0.0));
  out.mech_pop.assign(space.n_mech, std::vector<double>(T, 0.0));
  out.corr.assign(out.pairs.size(), std::vector<cplx>(T, cplx(0.0, 0.0)));

  std::size_t dim_mech = 1;
  for (std::size_t p = 0; p < space.n_mech; ++p) dim_mech *= space.cutoffs[space.mech_mode(p)] + 1;
  std::vector<Eigen::MatrixXcd> rho_m;
  if (opts.measure_purity)
    rho_m.assign(T, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_mech),
                                           static_cast<Eigen::Index>(dim_mech)));

  const std::vector<double> freqs = mode_frequencies(prob.terms, space.n_modes());
  double coupling_fastest = 1e-3;
  for (const auto& term : prob.terms) {
    if (term.kind == FockTerm::Kind::Number) continue;
    coupling_fastest = std::max(coupling_fastest, freqs[space.mech_mode(term.res)]);
    if (term.coeff.kind == CouplingKind::ModulatedSin ||
        term.coeff.kind == CouplingKind::ModulatedCos)
      coupling_fastest =
          std::max(coupling_fastest, term.coeff.omega_d + freqs[space.mech_mode(term.res)]);
  }
  std::vector<double> scratch;
  auto deriv_ip = [&](double t, const StateVector& y, StateVector& dy) {
    dy.setZero(y.size());
    apply_hamiltonian_interaction(prob.terms, space, freqs, t, y.data(), dy.data(), scratch);
    dy *= cplx(0.0, -1.0);
  };

  const auto mixture = thermal_mixture(prob.state, space, opts.thermal_tail);
  double total_weight = 0.0;
  for (const auto& [weight, mech_occ] : mixture) {
    total_weight += weight;
    const StateVector psi0 = product_state(space, prob.state, mech_occ);
    // scale the overflow guard by the component weight: a negligible-weight
    // component may legitimately sit near its cutoff
    PropagationOptions popts = opts.prop;
    popts.top_layer_threshold = opts.prop.top_layer_threshold / std::max(weight, 1e-300);
    PropagationResult run =
        opts.interaction_picture
            ? propagate_with(deriv_ip, space, psi0, grid, popts, 8.0 * coupling_fastest)
            : propagate(prob.terms, space, psi0, grid, popts);
    out.max_norm_drift = std::max(out.max_norm_drift, run.max_norm_drift);
    for (std::size_t ti = 0; ti < T; ++ti) {
      const StateVector& psi = run.states[ti];
      for (std::size_t k = 0; k < space.n_cavity; ++k)
        out.cavity_pop[k][ti] += weight * occupation_expectation(space, psi, k);
      for (std::size_t p = 0; p < space.n_mech; ++p)
        out.mech_pop[p][ti] += weight * occupation_expectation(space, psi, space.mech_mode(p));
      for (std::size_t q = 0; q < out.pairs.size(); ++q) {
        const Pair& pr = out.pairs[q];
        std::size_t ua = 0, ub = 0;
        switch (pr.kind) {
          case Pair::Kind::ModeMode:
            ua = pr.a;
            ub = pr.b;
            break;
          case Pair::Kind::ModeRes:
            ua = pr.a;
            ub = space.mech_mode(pr.b);
            break;
          case Pair::Kind::ResRes:
            ua = space.mech_mode(pr.a);
            ub = space.mech_mode(pr.b);
            break;
        }
        out.corr[q][ti] += weight * pair_correlator(space, psi, ua, ub);
      }
      if (opts.measure_purity) rho_m[ti] += weight * reduced_mech_density(space, psi);
    }
  }

  // Renormalise away the (tiny) truncated thermal tail so weights sum to 1.
  const double inv_w = 1.0 / total_weight;
  for (auto& row : out.cavity_pop)
    for (double& v : row) v *= inv_w;
  for (auto& row : out.mech_pop)
    for (double& v : row) v *= inv_w;
  for (auto& row : out.corr)
    for (cplx& v : row) v *= inv_w;
  if (opts.measure_purity) {
    out.purity.resize(T);
    for (std::size_t ti = 0; ti < T; ++ti) out.purity[ti] = purity(rho_m[ti] * inv_w);
  }
  return out;
}

}  // namespace nlom
