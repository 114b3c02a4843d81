#pragma once

// Truncated Fock space, Hamiltonian operator terms and their matrix-free
// application. Index convention: occupation tuples are ordered cavity modes
// first, then resonators, and flattened row-major (the last listed mode varies
// fastest):  idx = ((n_0 (c_1+1) + n_1) ... ) (c_last+1) + n_last.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlom/core.hpp"

namespace nlom {

struct FockSpace {
  std::size_t n_cavity = 0;
  std::size_t n_mech = 0;
  std::vector<std::size_t> cutoffs;  // per mode, cavities then resonators
  std::vector<std::size_t> strides;
  std::size_t dim = 0;

  static constexpr std::size_t default_budget = 4096;

  static FockSpace make(const std::vector<std::size_t>& cutoffs_cavity,
                        const std::vector<std::size_t>& cutoffs_mech,
                        std::size_t budget = default_budget) {
    FockSpace s;
    s.n_cavity = cutoffs_cavity.size();
    s.n_mech = cutoffs_mech.size();
    s.cutoffs = cutoffs_cavity;
    s.cutoffs.insert(s.cutoffs.end(), cutoffs_mech.begin(), cutoffs_mech.end());
    s.strides.assign(s.cutoffs.size(), 1);
    for (std::size_t i = s.cutoffs.size(); i-- > 1;)
      s.strides[i - 1] = s.strides[i] * (s.cutoffs[i] + 1);
    s.dim = s.strides.empty() ? 0 : s.strides[0] * (s.cutoffs[0] + 1);
    if (s.dim > budget)
      throw std::runtime_error("Fock space dimension " + std::to_string(s.dim) +
                               " exceeds budget " + std::to_string(budget));
    return s;
  }

  std::size_t n_modes() const { return cutoffs.size(); }

  std::size_t occupation(std::size_t idx, std::size_t mode) const {
    return (idx / strides[mode]) % (cutoffs[mode] + 1);
  }

  std::size_t index(const std::vector<std::size_t>& occ) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) idx += occ[i] * strides[i];
    return idx;
  }

  std::size_t mech_mode(std::size_t p) const { return n_cavity + p; }
};

/// One additive Hamiltonian term with a time-dependent scalar coefficient.
struct FockTerm {
  enum class Kind {
    Number,      // c(t) * N_u            (u = any mode)
    BPlus,       // c(t) * (b_p^dag + b_p)
    BMinus,      // c(t) * i (b_p^dag - b_p)
    NumBPlus,    // c(t) * N_n (b_p^dag + b_p)
    NumBMinus,   // c(t) * N_n i (b_p^dag - b_p)
    APlusBPlus,  // c(t) * (a_n^dag + a_n)(b_p^dag + b_p)
  };
  Kind kind;
  std::size_t mode = 0;  // cavity index n, or the mode u for Number
  std::size_t res = 0;   // resonator index p
  CouplingSpec coeff;
};

/// Terms of the closed multimode Hamiltonian (hbar = 1).
inline std::vector<FockTerm> hamiltonian_terms(const SystemSpec& spec) {
  std::vector<FockTerm> terms;
  for (std::size_t n = 0; n < spec.n_cavity; ++n)
    terms.push_back({FockTerm::Kind::Number, n, 0, CouplingSpec::constant(spec.omega_c[n])});
  for (std::size_t p = 0; p < spec.n_mech; ++p)
    terms.push_back(
        {FockTerm::Kind::Number, spec.n_cavity + p, 0, CouplingSpec::constant(spec.omega_m[p])});
  for (std::size_t p = 0; p < spec.n_mech; ++p) {
    if (!spec.lambda_plus[p].is_identically_zero())
      terms.push_back({FockTerm::Kind::BPlus, 0, p, spec.lambda_plus[p]});
    if (!spec.lambda_minus[p].is_identically_zero())
      terms.push_back({FockTerm::Kind::BMinus, 0, p, spec.lambda_minus[p]});
  }
  for (std::size_t n = 0; n < spec.n_cavity; ++n)
    for (std::size_t p = 0; p < spec.n_mech; ++p) {
      if (!spec.g_p(n, p).is_identically_zero())
        terms.push_back({FockTerm::Kind::NumBPlus, n, p, spec.g_p(n, p)});
      if (!spec.g_m(n, p).is_identically_zero())
        terms.push_back({FockTerm::Kind::NumBMinus, n, p, spec.g_m(n, p)});
    }
  return terms;
}

namespace detail {

template <typename Scalar>
void apply_b_ladder(const FockSpace& space, std::size_t u, cplx up_coeff, cplx down_coeff,
                    const Scalar* in, Scalar* out, const double* num_weight) {
  const std::size_t s = space.strides[u];
  const std::size_t c = space.cutoffs[u];
  for (std::size_t idx = 0; idx < space.dim; ++idx) {
    const std::size_t n = space.occupation(idx, u);
    const double w = num_weight ? num_weight[idx] : 1.0;
    if (w == 0.0) continue;
    if (n < c) out[idx + s] += up_coeff * w * std::sqrt(static_cast<double>(n + 1)) * in[idx];
    if (n > 0) out[idx - s] += down_coeff * w * std::sqrt(static_cast<double>(n)) * in[idx];
  }
}

}  // namespace detail

/// out += H(t) in, matrix-free.
inline void apply_hamiltonian(const std::vector<FockTerm>& terms, const FockSpace& space,
                              double t, const cplx* in, cplx* out,
                              std::vector<double>& scratch) {
  scratch.resize(space.dim);
  for (const auto& term : terms) {
    const double c = term.coeff(t);
    if (c == 0.0) continue;
    switch (term.kind) {
      case FockTerm::Kind::Number:
        for (std::size_t idx = 0; idx < space.dim; ++idx)
          out[idx] += c * static_cast<double>(space.occupation(idx, term.mode)) * in[idx];
        break;
      case FockTerm::Kind::BPlus:
        detail::apply_b_ladder(space, space.mech_mode(term.res), cplx(c, 0.0), cplx(c, 0.0), in,
                               out, nullptr);
        break;
      case FockTerm::Kind::BMinus:
        detail::apply_b_ladder(space, space.mech_mode(term.res), cplx(0.0, c), cplx(0.0, -c), in,
                               out, nullptr);
        break;
      case FockTerm::Kind::NumBPlus: {
        for (std::size_t idx = 0; idx < space.dim; ++idx)
          scratch[idx] = static_cast<double>(space.occupation(idx, term.mode));
        detail::apply_b_ladder(space, space.mech_mode(term.res), cplx(c, 0.0), cplx(c, 0.0), in,
                               out, scratch.data());
        break;
      }
      case FockTerm::Kind::NumBMinus: {
        for (std::size_t idx = 0; idx < space.dim; ++idx)
          scratch[idx] = static_cast<double>(space.occupation(idx, term.mode));
        detail::apply_b_ladder(space, space.mech_mode(term.res), cplx(0.0, c), cplx(0.0, -c), in,
                               out, scratch.data());
        break;
      }
      case FockTerm::Kind::APlusBPlus: {
        // (a^dag + a)(b^dag + b): apply the cavity ladder into a temp, then the
        // mech ladder from it.
        static thread_local std::vector<cplx> tmp;
        tmp.assign(space.dim, cplx(0.0, 0.0));
        const std::size_t ua = term.mode;
        const std::size_t sa = space.strides[ua];
        const std::size_t ca = space.cutoffs[ua];
        for (std::size_t idx = 0; idx < space.dim; ++idx) {
          const std::size_t n = space.occupation(idx, ua);
          if (n < ca) tmp[idx + sa] += std::sqrt(static_cast<double>(n + 1)) * in[idx];
          if (n > 0) tmp[idx - sa] += std::sqrt(static_cast<double>(n)) * in[idx];
        }
        detail::apply_b_ladder(space, space.mech_mode(term.res), cplx(c, 0.0), cplx(c, 0.0),
                               tmp.data(), out, nullptr);
        break;
      }
    }
  }
}

/// Mode frequencies recovered from the Number terms (the free Hamiltonian).
inline std::vector<double> mode_frequencies(const std::vector<FockTerm>& terms,
                                            std::size_t n_modes) {
  std::vector<double> freqs(n_modes, 0.0);
  for (const auto& term : terms)
    if (term.kind == FockTerm::Kind::Number) freqs[term.mode] += term.coeff.base;
  return freqs;
}

/// out += V_I(t) in, the interaction picture of the coupling part with respect
/// to the free Hamiltonian: Number terms drop, every b-ladder acquires the
/// phase e^{+i w_m t} on b^dag (cavity number factors are invariant). The
/// APlusBPlus term is not supported here (it belongs to the linearised model,
/// which has its own rotating-term machinery).
inline void apply_hamiltonian_interaction(const std::vector<FockTerm>& terms,
                                          const FockSpace& space,
                                          const std::vector<double>& freqs, double t,
                                          const cplx* in, cplx* out,
                                          std::vector<double>& scratch) {
  scratch.resize(space.dim);
  for (const auto& term : terms) {
    if (term.kind == FockTerm::Kind::Number) continue;
    if (term.kind == FockTerm::Kind::APlusBPlus)
      throw std::invalid_argument("apply_hamiltonian_interaction: APlusBPlus unsupported");
    const double c = term.coeff(t);
    if (c == 0.0) continue;
    const std::size_t ub = space.mech_mode(term.res);
    const cplx rot = std::exp(cplx(0.0, freqs[ub] * t));
    const bool minus_kind = term.kind == FockTerm::Kind::BMinus ||
                            term.kind == FockTerm::Kind::NumBMinus;
    const cplx up = (minus_kind ? cplx(0.0, c) : cplx(c, 0.0)) * rot;
    const cplx down = std::conj(up);
    const bool weighted = term.kind == FockTerm::Kind::NumBPlus ||
                          term.kind == FockTerm::Kind::NumBMinus;
    if (weighted) {
      for (std::size_t idx = 0; idx < space.dim; ++idx)
        scratch[idx] = static_cast<double>(space.occupation(idx, term.mode));
      detail::apply_b_ladder(space, ub, up, down, in, out, scratch.data());
    } else {
      detail::apply_b_ladder(space, ub, up, down, in, out, nullptr);
    }
  }
}

/// Dense Hamiltonian matrix at time t (columns via matrix-free application).
inline Eigen::MatrixXcd build_hamiltonian(const std::vector<FockTerm>& terms,
                                          const FockSpace& space, double t) {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(space.dim, space.dim);
  std::vector<cplx> e(space.dim, cplx(0.0, 0.0)), col(space.dim);
  std::vector<double> scratch;
  for (std::size_t j = 0; j < space.dim; ++j) {
    e[j] = 1.0;
    std::fill(col.begin(), col.end(), cplx(0.0, 0.0));
    apply_hamiltonian(terms, space, t, e.data(), col.data(), scratch);
    for (std::size_t i = 0; i < space.dim; ++i) H(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)) = col[i];
    e[j] = 0.0;
  }
  return H;
}

inline Eigen::MatrixXcd build_hamiltonian(const SystemSpec& spec, const FockSpace& space,
                                          double t) {
  return build_hamiltonian(hamiltonian_terms(spec), space, t);
}

}  // namespace nlom
