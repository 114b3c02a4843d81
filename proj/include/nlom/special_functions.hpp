#pragma once

// Modified Bessel functions I_n, (generalised) Laguerre polynomials, the
// polynomial confluent hypergeometric case, and the closed-form expectation
// identities used by the entropy formulas (coherent-state number phases,
// thermal displacement traces). Series use compensated summation.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlom/core.hpp"

namespace nlom {

/// Kahan compensated accumulator.
template <typename T>
class CompensatedSum {
 public:
  void add(T term) {
    const T y = term - comp_;
    const T t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  T value() const { return sum_; }

 private:
  T sum_{};
  T comp_{};
};

struct SeriesAccuracy {
  double abs_tol = 1e-16;
  std::size_t max_terms = 4000;
};

/// Modified Bessel function I_n(z), n >= 0, z >= 0, by ascending power series
/// with term-ratio stopping. Overflows to +inf for very large z; use
/// bessel_i_scaled there.
inline double bessel_i(int n, double z, SeriesAccuracy acc = {}) {
  if (n < 0) throw std::invalid_argument("bessel_i: order must be >= 0");
  if (z < 0.0) throw std::invalid_argument("bessel_i: argument must be >= 0");
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  const double x = 0.5 * z;
  // term_0 = x^n / n!
  double lt = n * std::log(x) - std::lgamma(n + 1.0);
  if (lt > 700.0) return std::numeric_limits<double>::infinity();
  double term = std::exp(lt);
  CompensatedSum<double> s;
  s.add(term);
  for (std::size_t j = 1; j < acc.max_terms; ++j) {
    term *= x * x / (static_cast<double>(j) * (static_cast<double>(j) + n));
    s.add(term);
    if (term < acc.abs_tol * std::abs(s.value())) break;
  }
  return s.value();
}

/// exp(-z) I_n(z), stable for large z (log-space term accumulation).
inline double bessel_i_scaled(int n, double z, SeriesAccuracy acc = {}) {
  if (n < 0) throw std::invalid_argument("bessel_i_scaled: order must be >= 0");
  if (z < 0.0) throw std::invalid_argument("bessel_i_scaled: argument must be >= 0");
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  if (z < 600.0) return std::exp(-z) * bessel_i(n, z, acc);
  const double lx = std::log(0.5 * z);
  double lterm = n * lx - std::lgamma(n + 1.0) - z;
  CompensatedSum<double> s;
  s.add(std::exp(lterm));
  for (std::size_t j = 1; j < acc.max_terms; ++j) {
    lterm += 2.0 * lx - std::log(static_cast<double>(j)) -
             std::log(static_cast<double>(j) + n);
    const double term = std::exp(lterm);
    s.add(term);
    if (term < acc.abs_tol * std::abs(s.value())) break;
  }
  return s.value();
}

/// Generalised Laguerre polynomial L_n^{(q)}(z) by the three-term recurrence.
inline double laguerre(int n, int q, double z) {
  if (n < 0 || q < 0) throw std::invalid_argument("laguerre: n, q must be >= 0");
  if (n == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + q - z;
  for (int k = 1; k < n; ++k) {
    const double lp1 =
        ((2.0 * k + 1.0 + q - z) * l - (static_cast<double>(k) + q) * lm1) / (k + 1.0);
    lm1 = l;
    l = lp1;
  }
  return l;
}

inline double laguerre(int n, double z) { return laguerre(n, 0, z); }

/// 1F1(-n, b; z) for integer n >= 0, integer b >= 1 (the only case needed):
/// 1F1(-n, q+1; z) = n! q! / (n+q)! * L_n^{(q)}(z).
inline double hyp1f1_neg_int(int n, int b, double z) {
  if (n < 0 || b < 1) throw std::invalid_argument("hyp1f1_neg_int: need n >= 0, b >= 1");
  const int q = b - 1;
  const double lscale = std::lgamma(n + 1.0) + std::lgamma(q + 1.0) - std::lgamma(n + q + 1.0);
  return std::exp(lscale) * laguerre(n, q, z);
}

/// Displacement-operator matrix element <l| D(alpha) |l'> in the Fock basis,
/// D(alpha) = exp(alpha b^dag - alpha^* b).
inline cplx displacement_element(int l, int lp, cplx alpha) {
  const double a2 = std::norm(alpha);
  if (l >= lp) {
    const int d = l - lp;
    const double lmag = 0.5 * (std::lgamma(lp + 1.0) - std::lgamma(l + 1.0));
    cplx pw = std::pow(alpha, d);
    return std::exp(lmag - 0.5 * a2) * pw * laguerre(lp, d, a2);
  }
  const int d = lp - l;
  const double lmag = 0.5 * (std::lgamma(l + 1.0) - std::lgamma(lp + 1.0));
  cplx pw = std::pow(-std::conj(alpha), d);
  return std::exp(lmag - 0.5 * a2) * pw * laguerre(l, d, a2);
}

// ---------------------------------------------------------------------------
// Closed-form expectation identities and their brute-force series companions.
// I_alpha   = <mu| exp(-i alpha N) |mu>                    = exp(-|mu|^2 (1 - e^{-i alpha}))
// J_alpha   = Tr(rho_th D(alpha))                          = exp(-cosh(2r)|alpha|^2 / 2)
// Jt_alpha  = Tr(rho_th D(alpha) b)                        = alpha sinh^2 r exp(-cosh(2r)|alpha|^2 / 2)
// Lt_alpha  = sum_{l,l'} p_l p_{l'} |<l|D(alpha)|l'>|^2    = exp(-|alpha|^2 / cosh 2r) / cosh 2r
// ---------------------------------------------------------------------------

inline cplx identity_i_closed(double alpha, double mu_abs2) {
  return std::exp(-mu_abs2 * (1.0 - std::exp(cplx(0.0, -alpha))));
}

inline cplx identity_i_series(double alpha, double mu_abs2, int pmax = 80) {
  CompensatedSum<double> re, im;
  double w = std::exp(-mu_abs2);  // Poisson weight p=0
  for (int p = 0; p <= pmax; ++p) {
    re.add(w * std::cos(alpha * p));
    im.add(-w * std::sin(alpha * p));
    w *= mu_abs2 / (p + 1.0);
  }
  return {re.value(), im.value()};
}

inline double identity_j_closed(cplx alpha, double r) {
  return std::exp(-0.5 * std::cosh(2.0 * r) * std::norm(alpha));
}

inline cplx identity_j_series(cplx alpha, double r, int nmax = 120) {
  const double T2 = std::tanh(r) * std::tanh(r);
  const double C2 = std::cosh(r) * std::cosh(r);
  CompensatedSum<double> re, im;
  double w = 1.0 / C2;
  for (int n = 0; n <= nmax; ++n) {
    const cplx el = displacement_element(n, n, alpha);
    re.add(w * el.real());
    im.add(w * el.imag());
    w *= T2;
  }
  return {re.value(), im.value()};
}

inline cplx identity_jt_closed(cplx alpha, double r) {
  const double s = std::sinh(r);
  return alpha * (s * s) * std::exp(-0.5 * std::cosh(2.0 * r) * std::norm(alpha));
}

inline cplx identity_jt_series(cplx alpha, double r, int nmax = 120) {
  const double T2 = std::tanh(r) * std::tanh(r);
  const double C2 = std::cosh(r) * std::cosh(r);
  CompensatedSum<double> re, im;
  double w = T2 / C2;
  for (int n = 1; n <= nmax; ++n) {
    const cplx el = std::sqrt(static_cast<double>(n)) * displacement_element(n, n - 1, alpha);
    re.add(w * el.real());
    im.add(w * el.imag());
    w *= T2;
  }
  return {re.value(), im.value()};
}

inline double identity_lt_closed(cplx alpha, double r) {
  const double c2r = std::cosh(2.0 * r);
  return std::exp(-std::norm(alpha) / c2r) / c2r;
}

inline double identity_lt_series(cplx alpha, double r, int lmax = 60) {
  const double T2 = std::tanh(r) * std::tanh(r);
  const double C4 = std::pow(std::cosh(r), 4);
  CompensatedSum<double> s;
  double wl = 1.0 / C4;
  for (int l = 0; l <= lmax; ++l) {
    double w = wl;
    for (int lp = 0; lp <= lmax; ++lp) {
      s.add(w * std::norm(displacement_element(l, lp, alpha)));
      w *= T2;
    }
    wl *= T2;
  }
  return s.value();
}

struct IdentityReportRow {
  std::string name;
  double alpha;
  double r;
  double mu_abs2;
  double deviation;
};

struct IdentityReport {
  std::vector<IdentityReportRow> rows;
  double max_deviation = 0.0;
};

/// Evaluates each closed-form identity against its truncated Fock series over
/// a fixed grid of (alpha, r, mu) values and reports the deviations.
inline IdentityReport identity_suite() {
  IdentityReport rep;
  const std::vector<double> alphas = {0.0, 0.1, 0.3, 0.5, 0.7, 1.0, 1.5};
  const std::vector<double> rs = {0.0, 0.1, 0.3, 0.6, 1.0};
  const std::vector<double> mu2s = {0.0, 0.25, 1.0, 2.25, 4.0};
  auto push = [&rep](const std::string& name, double a, double r, double mu2, double dev) {
    rep.rows.push_back({name, a, r, mu2, dev});
    rep.max_deviation = std::max(rep.max_deviation, dev);
  };
  for (double a : alphas) {
    for (double mu2 : mu2s)
      push("I_alpha", a, 0.0, mu2,
           std::abs(identity_i_series(a, mu2) - identity_i_closed(a, mu2)));
    for (double r : rs) {
      const cplx al(a * 0.8, a * 0.6);  // exercise complex phases, |al| = a
      push("J_alpha", a, r, 0.0, std::abs(identity_j_series(al, r) - identity_j_closed(al, r)));
      push("Jt_alpha", a, r, 0.0,
           std::abs(identity_jt_series(al, r) - identity_jt_closed(al, r)));
      push("Lt_alpha", a, r, 0.0,
           std::abs(identity_lt_series(al, r) - identity_lt_closed(al, r)));
    }
  }
  return rep;
}

}  // namespace nlom
