#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nlom/f_functions.hpp"

using namespace nlom;

namespace {

SystemSpec constant_system(double g_plus, double g_minus, double lam_plus, double lam_minus,
                           double omega_m) {
  auto spec = SystemSpec::make({5.0}, {omega_m});
  spec.g_p(0, 0) = CouplingSpec::constant(g_plus);
  spec.g_m(0, 0) = CouplingSpec::constant(g_minus);
  spec.lambda_plus[0] = CouplingSpec::constant(lam_plus);
  spec.lambda_minus[0] = CouplingSpec::constant(lam_minus);
  return spec;
}

double max_deviation_vs_closed_form(const SystemSpec& spec, const FSet& fs) {
  double dev = 0.0;
  for (std::size_t p = 0; p < spec.n_mech; ++p) {
    const double w = spec.omega_m[p];
    const double lp = spec.lambda_plus[p].base, lm = spec.lambda_minus[p].base;
    for (std::size_t ti = 0; ti < fs.n_times(); ++ti) {
      const double t = fs.time(ti);
      for (std::size_t n = 0; n < spec.n_cavity; ++n) {
        const auto snap = f_closed_form_constant(spec.g_p(n, p).base, spec.g_m(n, p).base, lp,
                                                 lm, w, t);
        dev = std::max(dev, std::abs(fs.f_k_plus(n, p, ti) - snap.f_k_plus));
        dev = std::max(dev, std::abs(fs.f_k_minus(n, p, ti) - snap.f_k_minus));
        dev = std::max(dev, std::abs(fs.f_c(n, p, ti) - snap.f_c));
        for (std::size_t m = 0; m < spec.n_cavity; ++m) {
          const double fnm = f_nm_closed_form_constant(spec.g_p(n, p).base, spec.g_m(n, p).base,
                                                       spec.g_p(m, p).base, spec.g_m(m, p).base,
                                                       w, t);
          dev = std::max(dev, std::abs(fs.f_nm(n, m, p, ti) - fnm));
        }
      }
      const auto snap = f_closed_form_constant(0.0, 0.0, lp, lm, w, t);
      dev = std::max(dev, std::abs(fs.f_plus(p, ti) - snap.f_plus));
      dev = std::max(dev, std::abs(fs.f_minus(p, ti) - snap.f_minus));
      dev = std::max(dev, std::abs(fs.f_m(p, ti) - w * t));
    }
  }
  return dev;
}

}  // namespace

TEST_CASE("all couplings zero: only F_m is nonzero") {
  auto spec = SystemSpec::make({5.0}, {1.0});
  auto grid = TimeGrid::uniform(2.0, 41);
  auto fs = compute_f_set(spec, grid);
  const std::size_t last = fs.n_times() - 1;
  CHECK(fs.f_m(0, last) == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(fs.f_c(0, 0, last) == 0.0);
  CHECK(fs.f_nm(0, 0, 0, last) == 0.0);
  CHECK(fs.f_plus(0, last) == 0.0);
  CHECK(fs.f_minus(0, last) == 0.0);
  CHECK(fs.f_k_plus(0, 0, last) == 0.0);
  CHECK(fs.f_k_minus(0, 0, last) == 0.0);
}

TEST_CASE("every F-function vanishes at t = 0") {
  auto spec = constant_system(0.1, 0.05, 0.2, 0.07, 1.3);
  auto fs = compute_f_set(spec, TimeGrid::uniform(2.0, 21));
  CHECK(fs.f_m(0, 0) == 0.0);
  CHECK(fs.f_c(0, 0, 0) == 0.0);
  CHECK(fs.f_nm(0, 0, 0, 0) == 0.0);
  CHECK(fs.f_plus(0, 0) == 0.0);
  CHECK(fs.f_minus(0, 0) == 0.0);
  CHECK(fs.f_k_plus(0, 0, 0) == 0.0);
  CHECK(fs.f_k_minus(0, 0, 0) == 0.0);
}

TEST_CASE("constant g: quarter/half-period reference values") {
  // g+ = 0.1, omega = 1: F_k+ = g sin(t), F_k- = -g (1 - cos t)
  auto spec = constant_system(0.1, 0.0, 0.0, 0.0, 1.0);
  auto grid = TimeGrid::uniform(pi, 201);
  auto fs = compute_f_set(spec, grid);
  const std::size_t last = fs.n_times() - 1;
  CHECK(fs.f_k_plus(0, 0, last) == Catch::Approx(0.0).margin(1e-10));
  CHECK(fs.f_k_minus(0, 0, last) == Catch::Approx(-0.2).epsilon(1e-9));
  CHECK(fs.f_nm(0, 0, 0, last) == Catch::Approx(-0.02 * pi).epsilon(1e-8));
}

TEST_CASE("closed-form snapshot examples") {
  auto zero = f_closed_form_constant(0.0, 0.0, 0.0, 0.0, 1.0, 1.7);
  CHECK(zero.f_c == 0.0);
  CHECK(zero.f_nm == 0.0);
  CHECK(zero.f_plus == 0.0);
  CHECK(zero.f_minus == 0.0);
  CHECK(zero.f_k_plus == 0.0);
  CHECK(zero.f_k_minus == 0.0);

  auto full_period = f_closed_form_constant(0.1, 0.0, 0.0, 0.0, 1.0, 2.0 * pi);
  CHECK(full_period.f_k_plus == Catch::Approx(0.0).margin(1e-15));
  CHECK(full_period.f_k_minus == Catch::Approx(0.0).margin(1e-15));

  auto lam = f_closed_form_constant(0.0, 0.0, 0.3, 0.0, 1.0, 0.5 * pi);
  CHECK(lam.f_plus == Catch::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("quadrature matches closed forms below 1e-8 at 200 samples per period") {
  auto spec = constant_system(0.1, 0.03, 0.2, 0.05, 1.0);
  const double t_end = 4.0 * pi;
  const auto grid = TimeGrid::uniform(t_end, 401);  // 200 per period
  auto fs = compute_f_set(spec, grid);
  CHECK(max_deviation_vs_closed_form(spec, fs) < 1e-8);
}

TEST_CASE("grid refinement convergence order") {
  auto spec = constant_system(0.1, 0.0, 0.15, 0.0, 1.0);
  const auto grid = TimeGrid::uniform(2.0 * pi, 41);  // coarse: 20 per period
  const double dev_s1 =
      max_deviation_vs_closed_form(spec, compute_f_set(spec, grid, QuadratureRule::Simpson, 1));
  const double dev_s2 =
      max_deviation_vs_closed_form(spec, compute_f_set(spec, grid, QuadratureRule::Simpson, 2));
  const double ratio_s = dev_s1 / dev_s2;
  CHECK(ratio_s > 8.0);
  CHECK(ratio_s < 40.0);

  const double dev_t1 =
      max_deviation_vs_closed_form(spec, compute_f_set(spec, grid, QuadratureRule::Trapezoid, 1));
  const double dev_t2 =
      max_deviation_vs_closed_form(spec, compute_f_set(spec, grid, QuadratureRule::Trapezoid, 2));
  const double ratio_t = dev_t1 / dev_t2;
  CHECK(ratio_t > 2.8);
  CHECK(ratio_t < 6.0);
}

TEST_CASE("|F_k|^2 for pure constant g+ equals (2g^2/w^2)(1 - cos wt)") {
  const double g = 0.1, w = 1.3;
  auto spec = constant_system(g, 0.0, 0.0, 0.0, w);
  auto grid = TimeGrid::uniform(3.0 * pi, 301);
  auto fs = compute_f_set(spec, grid);
  for (std::size_t ti = 0; ti < fs.n_times(); ti += 17) {
    const double expected = 2.0 * g * g / (w * w) * (1.0 - std::cos(w * fs.time(ti)));
    CHECK(std::norm(fs.F_k(0, 0, ti)) == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("delta antisymmetry") {
  auto spec = SystemSpec::make({5.0, 6.0}, {1.0});
  spec.g_p(0, 0) = CouplingSpec::constant(0.1);
  spec.g_p(1, 0) = CouplingSpec::constant(0.07);
  auto fs = compute_f_set(spec, TimeGrid::uniform(2.0, 81));
  const std::size_t modes_arr[] = {0, 1};
  const int n_occ[] = {2, 0};
  const int m_occ[] = {0, 3};
  const std::size_t ti = 60;
  const cplx d_nm = fs.delta(0, modes_arr, n_occ, m_occ, ti);
  const cplx d_mn = fs.delta(0, modes_arr, m_occ, n_occ, ti);
  CHECK(std::abs(d_nm + d_mn) < 1e-15);
  CHECK(std::abs(d_nm) > 0.0);
}

TEST_CASE("multiresonator columns are independent single-resonator problems") {
  auto two = SystemSpec::make({5.0}, {1.0, 2.3});
  two.g_p(0, 0) = CouplingSpec::constant(0.1);
  two.g_p(0, 1) = CouplingSpec::constant(0.04);
  two.lambda_plus[0] = CouplingSpec::constant(0.2);
  two.lambda_plus[1] = CouplingSpec::constant(0.15);
  auto grid = TimeGrid::uniform(5.0, 501);
  auto fs2 = compute_f_set(two, grid);

  auto one = constant_system(0.04, 0.0, 0.15, 0.0, 2.3);
  auto fs1 = compute_f_set(one, grid);
  const std::size_t last = grid.size() - 1;
  CHECK(fs2.f_k_plus(0, 1, last) == Catch::Approx(fs1.f_k_plus(0, 0, last)).margin(1e-14));
  CHECK(fs2.f_c(0, 1, last) == Catch::Approx(fs1.f_c(0, 0, last)).margin(1e-14));
  CHECK(fs2.f_nm(0, 0, 1, last) == Catch::Approx(fs1.f_nm(0, 0, 0, last)).margin(1e-14));
}

TEST_CASE("modulated coupling phase integral matches quadrature of F_k") {
  const double w = 1.0, wd = 0.8, g = 0.1, kappa = 0.5;
  auto spec = SystemSpec::make({5.0}, {w});
  spec.g_p(0, 0) = CouplingSpec::modulated_sin(g, kappa, wd);
  auto grid = TimeGrid::uniform(8.0, 801);
  auto fs = compute_f_set(spec, grid);
  for (std::size_t ti = 0; ti < grid.size(); ti += 97) {
    const cplx closed = coupling_phase_integral(spec.g_p(0, 0), w, fs.time(ti));
    CHECK(std::abs(fs.F_k(0, 0, ti) - closed) < 1e-9);
  }
}

TEST_CASE("tabulated coupling reproducing a constant matches the constant result") {
  auto spec_const = constant_system(0.1, 0.0, 0.0, 0.0, 1.0);
  auto spec_tab = constant_system(0.0, 0.0, 0.0, 0.0, 1.0);
  spec_tab.g_p(0, 0) = CouplingSpec::tabulated({{0.0, 0.1}, {5.0, 0.1}, {10.0, 0.1}});
  auto grid = TimeGrid::uniform(6.0, 241);
  auto a = compute_f_set(spec_const, grid);
  auto b = compute_f_set(spec_tab, grid);
  const std::size_t last = grid.size() - 1;
  CHECK(a.f_k_plus(0, 0, last) == Catch::Approx(b.f_k_plus(0, 0, last)).margin(1e-13));
  CHECK(a.f_nm(0, 0, 0, last) == Catch::Approx(b.f_nm(0, 0, 0, last)).margin(1e-13));
}

TEST_CASE("coarse grid emits a step warning") {
  auto spec = constant_system(0.1, 0.0, 0.0, 0.0, 10.0);
  auto fs = compute_f_set(spec, TimeGrid::uniform(10.0, 21));  // ~3 samples per period
  REQUIRE_FALSE(fs.warnings().empty());
  CHECK(fs.warnings()[0].find("recommended step") != std::string::npos);
}

TEST_CASE("phase integral helper is stable near a = 0") {
  CHECK(std::abs(phase_integral(0.0, 2.0) - cplx(2.0, 0.0)) < 1e-15);
  CHECK(std::abs(phase_integral(1e-12, 3.0) - cplx(3.0, 1e-12 * 4.5)) < 1e-14);
  const double a = 0.7, t = 2.0;
  const cplx expected = (std::exp(cplx(0.0, a * t)) - 1.0) / cplx(0.0, a);
  CHECK(std::abs(phase_integral(a, t) - expected) < 1e-14);
}
