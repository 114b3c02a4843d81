#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nlom/f_functions.hpp"
#include "nlom/observables.hpp"
#include "nlom/oracle.hpp"
#include "nlom/reduced_state.hpp"

using namespace nlom;

namespace {

SystemSpec om_system(double g, double omega_m = 1.0) {
  auto spec = SystemSpec::make({5.0}, {omega_m});
  spec.g_p(0, 0) = CouplingSpec::constant(g);
  return spec;
}

InitialState coherent_state(cplx mu, std::vector<double> r = {0.0}) {
  InitialState st;
  if (mu != cplx(0.0, 0.0)) st.coherent[0] = mu;
  st.r = std::move(r);
  return st;
}

}  // namespace

TEST_CASE("vacuum cavity gives a single ensemble term displaced by |F|") {
  auto spec = om_system(0.1);
  spec.lambda_plus[0] = CouplingSpec::constant(0.2);
  auto grid = TimeGrid::uniform(2.0, 41);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(0.0, 0.0));
  auto ens = reduced_state(st, fs, 30, 5);
  REQUIRE(ens.terms.size() == 1);
  CHECK(ens.terms[0].weight == Catch::Approx(1.0));
  CHECK(std::abs(ens.terms[0].displacement[0]) ==
        Catch::Approx(std::abs(fs.F(0, 30))).margin(1e-15));
  CHECK(ens.truncated_mass == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("no couplings: all displacements vanish") {
  auto spec = SystemSpec::make({5.0}, {1.0});
  auto grid = TimeGrid::uniform(2.0, 41);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(1.0, 0.0));
  auto ens = reduced_state(st, fs, 40, 8);
  for (const auto& term : ens.terms) CHECK(std::abs(term.displacement[0]) == 0.0);
}

TEST_CASE("poisson mass: |mu| = 1 with truncation 20 leaves less than 1e-18") {
  auto spec = om_system(0.1);
  auto grid = TimeGrid::uniform(1.0, 11);
  auto fs = compute_f_set(spec, grid);
  auto ens = reduced_state(coherent_state(cplx(1.0, 0.0)), fs, 5, 20);
  CHECK(ens.truncated_mass < 1e-18);
  CHECK(ens.warnings.empty());
}

TEST_CASE("insufficient truncation warns with a suggestion") {
  auto spec = om_system(0.1);
  auto grid = TimeGrid::uniform(1.0, 11);
  auto fs = compute_f_set(spec, grid);
  auto ens = reduced_state(coherent_state(cplx(2.0, 0.0)), fs, 5, 2);
  CHECK(ens.truncated_mass > 1e-6);
  REQUIRE_FALSE(ens.warnings.empty());
  CHECK(ens.warnings[0].find("suggested truncation") != std::string::npos);
}

TEST_CASE("ensemble population equals the closed-form mech population") {
  auto spec = om_system(0.15);
  spec.lambda_plus[0] = CouplingSpec::constant(0.1);
  spec.g_m(0, 0) = CouplingSpec::constant(0.05);
  auto grid = TimeGrid::uniform(3.0, 61);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(1.0, 0.0), {0.3});
  const double ni = st.thermal_occupation(0);
  for (std::size_t ti : {std::size_t(15), std::size_t(40), std::size_t(60)}) {
    auto ens = reduced_state(st, fs, ti, 25);
    double pop = 0.0;
    for (const auto& term : ens.terms)
      pop += term.weight * (ni + std::norm(term.displacement[0]));
    CHECK(pop == Catch::Approx(mech_population(st, fs, 0, ti)).epsilon(1e-12));
  }
}

TEST_CASE("initial mixedness") {
  InitialState st;
  st.r = {0.3, 0.5};
  CHECK(initial_linear_entropy(st) ==
        Catch::Approx(1.0 - 1.0 / (std::cosh(0.6) * std::cosh(1.0))).epsilon(1e-14));
  st.r = {0.0};
  CHECK(initial_linear_entropy(st) == 0.0);
}

TEST_CASE("zero coupling reproduces the initial mixedness exactly") {
  auto spec = SystemSpec::make({5.0}, {1.0, 2.0});
  // lambda displaces the resonators but does not entangle: S_N stays S_N^in
  spec.lambda_plus[0] = CouplingSpec::constant(0.2);
  auto grid = TimeGrid::uniform(2.0, 21);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(1.0, 0.0), {0.3, 0.6});
  const double expected = initial_linear_entropy(st);
  CHECK(linear_entropy(st, fs, 15) == Catch::Approx(expected).margin(1e-12));
  CHECK(linear_entropy_direct(st, fs, 15) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("pure initial state with no photons stays pure") {
  auto spec = om_system(0.2);
  auto grid = TimeGrid::uniform(2.0, 21);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(0.0, 0.0), {0.0});
  CHECK(linear_entropy(st, fs, 20) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("direct and split entropy forms agree to 1e-12") {
  auto spec = SystemSpec::make({5.0}, {1.0, 1.7});
  spec.g_p(0, 0) = CouplingSpec::constant(0.2);
  spec.g_p(0, 1) = CouplingSpec::constant(0.12);
  auto grid = TimeGrid::uniform(3.0, 31);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(1.0, 0.0), {0.25, 0.4});
  for (std::size_t ti : {std::size_t(10), std::size_t(30)}) {
    const double split = linear_entropy(st, fs, ti);
    const double direct = linear_entropy_direct(st, fs, ti);
    CHECK(split == Catch::Approx(direct).margin(1e-12));
  }
}

TEST_CASE("entropy is invariant under a global phase of mu") {
  auto spec = om_system(0.2);
  auto grid = TimeGrid::uniform(3.0, 31);
  auto fs = compute_f_set(spec, grid);
  const double a = linear_entropy(coherent_state(cplx(1.1, 0.0), {0.3}), fs, 25);
  const double b =
      linear_entropy(coherent_state(cplx(1.1, 0.0) * std::exp(cplx(0.0, 0.77)), {0.3}), fs, 25);
  CHECK(a == Catch::Approx(b).margin(1e-13));
}

TEST_CASE("nonlinearity only adds mixedness") {
  auto spec = om_system(0.25);
  auto grid = TimeGrid::uniform(4.0, 41);
  auto fs = compute_f_set(spec, grid);
  auto st = coherent_state(cplx(1.0, 0.0), {0.35});
  const double s_in = initial_linear_entropy(st);
  for (std::size_t ti = 0; ti < grid.size(); ti += 5)
    CHECK(linear_entropy(st, fs, ti) >= s_in - 1e-12);
}

TEST_CASE("single-mode bessel form agrees with the general double sum to 1e-8") {
  auto spec = SystemSpec::make({5.0}, {1.0, 1.7});
  spec.g_p(0, 0) = CouplingSpec::constant(0.2);
  spec.g_p(0, 1) = CouplingSpec::constant(0.12);
  auto grid = TimeGrid::uniform(3.0, 31);
  auto fs = compute_f_set(spec, grid);
  for (double r : {0.0, 0.3}) {
    auto st = coherent_state(cplx(1.0, 0.0), {r, 0.5 * r});
    for (std::size_t ti : {std::size_t(10), std::size_t(30)}) {
      const double general = linear_entropy(st, fs, ti);
      const double bessel = linear_entropy_single_mode(st, fs, ti);
      INFO("r=" << r << " ti=" << ti);
      CHECK(general == Catch::Approx(bessel).margin(1e-8));
    }
  }
}

TEST_CASE("lambda_alpha trivial values and the two routes") {
  CHECK(lambda_alpha(0.0, 1.7) == Catch::Approx(1.0).margin(1e-14));
  CHECK(lambda_alpha(0.4, 0.0) == Catch::Approx(1.0).margin(1e-14));
  CHECK(lambda_alpha_direct(0.0, 1.7) == Catch::Approx(1.0).margin(1e-12));
  CHECK(lambda_alpha(0.1, 1.0) == Catch::Approx(lambda_alpha_direct(0.1, 1.0)).margin(1e-10));
  for (double alpha : {0.02, 0.1, 0.5, 1.0, 3.0})
    for (double mu2 : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      INFO("alpha=" << alpha << " mu2=" << mu2);
      CHECK(lambda_alpha(alpha, mu2) ==
            Catch::Approx(lambda_alpha_direct(alpha, mu2)).margin(1e-10));
    }
}

TEST_CASE("two-mode entropy matches the oracle partial-trace purity") {
  auto spec = SystemSpec::make({5.0, 6.0}, {1.0});
  spec.g_p(0, 0) = CouplingSpec::constant(0.2);
  spec.g_p(1, 0) = CouplingSpec::constant(0.11);
  InitialState st;
  st.coherent[0] = cplx(0.8, 0.0);
  st.coherent[1] = cplx(0.0, 0.6);
  st.r = {0.2};
  auto grid = TimeGrid::uniform(0.5 * pi, 5);
  auto fs = compute_f_set(spec, grid, QuadratureRule::Simpson, 4);
  const double split = linear_entropy(st, fs, 4);
  CHECK(split == Catch::Approx(linear_entropy_direct(st, fs, 4)).margin(1e-12));

  auto prob = make_oracle_problem(spec, st, {9, 8}, {12});
  OracleOptions opts;
  opts.measure_purity = true;
  opts.prop.local_tol = 1e-10;
  auto series = run_oracle(prob, grid, {}, opts);
  CHECK(split == Catch::Approx(1.0 - series.purity[4]).margin(1e-4));
}

TEST_CASE("entropy matches the oracle partial-trace purity") {
  auto spec = om_system(0.2);
  auto grid = TimeGrid::uniform(0.5 * pi, 9);
  auto fs = compute_f_set(spec, grid, QuadratureRule::Simpson, 4);

  SECTION("zero temperature") {
    auto st = coherent_state(cplx(1.0, 0.0));
    auto prob = make_oracle_problem(spec, st, {12}, {10});
    OracleOptions opts;
    opts.measure_purity = true;
    auto series = run_oracle(prob, grid, {}, opts);
    for (std::size_t ti : {std::size_t(4), std::size_t(8)}) {
      const double s_oracle = 1.0 - series.purity[ti];
      CHECK(linear_entropy(st, fs, ti) == Catch::Approx(s_oracle).margin(1e-4));
    }
  }

  SECTION("finite temperature") {
    auto st = coherent_state(cplx(1.0, 0.0), {0.3});
    auto prob = make_oracle_problem(spec, st, {12}, {14});
    OracleOptions opts;
    opts.measure_purity = true;
    auto series = run_oracle(prob, grid, {}, opts);
    for (std::size_t ti : {std::size_t(4), std::size_t(8)}) {
      const double s_oracle = 1.0 - series.purity[ti];
      CHECK(linear_entropy(st, fs, ti) == Catch::Approx(s_oracle).margin(1e-4));
    }
  }
}
