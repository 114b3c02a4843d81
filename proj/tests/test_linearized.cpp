#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "nlom/linearized.hpp"

using namespace nlom;

namespace {

LinearizedSpec make_lin(double alpha, double g, double kappa, double omega_d,
                        double omega_c = 5.0, double omega_m = 1.0) {
  LinearizedSpec lin;
  lin.alpha = alpha;
  lin.mode = 0;
  lin.res = 0;
  lin.base = SystemSpec::make({omega_c}, {omega_m});
  lin.base.g_p(0, 0) = CouplingSpec::modulated_sin(g, kappa, omega_d);
  return lin;
}

}  // namespace

TEST_CASE("rwa populations at t = 0") {
  for (auto regime : {ResonantRegime::Squeezing, ResonantRegime::ModeMixing}) {
    const auto pops = linearized_resonant_populations(3.0, 0.5, 0.01, 0.7, regime, 0.0);
    CHECK(pops.cavity == Catch::Approx(9.0));
    CHECK(pops.mech == Catch::Approx(0.7));
  }
}

TEST_CASE("mode mixing at zero temperature keeps everything in vacuum") {
  for (double t : {0.5, 5.0, 50.0}) {
    const auto pops =
        linearized_resonant_populations(3.0, 0.5, 0.01, 0.0, ResonantRegime::ModeMixing, t);
    CHECK(pops.mech == 0.0);
    CHECK(pops.cavity == Catch::Approx(9.0));
  }
}

TEST_CASE("squeezing small-angle growth follows the sinh^2 series") {
  const double alpha = 2.0, kappa = 0.5, g = 0.01, ni = 0.7;
  const double chi = alpha * kappa * g;
  const double t = 0.05 / chi;  // alpha kappa g t = 0.05
  const auto pops =
      linearized_resonant_populations(alpha, kappa, g, ni, ResonantRegime::Squeezing, t);
  const double theta = 0.5 * chi * t;
  CHECK(pops.mech - ni == Catch::Approx((ni + 1.0) * theta * theta).epsilon(0.01));
}

TEST_CASE("two-mode-squeeze and beam-splitter invariants") {
  const double alpha = 2.0, kappa = 0.5, g = 0.01, ni = 0.6;
  for (double t : {0.0, 3.0, 17.0, 80.0}) {
    const auto sq =
        linearized_resonant_populations(alpha, kappa, g, ni, ResonantRegime::Squeezing, t);
    CHECK(sq.cavity - sq.mech == Catch::Approx(alpha * alpha - ni).margin(1e-10));
    const auto mx =
        linearized_resonant_populations(alpha, kappa, g, ni, ResonantRegime::ModeMixing, t);
    CHECK((mx.cavity - alpha * alpha) + mx.mech == Catch::Approx(ni).margin(1e-10));
  }
}

TEST_CASE("unmodulated coupling returns the phonon population after a full period") {
  const CouplingSpec g = CouplingSpec::constant(0.1);
  const double ni = 0.3;
  const auto pops = full_model_modulated_populations(g, 1.0, cplx(1.0, 0.0), ni, 2.0 * pi);
  CHECK(pops.mech == Catch::Approx(ni).margin(1e-12));
  CHECK(pops.cavity == Catch::Approx(1.0));
}

TEST_CASE("resonant drive grows as t^2 with the quarter prefactor") {
  const double g = 0.1, kappa = 1.0, w = 1.0, mu = 1.0;
  const CouplingSpec c = CouplingSpec::modulated_sin(g, kappa, w);
  std::vector<double> t, y;
  for (double tt = 0.0; tt <= 200.0; tt += 0.05) {
    t.push_back(tt);
    y.push_back(full_model_modulated_populations(c, w, cplx(mu, 0.0), 0.0, tt).mech);
  }
  const double expn = detail::fit_growth_exponent(t, y, 50.0, 200.0, 2.0 * pi / w);
  CHECK(expn == Catch::Approx(2.0).margin(0.05));

  const double c2 = detail::fit_quadratic_coefficient(t, y, 50.0, 200.0);
  const double expected = 0.25 * g * g * kappa * kappa * (mu * mu + mu * mu * mu * mu);
  CHECK(c2 == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("drive at omega_c - omega_m stays bounded in the full model") {
  const double g = 0.1, kappa = 0.5, w = 1.0;
  const CouplingSpec c = CouplingSpec::modulated_sin(g, kappa, 4.0);
  double early_max = 0.0, late_max = 0.0;
  for (double tt = 0.0; tt <= 2.0 * pi; tt += 0.01)
    early_max = std::max(early_max,
                         full_model_modulated_populations(c, w, cplx(1.0, 0.0), 0.0, tt).mech);
  for (double tt = 0.0; tt <= 200.0; tt += 0.05)
    late_max = std::max(late_max,
                        full_model_modulated_populations(c, w, cplx(1.0, 0.0), 0.0, tt).mech);
  CHECK(late_max < 2.0 * early_max);
}

TEST_CASE("resonance scan labels") {
  auto lin = make_lin(10.0, 0.05, 0.8, 1.0);
  InitialState st;
  st.coherent[0] = cplx(1.0, 0.0);
  st.r = {InitialState::r_from_occupation(0.3)};
  auto scan = resonance_scan(lin, st, {1.0, 4.0, 6.0}, 200.0);
  REQUIRE(scan.rows.size() == 6);
  auto find = [&](double wd, const std::string& model) -> const ScanRow& {
    for (const auto& row : scan.rows)
      if (row.model == model && std::abs(row.omega_d - wd) < 1e-12) return row;
    throw std::runtime_error("row not found");
  };
  CHECK(find(1.0, "full").label == "resonant");
  CHECK(find(1.0, "full").exponent == Catch::Approx(2.0).margin(0.1));
  CHECK(find(4.0, "full").label == "bounded");
  CHECK(find(6.0, "full").label == "bounded");
  CHECK(find(1.0, "linearized").label == "bounded");
  CHECK(find(4.0, "linearized").label == "bounded");
  CHECK(find(6.0, "linearized").label == "resonant");
}

TEST_CASE("short horizon warns") {
  auto lin = make_lin(10.0, 0.05, 0.8, 0.5);
  InitialState st;
  st.coherent[0] = cplx(1.0, 0.0);
  st.r = {0.0};
  auto scan = resonance_scan(lin, st, {0.5}, 30.0);
  REQUIRE_FALSE(scan.warnings.empty());
}

TEST_CASE("linearized oracle: unmodulated weak coupling leaves populations constant") {
  auto lin = make_lin(10.0, 1e-6, 0.0, 0.0);
  lin.base.g_p(0, 0) = CouplingSpec::constant(1e-6);
  InitialState st;
  st.r = {0.0};
  auto grid = TimeGrid::uniform(20.0, 11);
  auto series = linearized_oracle_populations(lin, st, grid, 4, {4});
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    CHECK(std::abs(series.cavity_pop[0][ti]) < 1e-6);
    CHECK(std::abs(series.mech_pop[0][ti]) < 1e-6);
  }
}

TEST_CASE("linearized oracle tracks the mode-mixing RWA populations within 5%") {
  // alpha kappa g = 0.01 omega_m, 25 mechanical periods
  const double alpha = 2.0, kappa = 0.5, g = 0.01;
  auto lin = make_lin(alpha, g, kappa, 4.0);
  InitialState st;
  st.r = {InitialState::r_from_occupation(0.5)};
  const double horizon = 25.0 * 2.0 * pi;
  auto grid = TimeGrid::uniform(horizon, 9);
  OracleOptions opts;
  opts.thermal_tail = 1e-8;
  opts.prop.local_tol = 1e-6;
  // mixing can swap every thermal phonon into the cavity: match the cutoffs
  auto series = linearized_oracle_populations(lin, st, grid, 24, {24}, opts);
  for (std::size_t ti = 2; ti < grid.size(); ++ti) {
    const auto rwa = linearized_resonant_populations(alpha, kappa, g, 0.5,
                                                     ResonantRegime::ModeMixing, grid.t[ti]);
    INFO("t = " << grid.t[ti]);
    CHECK(series.mech_pop[0][ti] == Catch::Approx(rwa.mech).margin(0.05 * 0.5));
    CHECK(series.cavity_pop[0][ti] ==
          Catch::Approx(rwa.cavity - alpha * alpha).margin(0.05 * 0.5));
  }
}

TEST_CASE("linearized oracle confirms vacuum pair production under the squeezing drive") {
  // at N_i = 0 the corrected RWA gives sinh^2(theta) in both modes
  const double alpha = 2.0, kappa = 0.5, g = 0.003;
  auto lin = make_lin(alpha, g, kappa, 6.0);
  InitialState st;
  st.r = {0.0};
  const double horizon = 100.0 * 2.0 * pi;
  auto grid = TimeGrid::uniform(horizon, 9);
  OracleOptions opts;
  opts.prop.local_tol = 1e-6;
  auto series = linearized_oracle_populations(lin, st, grid, 20, {20}, opts);
  const double theta_end = 0.5 * alpha * kappa * g * horizon;
  REQUIRE(theta_end > 0.9);
  for (std::size_t ti = 3; ti < grid.size(); ++ti) {
    const double theta = 0.5 * alpha * kappa * g * grid.t[ti];
    const double expected = std::sinh(theta) * std::sinh(theta);
    INFO("t = " << grid.t[ti]);
    CHECK(series.mech_pop[0][ti] == Catch::Approx(expected).epsilon(0.05));
    CHECK(series.cavity_pop[0][ti] == Catch::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("modulated-coupling phonon population matches the nonlinear oracle") {
  // pins the squared modulus |int g e^{i w t'}|^2 in the population formula
  auto spec = SystemSpec::make({5.0}, {1.0});
  spec.g_p(0, 0) = CouplingSpec::modulated_sin(0.1, 0.5, 2.0);
  InitialState st;
  st.coherent[0] = cplx(1.0, 0.0);
  st.r = {0.0};
  auto grid = TimeGrid::uniform(2.0 * pi, 9);
  auto prob = make_oracle_problem(spec, st, {12}, {10});
  OracleOptions opts;
  opts.prop.local_tol = 1e-10;
  auto series = run_oracle(prob, grid, {}, opts);
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    const auto closed =
        full_model_modulated_populations(spec.g_p(0, 0), 1.0, cplx(1.0, 0.0), 0.0, grid.t[ti]);
    INFO("t = " << grid.t[ti]);
    CHECK(series.mech_pop[0][ti] == Catch::Approx(closed.mech).epsilon(1e-4).margin(1e-6));
  }
}

TEST_CASE("detuned drive produces no secular transfer") {
  const double alpha = 2.0, kappa = 0.5, g = 0.003;
  const double chi = alpha * kappa * g;
  auto lin = make_lin(alpha, g, kappa, 6.0 + 10.0 * chi);
  InitialState st;
  st.r = {0.0};
  const double horizon = 100.0 * 2.0 * pi;
  auto grid = TimeGrid::uniform(horizon, 17);
  OracleOptions opts;
  opts.prop.local_tol = 1e-6;
  auto series = linearized_oracle_populations(lin, st, grid, 12, {12}, opts);
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    if (grid.t[ti] < 0.5 * horizon)
      first_half = std::max(first_half, series.mech_pop[0][ti]);
    else
      second_half = std::max(second_half, series.mech_pop[0][ti]);
  }
  CHECK(second_half < 2.0 * first_half + 1e-4);
  CHECK(second_half < 0.15);  // far below the resonant sinh^2 ~ 1.2
}
