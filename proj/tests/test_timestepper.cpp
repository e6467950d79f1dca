#include <doctest.h>

#include <cmath>

#include "optmix/config.hpp"
#include "optmix/errors.hpp"
#include "optmix/stirring.hpp"
#include "optmix/timestepper.hpp"
#include "test_util.hpp"

using namespace optmix;
using namespace optmix::testutil;

TEST_CASE("advect_rhs_spectral") {
  Domain d{square_noflux(65)};
  SpectralWorkspace ws(d);

  SUBCASE("zero velocity gives zero tendency") {
    const ScalarField theta = evaluate_ic("preset_eq31", d);
    const VectorField u(d);
    CHECK(l2_norm(advect_rhs_spectral(ws, theta, u, DealiasRule::TwoThirds)) <=
          1e-14);
  }

  SUBCASE("constant scalar gives zero tendency") {
    ScalarField theta(d);
    for (double& v : theta.values) v = 2.5;
    const VectorField u = sample_vector(
        d,
        [](double x, double y) { return kPi * std::sin(kPi * x) * std::cos(kPi * y); },
        [](double x, double y) { return -kPi * std::cos(kPi * x) * std::sin(kPi * y); });
    CHECK(l2_norm(advect_rhs_spectral(ws, theta, u, DealiasRule::TwoThirds)) <=
          1e-11);
  }

  SUBCASE("matches the analytic product for band-limited data") {
    const ScalarField theta =
        sample_scalar(d, [](double, double y) { return std::cos(kPi * y); });
    const VectorField u = sample_vector(
        d,
        [](double x, double y) { return kPi * std::sin(kPi * x) * std::cos(kPi * y); },
        [](double x, double y) { return -kPi * std::cos(kPi * x) * std::sin(kPi * y); });
    const ScalarField rhs = advect_rhs_spectral(ws, theta, u, DealiasRule::TwoThirds);
    // -u.grad(theta) = -v * d(theta)/dy = -pi^2 cos(pi x) sin(pi y) cos(pi y)... sign:
    // d(theta)/dy = -pi sin(pi y); v = -pi cos(pi x) sin(pi y)
    const ScalarField expect = sample_scalar(d, [](double x, double y) {
      return -kPi * kPi * std::cos(kPi * x) * std::sin(kPi * y) * std::sin(kPi * y);
    });
    CHECK(rel_l2_diff(rhs, expect) <= 1e-11);
  }
}

TEST_CASE("rk4_substeps") {
  Domain d{square_noflux(65)};
  SpectralWorkspace ws(d);
  const ScalarField theta = evaluate_ic("preset_eq31", d);

  SUBCASE("zero velocity is the identity") {
    const VectorField u(d);
    const ScalarField out = rk4_substeps(ws, theta, u, 0.05, 0.5, DealiasRule::Half);
    CHECK(rel_l2_diff(out, theta) <= 1e-14);
  }

  SUBCASE("mean is preserved to machine precision") {
    SpectralStirrer stirrer(ws, Constraint::enstrophy(15.0), DealiasRule::TwoThirds);
    const StirringResult flow = stirrer.compute(theta);
    const ScalarField out =
        rk4_substeps(ws, theta, flow.u, 0.05, 0.5, DealiasRule::TwoThirds);
    CHECK(std::abs(out.mean() - theta.mean()) <= 1e-12);
  }

  SUBCASE("sup norm does not overshoot materially") {
    SpectralStirrer stirrer(ws, Constraint::enstrophy(15.0), DealiasRule::TwoThirds);
    ScalarField cur = theta;
    const double linf0 = linf_norm(cur);
    for (int step = 0; step < 10; ++step) {
      const StirringResult flow = stirrer.compute(cur);
      cur = rk4_substeps(ws, cur, flow.u, 0.01, 0.5, DealiasRule::TwoThirds);
      cur = subtract_mean(cur);
      CHECK(linf_norm(cur) <= linf0 * (1.0 + 1e-3));
    }
  }

  SUBCASE("substep cap triggers on runaway velocity") {
    VectorField u = sample_vector(
        d, [](double, double) { return 1e9; }, [](double, double) { return 0.0; });
    CHECK_THROWS_WITH_AS(rk4_substeps(ws, theta, u, 0.05, 0.5, DealiasRule::Half, 10),
                         doctest::Contains("exceeds cap"), NumericsError);
  }
}

TEST_CASE("SimClock validation") {
  SimClock clock;
  clock.macro_dt = 0.0;
  CHECK_THROWS_AS(clock.validate(), ConfigError);
  clock.macro_dt = 0.01;
  clock.cfl = 1.5;
  CHECK_THROWS_AS(clock.validate(), ConfigError);
  clock.cfl = 0.5;
  CHECK_NOTHROW(clock.validate());
}

TEST_CASE("run_simulation invariants on a short energy run") {
  SimulationConfig cfg;
  cfg.shape = "square";
  cfg.resolution = 96;
  cfg.constraint = Constraint::energy(1.0);
  cfg.ic = "preset_eq31";
  cfg.t_end = 0.25;
  cfg.macro_dt = 0.01;
  cfg.snapshot_times = {0.0, 0.1};
  const SimulationResult res = run_simulation(cfg);

  REQUIRE(res.series.size() == 26);
  CHECK(res.series.front().mix_norm_normalized == 1.0);
  CHECK(res.snapshots.size() == 2);

  for (std::size_t k = 0; k < res.series.size(); ++k) {
    const auto& row = res.series[k];
    CHECK(std::abs(row.energy - 4.0) <= 1e-10 * 4.0);
    if (k > 0) CHECK(row.mix_norm <= res.series[k - 1].mix_norm + 1e-6);
    CHECK(row.mix_norm >= row.lower_bound - 1e-6);
  }

  // spatial mean conserved over the run
  CHECK(std::abs(res.theta_final.mean()) <= 1e-10);
}

TEST_CASE("halving macro_dt changes the final mix norm by < 5%") {
  SimulationConfig cfg;
  cfg.shape = "square";
  cfg.resolution = 96;
  cfg.constraint = Constraint::enstrophy(15.0);
  cfg.ic = "preset_eq31";
  cfg.t_end = 0.3;
  cfg.macro_dt = 0.01;
  const SimulationResult coarse = run_simulation(cfg);
  cfg.macro_dt = 0.005;
  const SimulationResult fine = run_simulation(cfg);
  const double rel = std::abs(coarse.series.back().mix_norm -
                              fine.series.back().mix_norm) /
                     fine.series.back().mix_norm;
  CHECK(rel < 0.05);
}

TEST_CASE("stagnation at t=0 aborts with a message") {
  SimulationConfig cfg;
  cfg.shape = "square";
  cfg.resolution = 64;
  cfg.constraint = Constraint::energy(1.0);
  cfg.ic = "cos(pi*x)";
  cfg.t_end = 0.1;
  cfg.macro_dt = 0.01;
  CHECK_THROWS_WITH_AS(run_simulation(cfg), doctest::Contains("stagnated at t=0"),
                       NumericsError);
}

TEST_CASE("FEM run advances and conserves the mean") {
  SimulationConfig cfg;
  cfg.shape = "circle";
  cfg.resolution = 64;
  cfg.constraint = Constraint::enstrophy(15.0);
  cfg.ic = "preset_eq31";
  cfg.t_end = 0.1;
  cfg.macro_dt = 0.025;
  const SimulationResult res = run_simulation(cfg);
  REQUIRE(res.series.size() == 5);
  const double area = domain_area(*res.domain);
  for (const auto& row : res.series)
    CHECK(std::abs(row.enstrophy - area * 225.0) <= 1e-6 * area * 225.0);
  CHECK(res.series.back().mix_norm < res.series.front().mix_norm);
  CHECK(std::abs(res.theta_final.mean()) <= 1e-10);
}
