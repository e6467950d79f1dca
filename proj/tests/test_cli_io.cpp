#include <doctest.h>

#include <cmath>
#include <sstream>

#include "optmix/config.hpp"
#include "optmix/errors.hpp"
#include "optmix/expression.hpp"
#include "optmix/fem.hpp"
#include "optmix/io.hpp"
#include "optmix/timestepper.hpp"
#include "test_util.hpp"

using namespace optmix;
using namespace optmix::testutil;

TEST_CASE("expression parser") {
  SUBCASE("table expressions evaluate correctly") {
    const Expression e = Expression::parse("cos(4*pi*x)+1.357*cos(6*pi*y)");
    CHECK(e.eval(0.25, 0.0) ==
          doctest::Approx(std::cos(kPi) + 1.357).epsilon(1e-14));
    const Expression p = Expression::parse("x^4+0.273*y*(y-0.4)");
    CHECK(p.eval(0.5, 0.2) ==
          doctest::Approx(std::pow(0.5, 4) + 0.273 * 0.2 * (0.2 - 0.4)).epsilon(1e-14));
    const Expression m = Expression::parse("-x^2");
    CHECK(m.eval(3.0, 0.0) == doctest::Approx(-9.0));  // unary minus binds last
  }

  SUBCASE("errors name the problem") {
    CHECK_THROWS_AS(Expression::parse("cos(pi*x"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("2*z"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("sin 3"), ConfigError);
    CHECK_THROWS_AS(Expression::parse(""), ConfigError);
  }
}

TEST_CASE("parse_config applies and echoes defaults") {
  const SimulationConfig cfg = parse_config_string(
      R"({"shape": "square", "constraint": "energy", "U": 1.0, "ic": "preset_eq31"})");
  CHECK(cfg.resolved_macro_dt() == 0.01);
  CHECK(cfg.cfl == 0.5);
  bool saw_macro = false, saw_cfl = false;
  for (const auto& line : cfg.provenance) {
    saw_macro = saw_macro || line.find("macro_dt = 0.01") != std::string::npos;
    saw_cfl = saw_cfl || line.find("cfl = 0.5") != std::string::npos;
  }
  CHECK(saw_macro);
  CHECK(saw_cfl);
}

TEST_CASE("parse_config rejects bad input by key") {
  CHECK_THROWS_WITH_AS(parse_config_string(R"({"shqpe": "square"})"),
                       doctest::Contains("shqpe"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_string(R"({"U": -1.0})"),
                       doctest::Contains("'U'"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_string(R"({"constraint": "enstrophy", "inv_tau": -3.0})"),
      doctest::Contains("inv_tau"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_string(R"({"ic": "2*q"})"),
                       doctest::Contains("unknown identifier"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_string(R"({"bc": "slip"})"),
                       doctest::Contains("'bc'"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("not json"), ConfigError);
  // periodic conditions are a rectangle-only feature
  CHECK_THROWS_WITH_AS(
      parse_config_string(R"({"shape": "circle", "bc": "periodic"})"),
      doctest::Contains("rectangle"), ConfigError);
}

TEST_CASE("evaluate_ic") {
  Domain d{square_noflux(257)};

  SUBCASE("presets match their expressions") {
    const ScalarField a = evaluate_ic("preset_table2_no1", d);
    const ScalarField b = evaluate_ic("cos(4*pi*x)+1.357*cos(6*pi*y)", d);
    CHECK(rel_l2_diff(a, b) <= 1e-15);
  }

  SUBCASE("preset_eq31 has the reported sup norm") {
    const ScalarField f = evaluate_ic("preset_eq31", d);
    CHECK(linf_norm(f) == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(std::abs(f.mean()) <= 1e-12);
  }

  SUBCASE("zero and constant fields are rejected") {
    CHECK_THROWS_WITH_AS(evaluate_ic("0", d), doctest::Contains("zero"), ConfigError);
    CHECK_THROWS_AS(evaluate_ic("3.5", d), ConfigError);
  }

  SUBCASE("non-finite evaluations are rejected") {
    CHECK_THROWS_WITH_AS(evaluate_ic("10^(10^4)", d), doctest::Contains("finite"),
                         ConfigError);
  }

  SUBCASE("unknown presets are named") {
    CHECK_THROWS_WITH_AS(evaluate_ic("preset_unknown", d),
                         doctest::Contains("preset_unknown"), ConfigError);
  }
}

TEST_CASE("diagnostics CSV layout and determinism") {
  SimulationConfig cfg;
  cfg.shape = "square";
  cfg.resolution = 64;
  cfg.constraint = Constraint::enstrophy(15.0);
  cfg.ic = "preset_eq31";
  cfg.t_end = 0.05;
  cfg.macro_dt = 0.01;

  const SimulationResult r1 = run_simulation(cfg);
  const SimulationResult r2 = run_simulation(cfg);
  std::ostringstream csv1, csv2;
  write_diagnostics_csv(csv1, r1.series);
  write_diagnostics_csv(csv2, r2.series);
  CHECK(csv1.str() == csv2.str());

  std::istringstream is(csv1.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "t,mix_norm,mix_norm_normalized,l2,linf,energy,enstrophy,"
        "instantaneous_rate,lower_bound,gamma");
  int rows = 0;
  for (std::string line; std::getline(is, line);) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
  }
  CHECK(rows == static_cast<int>(r1.series.size()));
}

TEST_CASE("grid snapshot round trip is bit exact") {
  Domain d{square_noflux(33)};
  const ScalarField f = evaluate_ic("preset_eq31", d);
  std::ostringstream first;
  write_grid_snapshot(first, f, 0.625, "theta");
  std::istringstream back(first.str());
  std::shared_ptr<Domain> dom2;
  double time;
  std::string name;
  const ScalarField g = read_grid_snapshot(back, dom2, time, name);
  CHECK(time == 0.625);
  CHECK(name == "theta");
  std::ostringstream second;
  write_grid_snapshot(second, g, time, name);
  CHECK(first.str() == second.str());
  for (std::size_t k = 0; k < f.size(); ++k)
    CHECK(f.values[k] == g.values[k]);
}

TEST_CASE("VTK snapshot round trip is bit exact") {
  Domain d{generate_mesh(MeshShape::Circle, 0.25)};
  ScalarField f(d);
  const MeshDomain& m = *as_mesh(d);
  for (std::size_t k = 0; k < m.vertices.size(); ++k)
    f.values[k] = std::sin(3.0 * m.vertices[k].x) + m.vertices[k].y / 7.0;
  std::ostringstream first;
  write_vtk_snapshot(first, f, 0.125, "theta");
  std::istringstream back(first.str());
  std::shared_ptr<Domain> dom2;
  double time;
  std::string name;
  const ScalarField g = read_vtk_snapshot(back, dom2, time, name);
  CHECK(time == 0.125);
  std::ostringstream second;
  write_vtk_snapshot(second, g, time, name);
  CHECK(first.str() == second.str());
}

TEST_CASE("ic presets cover the benchmark tables") {
  CHECK(ic_presets().size() == 10);
  CHECK(resolve_ic_expression("preset_eq31") == "0.5*sin(pi*x)+0.25*sin(2*pi*y)");
  CHECK(resolve_ic_expression("x+y") == "x+y");
}

TEST_CASE("config with a mesh file path builds the mesh domain") {
  const MeshDomain m = generate_mesh(MeshShape::LShape, 0.2);
  write_mesh_file("/tmp/optmix_test_mesh.txt", m);
  SimulationConfig cfg = parse_config_string(
      R"({"mesh": "/tmp/optmix_test_mesh.txt", "constraint": "enstrophy"})");
  const std::shared_ptr<Domain> d = make_domain(cfg);
  REQUIRE(as_mesh(*d) != nullptr);
  CHECK(as_mesh(*d)->vertices.size() == m.vertices.size());
  CHECK(cfg.uses_mesh());
  CHECK(cfg.resolved_macro_dt() == 0.025);
}
