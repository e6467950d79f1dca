#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "optmix/diagnostics.hpp"
#include "optmix/errors.hpp"
#include "optmix/fem.hpp"
#include "test_util.hpp"

using namespace optmix;
using namespace optmix::testutil;

namespace {

ScalarField sample_mesh(const Domain& d,
                        const std::function<double(double, double)>& f) {
  const MeshDomain& m = *as_mesh(d);
  ScalarField out(d);
  for (std::size_t k = 0; k < m.vertices.size(); ++k)
    out.values[k] = f(m.vertices[k].x, m.vertices[k].y);
  return out;
}

VectorField sample_mesh_vec(const Domain& d,
                            const std::function<double(double, double)>& fu,
                            const std::function<double(double, double)>& fv) {
  const MeshDomain& m = *as_mesh(d);
  VectorField out(d);
  for (std::size_t k = 0; k < m.vertices.size(); ++k) {
    out.u[k] = fu(m.vertices[k].x, m.vertices[k].y);
    out.v[k] = fv(m.vertices[k].x, m.vertices[k].y);
  }
  return out;
}

double rel_vec_norm(const VectorField& a, const VectorField& b) {
  return l2_norm(a) / l2_norm(b);
}

}  // namespace

TEST_CASE("P1 element matrices match hand assembly on the unit right triangle") {
  double K[3][3], M[3][3];
  p1_element_matrices(Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}, K, M);
  CHECK(K[0][0] == doctest::Approx(1.0));
  CHECK(K[0][1] == doctest::Approx(-0.5));
  CHECK(K[0][2] == doctest::Approx(-0.5));
  CHECK(K[1][1] == doctest::Approx(0.5));
  CHECK(K[1][2] == doctest::Approx(0.0));
  CHECK(K[2][2] == doctest::Approx(0.5));
  const double area = 0.5;
  CHECK(M[0][0] == doctest::Approx(area / 6.0));
  CHECK(M[0][1] == doctest::Approx(area / 12.0));
  // row sums of K vanish (constants in the null space)
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(K[i][0] + K[i][1] + K[i][2]) <= 1e-14);
}

TEST_CASE("assembled operators: null space and partition of unity") {
  Domain d{generate_mesh(MeshShape::Circle, 0.12)};
  FemOperators ops(d);
  const int n = ops.stiffness().n;
  std::vector<double> ones(n, 1.0), out(n);
  ops.stiffness().multiply(ones.data(), out.data());
  double kmax = 0.0;
  for (double v : out) kmax = std::max(kmax, std::abs(v));
  CHECK(kmax <= 1e-12);
  ops.mass().multiply(ones.data(), out.data());
  double total = 0.0;
  for (double v : out) total += v;
  CHECK(total == doctest::Approx(as_mesh(d)->area).epsilon(1e-12));
}

TEST_CASE("assembly rejects degenerate triangles") {
  MeshDomain m;
  m.vertices = {Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}};
  m.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(m.finalize(), NumericsError);
}

TEST_CASE("solve_neumann") {
  SUBCASE("zero input gives zero") {
    Domain d{generate_mesh(MeshShape::Square, 0.1)};
    FemOperators ops(d);
    ScalarField zero(d);
    CHECK(l2_norm(ops.solve_neumann(zero)) <= 1e-14);
  }

  SUBCASE("square eigenfunction within O(h^2)") {
    Domain d{generate_mesh(MeshShape::Square, 0.05)};
    FemOperators ops(d);
    const ScalarField theta =
        sample_mesh(d, [](double x, double) { return std::cos(kPi * x); });
    const ScalarField phi = ops.solve_neumann(theta);
    const ScalarField expect = sample_mesh(
        d, [](double x, double) { return -std::cos(kPi * x) / (kPi * kPi); });
    double num = 0, den = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      num += (phi.values[k] - expect.values[k]) * (phi.values[k] - expect.values[k]);
      den += expect.values[k] * expect.values[k];
    }
    CHECK(std::sqrt(num / den) <= 5e-3);  // ~ C h^2
  }

  SUBCASE("circle Bessel eigenmode: phi = -theta / lambda1") {
    Domain d{generate_mesh(MeshShape::Circle, 0.025)};
    FemOperators ops(d);
    const double R = 2.0 / std::sqrt(kPi);
    const double j11 = 1.8411837813406593;  // first zero of J1'
    const double kr = j11 / R;
    const double lambda1 = kr * kr;  // = 2.6625 (benchmark FEM value 2.66422)
    const ScalarField theta = sample_mesh(d, [&](double x, double y) {
      const double r = std::hypot(x, y);
      const double ang = std::atan2(y, x);
      return std::cyl_bessel_j(1, kr * r) * std::cos(ang);
    });
    const ScalarField phi = ops.solve_neumann(subtract_mean(theta));
    ScalarField expect(d);
    const ScalarField clean = subtract_mean(theta);
    for (std::size_t k = 0; k < phi.size(); ++k)
      expect.values[k] = -clean.values[k] / lambda1;
    CHECK(rel_l2_diff(phi, expect) <= 5e-3);
  }
}

TEST_CASE("CG reports non-convergence") {
  Domain d{generate_mesh(MeshShape::Square, 0.05)};
  FemOperators ops(d);
  const ScalarField theta =
      sample_mesh(d, [](double x, double) { return std::cos(kPi * x); });
  std::vector<double> b(ops.mass().n);
  ops.mass().multiply(theta.values.data(), b.data());
  std::vector<double> x;
  CHECK_THROWS_WITH_AS(conjugate_gradient(ops.stiffness(), b, x, 1e-12, 3, true),
                       doctest::Contains("failed to converge"), NumericsError);
}

TEST_CASE("leray_project_fem") {
  Domain d{generate_mesh(MeshShape::Circle, 0.025)};
  FemOperators ops(d);

  SUBCASE("gradient of a linear potential is annihilated") {
    const VectorField v = sample_mesh_vec(
        d, [](double, double) { return 0.7; }, [](double, double) { return -0.3; });
    const VectorField p = ops.leray_project(v);
    CHECK(rel_vec_norm(p, v) <= 1e-6);
    CHECK(ops.last_projection_residual() <= 1e-6);
  }

  SUBCASE("rigid rotation is a fixed point") {
    const VectorField v = sample_mesh_vec(
        d, [](double, double y) { return -y; }, [](double x, double) { return x; });
    const VectorField p = ops.leray_project(v);
    VectorField diff(d);
    for (std::size_t k = 0; k < v.size(); ++k) {
      diff.u[k] = p.u[k] - v.u[k];
      diff.v[k] = p.v[k] - v.v[k];
    }
    CHECK(rel_vec_norm(diff, v) <= 1e-5);
  }

  SUBCASE("constant flow is removed (FD-exact potential x)") {
    const VectorField v = sample_mesh_vec(
        d, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const VectorField p = ops.leray_project(v);
    // oracle: the same solver at twice the resolution
    Domain fine{generate_mesh(MeshShape::Circle, 0.0125)};
    FemOperators fine_ops(fine);
    const VectorField vf = sample_mesh_vec(
        fine, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const VectorField pf = fine_ops.leray_project(vf);
    CHECK(rel_vec_norm(p, v) <= 4.0 * rel_vec_norm(pf, vf) + 1e-4);
    CHECK(rel_vec_norm(p, v) <= 5e-3);
  }

  SUBCASE("weak divergence is reduced by the projection") {
    const VectorField v = sample_mesh_vec(
        d, [](double x, double y) { return x * x - 0.3 * y; },
        [](double x, double y) { return std::sin(kPi * x) + y * y; });
    const std::vector<double> before = ops.weak_divergence(v);
    const VectorField p = ops.leray_project(v);
    const std::vector<double> after = ops.weak_divergence(p);
    double nb = 0, na = 0;
    for (std::size_t k = 0; k < before.size(); ++k) {
      nb += before[k] * before[k];
      na += after[k] * after[k];
    }
    CHECK(std::sqrt(na) <= 0.05 * std::sqrt(nb));
  }
}

TEST_CASE("smallest nonzero Neumann eigenvalues (square, circle)") {
  SUBCASE("square: pi^2/4") {
    Domain d{generate_mesh(MeshShape::Square, 2.0 / 64)};
    FemOperators ops(d);
    const EigenPair pair = ops.smallest_nonzero_eigenvalue();
    CHECK(pair.lambda1 == doctest::Approx(kPi * kPi / 4.0).epsilon(0.005));
    // residual and mean-orthogonality of the mode
    CHECK(std::abs(pair.mode.mean()) <= 1e-8);
    const int n = ops.stiffness().n;
    std::vector<double> kx(n), mx(n);
    ops.stiffness().multiply(pair.mode.values.data(), kx.data());
    ops.mass().multiply(pair.mode.values.data(), mx.data());
    double resid = 0, scale = 0;
    for (int i = 0; i < n; ++i) {
      const double r = kx[i] - pair.lambda1 * mx[i];
      resid += r * r;
      scale += pair.lambda1 * mx[i] * pair.lambda1 * mx[i];
    }
    CHECK(std::sqrt(resid / scale) <= 1e-8);
  }

  SUBCASE("circle: close to the Bessel value") {
    Domain d{generate_mesh(MeshShape::Circle, 0.025)};
    FemOperators ops(d);
    const EigenPair pair = ops.smallest_nonzero_eigenvalue();
    const double R = 2.0 / std::sqrt(kPi);
    const double exact = std::pow(1.8411837813406593 / R, 2.0);
    CHECK(pair.lambda1 == doctest::Approx(exact).epsilon(0.01));
    // the benchmark value sits within 1%
    CHECK(pair.lambda1 == doctest::Approx(2.66422).epsilon(0.01));
  }
}

TEST_CASE("semi-Lagrangian transport") {
  Domain d{generate_mesh(MeshShape::Circle, 0.03)};
  FemOperators ops(d);

  SUBCASE("zero velocity leaves theta unchanged") {
    const ScalarField theta =
        sample_mesh(d, [](double x, double y) { return x * x + std::sin(y); });
    const VectorField u(d);
    const ScalarField out = ops.semi_lagrangian_step(theta, u, 0.05);
    CHECK(rel_l2_diff(out, theta) == 0.0);
  }

  SUBCASE("constants are reproduced exactly") {
    const ScalarField theta = sample_mesh(d, [](double, double) { return 3.25; });
    const VectorField u = sample_mesh_vec(
        d, [](double, double y) { return -2 * y; }, [](double x, double) { return 2 * x; });
    const ScalarField out = ops.semi_lagrangian_step(theta, u, 0.02);
    double max_dev = 0.0;
    for (double v : out.values) max_dev = std::max(max_dev, std::abs(v - 3.25));
    CHECK(max_dev <= 1e-12);
  }

  SUBCASE("rigid rotation round trip within 5% L2") {
    // The half-edge substep rule makes P1 interpolation the dominant error
    // (~0.042 measured at this mesh for the blob below).
    Domain fine{generate_mesh(MeshShape::Circle, 0.0125)};
    FemOperators fops(fine);
    const MeshDomain& fm = *as_mesh(fine);
    ScalarField theta0(fine);
    for (std::size_t k = 0; k < fm.vertices.size(); ++k) {
      const double x = fm.vertices[k].x, y = fm.vertices[k].y;
      theta0.values[k] = std::exp(-((x - 0.3) * (x - 0.3) + y * y) / (2 * 0.6 * 0.6));
    }
    const double omega = 2.0 * kPi;  // one period in t = 1
    VectorField u(fine);
    for (std::size_t k = 0; k < fm.vertices.size(); ++k) {
      u.u[k] = -omega * fm.vertices[k].y;
      u.v[k] = omega * fm.vertices[k].x;
    }
    const ScalarField theta = fops.semi_lagrangian_step(theta0, u, 1.0);
    CHECK(rel_l2_diff(theta, theta0) <= 0.05);
  }

  SUBCASE("interpolation never amplifies the sup norm") {
    const ScalarField theta =
        sample_mesh(d, [](double x, double y) { return std::sin(3 * x) * y; });
    const VectorField u = sample_mesh_vec(
        d, [](double, double y) { return -y; }, [](double x, double) { return x; });
    ScalarField cur = theta;
    for (int step = 0; step < 5; ++step) {
      const ScalarField next = ops.semi_lagrangian_step(cur, u, 0.04);
      CHECK(linf_norm(next) <= linf_norm(cur) + 1e-12);
      cur = next;
    }
  }

  SUBCASE("outward flow near the wall uses boundary projection") {
    const ScalarField theta = sample_mesh(d, [](double x, double) { return x; });
    const VectorField u = sample_mesh_vec(
        d, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const ScalarField out = ops.semi_lagrangian_step(theta, u, 0.01);
    CHECK(linf_norm(out) <= linf_norm(theta) + 1e-12);
  }
}

TEST_CASE("mesh generation") {
  SUBCASE("square at h=0.25 has the structured counts") {
    const MeshDomain m = generate_mesh(MeshShape::Square, 0.25);
    CHECK(m.vertices.size() == 81);
    CHECK(m.triangles.size() == 128);
    CHECK(m.area == doctest::Approx(4.0).epsilon(1e-12));
  }

  SUBCASE("circle boundary vertices sit on the exact radius") {
    const MeshDomain m = generate_mesh(MeshShape::Circle, 0.05);
    const double R = 2.0 / std::sqrt(kPi);
    for (const auto& e : m.boundary_edges) {
      CHECK(std::abs(std::hypot(m.vertices[e.a].x, m.vertices[e.a].y) - R) <= 1e-12);
      CHECK(std::abs(std::hypot(e.normal.x, e.normal.y) - 1.0) <= 1e-12);
    }
    CHECK(m.boundary_loop_count() == 1);
    CHECK(m.area == doctest::Approx(4.0).epsilon(5e-3));
  }

  SUBCASE("annulus has two boundary loops and the right area") {
    const MeshDomain m = generate_mesh(MeshShape::Annulus, 0.05);
    CHECK(m.boundary_loop_count() == 2);
    CHECK(m.area == doctest::Approx(4.0).epsilon(5e-3));
  }

  SUBCASE("lshape covers exactly area 4") {
    const MeshDomain m = generate_mesh(MeshShape::LShape, 0.05);
    CHECK(m.boundary_loop_count() == 1);
    CHECK(m.area == doctest::Approx(4.0).epsilon(1e-12));
    // the reentrant corner (sqrt(5)-1, sqrt(5)-1) is a mesh vertex
    const double a = std::sqrt(5.0) - 1.0;
    bool found = false;
    for (const auto& p : m.vertices)
      found = found || (std::abs(p.x - a) < 1e-12 && std::abs(p.y - a) < 1e-12);
    CHECK(found);
  }

  SUBCASE("unsupported shape name") {
    CHECK_THROWS_AS(mesh_shape_from_string("hexagon"), ConfigError);
    CHECK_THROWS_AS(generate_mesh(MeshShape::Square, -1.0), ConfigError);
  }
}

TEST_CASE("mesh file round trip is bit exact") {
  const MeshDomain m = generate_mesh(MeshShape::Annulus, 0.15);
  std::ostringstream first;
  write_mesh(first, m);
  std::istringstream back(first.str());
  const MeshDomain m2 = read_mesh(back);
  std::ostringstream second;
  write_mesh(second, m2);
  CHECK(first.str() == second.str());
  CHECK(m2.vertices.size() == m.vertices.size());
  CHECK(m2.boundary_edges.size() == m.boundary_edges.size());
}

TEST_CASE("FEM Poisson converges at second order") {
  // manufactured solution phi* = cos(pi x) cos(pi y), theta = -2 pi^2 phi*
  std::vector<double> errs;
  for (double h : {0.1, 0.05, 0.025}) {
    Domain d{generate_mesh(MeshShape::Square, h)};
    FemOperators ops(d);
    const ScalarField theta = sample_mesh(d, [](double x, double y) {
      return -2.0 * kPi * kPi * std::cos(kPi * x) * std::cos(kPi * y);
    });
    const ScalarField phi = ops.solve_neumann(theta);
    const ScalarField exact = sample_mesh(
        d, [](double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); });
    ScalarField diff(d);
    for (std::size_t k = 0; k < phi.size(); ++k)
      diff.values[k] = phi.values[k] - exact.values[k];
    errs.push_back(l2_norm(diff));
  }
  const double slope1 = std::log2(errs[0] / errs[1]);
  const double slope2 = std::log2(errs[1] / errs[2]);
  CHECK(slope1 >= 1.8);
  CHECK(slope1 <= 2.2);
  CHECK(slope2 >= 1.8);
  CHECK(slope2 <= 2.2);
}

TEST_CASE("leray projection is approximately idempotent (recovery-limited)") {
  // The nodal gradient recovery reintroduces an O(h) boundary-dominated
  // defect, so idempotence holds to discretization accuracy rather than to
  // solver tolerance: measured 1.7e-2 / 6.0e-3 / 2.0e-3 at h = 0.05 / 0.025
  // / 0.0125 on this field. Assert the measured level and its decay.
  auto defect = [](double h) {
    Domain d{generate_mesh(MeshShape::Circle, h)};
    FemOperators ops(d);
    const VectorField v = sample_mesh_vec(
        d, [](double x, double y) { return std::cos(kPi * x) + 0.3 * y; },
        [](double x, double y) { return x * y; });
    const VectorField p1 = ops.leray_project(v);
    const VectorField p2 = ops.leray_project(p1);
    VectorField diff(d);
    for (std::size_t k = 0; k < v.size(); ++k) {
      diff.u[k] = p2.u[k] - p1.u[k];
      diff.v[k] = p2.v[k] - p1.v[k];
    }
    return l2_norm(diff) / l2_norm(p1);
  };
  const double coarse = defect(0.05);
  const double fine = defect(0.025);
  CHECK(fine <= 8e-3);
  CHECK(coarse / fine >= 2.0);
}
