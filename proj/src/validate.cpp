#include "optmix/validate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "optmix/diagnostics.hpp"
#include "optmix/errors.hpp"
#include "optmix/stirring.hpp"
#include "optmix/timestepper.hpp"

namespace optmix {

namespace {

double rel_diff(const VectorField& a, const VectorField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a.u[k] - b.u[k]) * (a.u[k] - b.u[k]) +
           (a.v[k] - b.v[k]) * (a.v[k] - b.v[k]);
    den += b.u[k] * b.u[k] + b.v[k] * b.v[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double rel_diff(const ScalarField& a, const ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a.values[k] - b.values[k]) * (a.values[k] - b.values[k]);
    den += b.values[k] * b.values[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

ScalarField random_neumann_scalar(const Domain& dom, std::mt19937& rng,
                                  int max_mode) {
  const RectDomain& r = *as_rect(dom);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(max_mode + 1) * (max_mode + 1));
  for (auto& c : a) c = coef(rng);
  a[0] = 0.0;
  ScalarField f(dom);
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const double xs = (r.x(i) - r.x_min) / r.lx();
      const double ys = (r.y(j) - r.y_min) / r.ly();
      double v = 0.0;
      for (int n = 0; n <= max_mode; ++n)
        for (int m = 0; m <= max_mode; ++m) {
          if (n == 0 && m == 0) continue;
          v += a[static_cast<std::size_t>(n) * (max_mode + 1) + m] *
               std::cos(n * std::numbers::pi * xs) *
               std::cos(m * std::numbers::pi * ys);
        }
      f.values[static_cast<std::size_t>(j) * r.nx + i] = v;
    }
  return subtract_mean(f);
}

ScalarField random_periodic_scalar(const Domain& dom, std::mt19937& rng,
                                   int max_mode) {
  const RectDomain& r = *as_rect(dom);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  ScalarField f(dom);
  std::vector<double> ac(static_cast<std::size_t>(max_mode + 1) * (max_mode + 1));
  std::vector<double> as(ac.size()), bc(ac.size()), bs(ac.size());
  for (std::size_t k = 0; k < ac.size(); ++k) {
    ac[k] = coef(rng);
    as[k] = coef(rng);
    bc[k] = coef(rng);
    bs[k] = coef(rng);
  }
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const double xs = 2.0 * std::numbers::pi * (r.x(i) - r.x_min) / r.lx();
      const double ys = 2.0 * std::numbers::pi * (r.y(j) - r.y_min) / r.ly();
      double v = 0.0;
      for (int n = 0; n <= max_mode; ++n)
        for (int m = 0; m <= max_mode; ++m) {
          if (n == 0 && m == 0) continue;
          const std::size_t s = static_cast<std::size_t>(n) * (max_mode + 1) + m;
          v += ac[s] * std::cos(n * xs) * std::cos(m * ys) +
               as[s] * std::cos(n * xs) * std::sin(m * ys) +
               bc[s] * std::sin(n * xs) * std::cos(m * ys) +
               bs[s] * std::sin(n * xs) * std::sin(m * ys);
        }
      f.values[static_cast<std::size_t>(j) * r.nx + i] = v;
    }
  return subtract_mean(f);
}

VectorField random_streamfunction_velocity(const Domain& dom, std::mt19937& rng,
                                           int max_mode) {
  const RectDomain& r = *as_rect(dom);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(max_mode) * max_mode);
  for (auto& c : a) c = coef(rng);
  VectorField u(dom);
  const double pi = std::numbers::pi;
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const double xs = (r.x(i) - r.x_min) / r.lx();
      const double ys = (r.y(j) - r.y_min) / r.ly();
      double ux = 0.0, uy = 0.0;
      for (int n = 1; n <= max_mode; ++n)
        for (int m = 1; m <= max_mode; ++m) {
          const double c = a[static_cast<std::size_t>(n - 1) * max_mode + (m - 1)];
          // psi = c sin(n pi xs) sin(m pi ys); u = (dpsi/dy, -dpsi/dx)
          ux += c * std::sin(n * pi * xs) * (m * pi / r.ly()) * std::cos(m * pi * ys);
          uy -= c * (n * pi / r.lx()) * std::cos(n * pi * xs) * std::sin(m * pi * ys);
        }
      const std::size_t s = static_cast<std::size_t>(j) * r.nx + i;
      u.u[s] = ux;
      u.v[s] = uy;
    }
  return u;
}

VectorField random_smooth_velocity(const Domain& dom, std::mt19937& rng,
                                   int max_mode) {
  ScalarField fx = random_neumann_scalar(dom, rng, max_mode);
  ScalarField fy = random_neumann_scalar(dom, rng, max_mode);
  VectorField v(dom);
  v.u = fx.values;
  v.v = fy.values;
  return v;
}

namespace {

struct Battery {
  std::vector<CheckResult> results;
  bool verbose;

  void add(const std::string& name, bool passed, const std::string& detail) {
    results.push_back({name, passed, detail});
    if (verbose)
      std::fprintf(stderr, "  %-44s %s  (%s)\n", name.c_str(),
                   passed ? "ok" : "FAIL", detail.c_str());
  }
};

std::string max_str(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

void check_prop1(Battery& b, unsigned seed) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  std::mt19937 rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField u = random_streamfunction_velocity(dom, rng);
    const VectorField v = random_smooth_velocity(dom, rng);
    const VectorField pv = ws.leray_project(v);
    VectorField diff(dom);
    for (std::size_t k = 0; k < v.size(); ++k) {
      diff.u[k] = v.u[k] - pv.u[k];
      diff.v[k] = v.v[k] - pv.v[k];
    }
    const double ip = std::abs(inner_product(u, diff));
    worst = std::max(worst, ip / (l2_norm(u) * l2_norm(v)));
  }
  b.add("prop1_projection_orthogonality", worst <= 1e-9, "max " + max_str(worst));
}

void check_prop2(Battery& b, unsigned seed) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  std::mt19937 rng(seed + 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField u = random_streamfunction_velocity(dom, rng);
    const VectorField v = random_smooth_velocity(dom, rng);
    const VectorField composite =
        ws.laplacian_velocity(ws.leray_project(ws.inverse_laplacian_velocity(v)));
    VectorField diff(dom);
    for (std::size_t k = 0; k < v.size(); ++k) {
      diff.u[k] = v.u[k] - composite.u[k];
      diff.v[k] = v.v[k] - composite.v[k];
    }
    const double ip = std::abs(inner_product(u, diff));
    worst = std::max(worst, ip / (l2_norm(u) * l2_norm(v)));
  }
  b.add("prop2_inverse_laplacian_orthogonality", worst <= 1e-8,
        "max " + max_str(worst));
}

void check_commutation(Battery& b, unsigned seed) {
  RectDomain r{0, 1, 0, 1, 33, 33, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  std::mt19937 rng(seed + 2);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarField theta = random_neumann_scalar(dom, rng);
    const ScalarField lhs = ws.even_extend(ws.poisson_neumann(theta));
    const ScalarField rhs = ws.poisson_periodic(ws.even_extend(theta));
    worst = std::max(worst, rel_diff(lhs, rhs));
  }
  b.add("appendix_b_extension_commutation", worst <= 1e-11, "max " + max_str(worst));
}

void check_idempotence(Battery& b, unsigned seed) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  std::mt19937 rng(seed + 3);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const VectorField v = random_smooth_velocity(dom, rng);
    const VectorField p1 = ws.leray_project(v);
    const VectorField p2 = ws.leray_project(p1);
    worst = std::max(worst, rel_diff(p2, p1));
  }
  b.add("leray_projection_idempotence", worst <= 1e-11, "max " + max_str(worst));
}

void check_norm_equivalence(Battery& b, unsigned seed) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  std::mt19937 rng(seed + 4);
  // Poincare constant of the square: C = 1/sqrt(lambda_1), lambda_1 = pi^2/4
  const double C = 2.0 / std::numbers::pi;
  const double upper = std::sqrt(1.0 + C * C);
  double worst_lo = 0.0, worst_hi = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScalarField theta = random_neumann_scalar(dom, rng);
    const double mix = mix_norm(theta, ws);
    const double hm1 = h_minus_one_norm_oracle(theta, 16).value;
    worst_lo = std::max(worst_lo, (hm1 - mix) / mix);            // need <= ~0
    worst_hi = std::max(worst_hi, (mix - upper * hm1) / mix);    // need <= ~0
  }
  const bool ok = worst_lo <= 1e-9 && worst_hi <= 1e-9;
  b.add("prop4_norm_equivalence", ok,
        "lower slack " + max_str(worst_lo) + ", upper slack " + max_str(worst_hi));
}

void check_mix_eigenfunction(Battery& b) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  double worst = 0.0;
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m) {
      if (n == 0 && m == 0) continue;
      ScalarField f(dom);
      for (int j = 0; j < r.ny; ++j)
        for (int i = 0; i < r.nx; ++i)
          f.values[static_cast<std::size_t>(j) * r.nx + i] =
              std::cos(n * std::numbers::pi * (r.x(i) + 1.0) / 2.0) *
              std::cos(m * std::numbers::pi * (r.y(j) + 1.0) / 2.0);
      const double lambda = (n * n + m * m) * std::numbers::pi * std::numbers::pi / 4.0;
      const double expected = l2_norm(f) / std::sqrt(lambda);
      worst = std::max(worst, std::abs(mix_norm(f, ws) - expected) / expected);
    }
  b.add("mix_norm_eigenfunction_consistency", worst <= 1e-9, "max " + max_str(worst));
}

void check_short_run(Battery& b, Constraint constraint, const char* label) {
  SimulationConfig cfg;
  cfg.shape = "square";
  cfg.resolution = 128;
  cfg.constraint = constraint;
  cfg.ic = "preset_eq31";
  cfg.t_end = 0.2;
  cfg.macro_dt = 0.01;
  const SimulationResult res = run_simulation(cfg);
  const double area = 4.0;
  double worst_constraint = 0.0, worst_monotone = 0.0, worst_bound = 0.0;
  for (std::size_t k = 0; k < res.series.size(); ++k) {
    const auto& row = res.series[k];
    if (constraint.kind == Constraint::Kind::Energy)
      worst_constraint = std::max(
          worst_constraint,
          std::abs(row.energy - constraint.U * constraint.U * area) / area);
    else
      worst_constraint = std::max(
          worst_constraint,
          std::abs(row.enstrophy - area * constraint.inv_tau * constraint.inv_tau) /
              (area * constraint.inv_tau * constraint.inv_tau));
    if (k > 0)
      worst_monotone =
          std::max(worst_monotone, row.mix_norm - res.series[k - 1].mix_norm);
    worst_bound = std::max(worst_bound, row.lower_bound - row.mix_norm);
  }
  const bool ok =
      worst_constraint <= 1e-10 && worst_monotone <= 1e-6 && worst_bound <= 1e-6;
  b.add(std::string("short_run_constraint_monotone_bounds_") + label, ok,
        "constraint " + max_str(worst_constraint) + ", monotone " +
            max_str(worst_monotone) + ", bound " + max_str(worst_bound));
}

void check_decay_identity(Battery& b) {
  RectDomain r{-1, 1, -1, 1, 129, 129, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  const ScalarField theta = evaluate_ic("preset_eq31", dom);
  const double U = 1.0;
  SpectralStirrer stirrer(ws, Constraint::energy(U), DealiasRule::Half);
  const StirringResult flow = stirrer.compute(theta);
  // independent quadrature of -2 int theta u . grad(phi)
  const ScalarField phi = ws.poisson_neumann(theta);
  const VectorField grad_phi = ws.gradient(phi);
  VectorField m(dom);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m.u[k] = theta.values[k] * grad_phi.u[k];
    m.v[k] = theta.values[k] * grad_phi.v[k];
  }
  const double area = 4.0;
  const double lhs = -2.0 * area * inner_product(m, flow.u);
  const double rhs = -2.0 * area * U * flow.raw_magnitude;
  const double rel = std::abs(lhs - rhs) / std::abs(rhs);
  b.add("energy_decay_rate_identity", rel <= 1e-8, "rel " + max_str(rel));
}

void check_scaling_equivariance(Battery& b) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  const ScalarField theta = evaluate_ic("preset_eq31", dom);
  SpectralStirrer stirrer(ws, Constraint::energy(1.0), DealiasRule::Half);
  const StirringResult base = stirrer.compute(theta);
  double worst = 0.0;
  for (double alpha : {0.5, 2.0, 10.0}) {
    ScalarField scaled = theta;
    for (double& v : scaled.values) v *= alpha;
    const StirringResult res = stirrer.compute(scaled);
    worst = std::max(worst, rel_diff(res.u, base.u));
  }
  b.add("energy_flow_scaling_equivariance", worst <= 1e-9, "max " + max_str(worst));
}

void check_even_symmetry(Battery& b) {
  const int res = 64;
  RectDomain rn{-1, 1, -1, 1, res + 1, res + 1, RectBc::NoFluxEvenExtension};
  RectDomain rp{-1, 1, -1, 1, res, res, RectBc::Periodic};
  Domain dn{rn}, dp{rp};
  SpectralWorkspace wsn(dn), wsp(dp);
  double worst = 0.0;
  for (Constraint c : {Constraint::energy(1.0), Constraint::enstrophy(15.0)}) {
    const DealiasRule rule = default_dealias_rule(c);
    const ScalarField tn = evaluate_ic("preset_even", dn);
    const ScalarField tp = evaluate_ic("preset_even", dp);
    SpectralStirrer sn(wsn, c, rule), sp(wsp, c, rule);
    const StirringResult fn = sn.compute(tn);
    const StirringResult fp = sp.compute(tp);
    // the periodic nodes are a subset of the no-flux nodes (same spacing)
    double num = 0.0, den = 0.0;
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        const std::size_t sp_idx = static_cast<std::size_t>(j) * res + i;
        const std::size_t sn_idx = static_cast<std::size_t>(j) * (res + 1) + i;
        const double du = fp.u.u[sp_idx] - fn.u.u[sn_idx];
        const double dv = fp.u.v[sp_idx] - fn.u.v[sn_idx];
        num += du * du + dv * dv;
        den += fn.u.u[sn_idx] * fn.u.u[sn_idx] + fn.u.v[sn_idx] * fn.u.v[sn_idx];
      }
    worst = std::max(worst, std::sqrt(num / den));
  }
  b.add("even_ic_bc_flow_equivalence", worst <= 1e-9, "max " + max_str(worst));
}

void check_rk4_order(Battery& b) {
  RectDomain r{-1, 1, -1, 1, 65, 65, RectBc::NoFluxEvenExtension};
  Domain dom{r};
  SpectralWorkspace ws(dom);
  const ScalarField theta = evaluate_ic("preset_eq31", dom);
  SpectralStirrer stirrer(ws, Constraint::enstrophy(15.0), DealiasRule::TwoThirds);
  stirrer.compute(theta);
  const double T = 0.05;
  auto advance = [&](int substeps) {
    std::vector<double> ext(ws.real_size());
    ws.extend_scalar_raw(theta.values.data(), ext.data());
    rk4_substeps_ext(ws, ext, stirrer.u_ext(), stirrer.v_ext(), T, 0.5,
                     DealiasRule::TwoThirds, 100000, substeps);
    ScalarField out(dom);
    ws.restrict_raw(ext.data(), out.values.data());
    return out;
  };
  // substep counts keep dt * ||A|| well inside the RK4 stability region
  const ScalarField a = advance(16);
  const ScalarField c2 = advance(32);
  const ScalarField c4 = advance(64);
  ScalarField d1(dom), d2(dom);
  for (std::size_t k = 0; k < a.size(); ++k) {
    d1.values[k] = a.values[k] - c2.values[k];
    d2.values[k] = c2.values[k] - c4.values[k];
  }
  const double order = std::log2(l2_norm(d1) / l2_norm(d2));
  b.add("rk4_self_convergence_order", order >= 3.8,
        "observed order " + max_str(order));
}

}  // namespace

std::vector<CheckResult> run_validation_suite(unsigned seed, bool verbose) {
  Battery b;
  b.verbose = verbose;
  check_prop1(b, seed);
  check_prop2(b, seed);
  check_commutation(b, seed);
  check_idempotence(b, seed);
  check_norm_equivalence(b, seed);
  check_mix_eigenfunction(b);
  check_decay_identity(b);
  check_scaling_equivariance(b);
  check_even_symmetry(b);
  check_rk4_order(b);
  check_short_run(b, Constraint::energy(1.0), "energy");
  check_short_run(b, Constraint::enstrophy(15.0), "enstrophy");
  return b.results;
}

}  // namespace optmix
