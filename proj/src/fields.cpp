#include "optmix/fields.hpp"

#include <algorithm>
#include <cmath>

#include "optmix/errors.hpp"

namespace optmix {

namespace {

void check_nonempty(std::size_t n) {
  if (n == 0) throw NumericsError("operation on empty field");
}

void check_same_domain(const Domain* a, const Domain* b) {
  if (!domains_compatible(a, b))
    throw NumericsError("field domain mismatch");
}

// Unnormalized integral of the pointwise product of two grid samples.
// Trapezoidal weights on no-flux grids (both endpoints present), plain
// Riemann sum on periodic grids; both are spectrally consistent for the
// respective symmetry class.
double rect_integral_product(const RectDomain& r, const std::vector<double>& f,
                             const std::vector<double>& g) {
  const double cell = r.hx() * r.hy();
  double total = 0.0;
  if (r.periodic()) {
    for (std::size_t k = 0; k < f.size(); ++k) total += f[k] * g[k];
    return total * cell;
  }
  for (int j = 0; j < r.ny; ++j) {
    const double wy = (j == 0 || j == r.ny - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 0; i < r.nx; ++i) {
      const double wx = (i == 0 || i == r.nx - 1) ? 0.5 : 1.0;
      row += wx * f[static_cast<std::size_t>(j) * r.nx + i] *
             g[static_cast<std::size_t>(j) * r.nx + i];
    }
    total += wy * row;
  }
  return total * cell;
}

// Consistent P1 mass quadrature: int f g = f^T M g assembled on the fly.
double mesh_integral_product(const MeshDomain& m, const std::vector<double>& f,
                             const std::vector<double>& g) {
  double total = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    const double a = m.triangle_area(static_cast<int>(t));
    const double f0 = f[tri[0]], f1 = f[tri[1]], f2 = f[tri[2]];
    const double g0 = g[tri[0]], g1 = g[tri[1]], g2 = g[tri[2]];
    total += (a / 12.0) * (f0 * (2 * g0 + g1 + g2) + f1 * (g0 + 2 * g1 + g2) +
                           f2 * (g0 + g1 + 2 * g2));
  }
  return total;
}

double integral_product(const Domain& d, const std::vector<double>& f,
                        const std::vector<double>& g) {
  if (const auto* r = as_rect(d)) return rect_integral_product(*r, f, g);
  return mesh_integral_product(*as_mesh(d), f, g);
}

}  // namespace

Constraint Constraint::energy(double U) {
  if (!(U > 0.0) || !std::isfinite(U))
    throw ConfigError("energy constraint requires finite U > 0");
  Constraint c;
  c.kind = Kind::Energy;
  c.U = U;
  return c;
}

Constraint Constraint::enstrophy(double inv_tau) {
  if (!(inv_tau > 0.0) || !std::isfinite(inv_tau))
    throw ConfigError("enstrophy constraint requires finite 1/tau > 0");
  Constraint c;
  c.kind = Kind::Enstrophy;
  c.inv_tau = inv_tau;
  return c;
}

double ScalarField::mean() const {
  check_nonempty(values.size());
  std::vector<double> ones(values.size(), 1.0);
  return integral_product(*domain, values, ones) / domain_area(*domain);
}

double inner_product(const ScalarField& f, const ScalarField& g) {
  check_nonempty(f.size());
  check_same_domain(f.domain, g.domain);
  return integral_product(*f.domain, f.values, g.values) / domain_area(*f.domain);
}

double inner_product(const VectorField& a, const VectorField& b) {
  check_nonempty(a.size());
  check_same_domain(a.domain, b.domain);
  const double s = integral_product(*a.domain, a.u, b.u) +
                   integral_product(*a.domain, a.v, b.v);
  return s / domain_area(*a.domain);
}

double l2_norm(const ScalarField& f) {
  return std::sqrt(std::max(0.0, inner_product(f, f)));
}

double l2_norm(const VectorField& f) {
  return std::sqrt(std::max(0.0, inner_product(f, f)));
}

double linf_norm(const ScalarField& f) {
  check_nonempty(f.size());
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double linf_norm(const VectorField& f) {
  check_nonempty(f.size());
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    m = std::max(m, std::hypot(f.u[k], f.v[k]));
  return m;
}

ScalarField subtract_mean(const ScalarField& f) {
  const double mu = f.mean();
  ScalarField out = f;
  for (double& v : out.values) v -= mu;
  return out;
}

double energy(const VectorField& u) {
  check_nonempty(u.size());
  return integral_product(*u.domain, u.u, u.u) +
         integral_product(*u.domain, u.v, u.v);
}

double enstrophy_from_gradients(const VectorField& grad_u,
                                const VectorField& grad_v) {
  check_same_domain(grad_u.domain, grad_v.domain);
  return energy(grad_u) + energy(grad_v);
}

double max_gradient_frobenius(const VectorField& grad_u,
                              const VectorField& grad_v) {
  check_same_domain(grad_u.domain, grad_v.domain);
  double m = 0.0;
  for (std::size_t k = 0; k < grad_u.size(); ++k) {
    const double s = grad_u.u[k] * grad_u.u[k] + grad_u.v[k] * grad_u.v[k] +
                     grad_v.u[k] * grad_v.u[k] + grad_v.v[k] * grad_v.v[k];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

}  // namespace optmix
