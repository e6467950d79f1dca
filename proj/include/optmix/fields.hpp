#pragma once

#include <vector>

#include "optmix/domain.hpp"

namespace optmix {

/// Sample of a scalar quantity: row-major grid values on a RectDomain or
/// per-vertex nodal values on a MeshDomain.
struct ScalarField {
  const Domain* domain = nullptr;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Domain& d)
      : domain(&d), values(domain_dofs(d), 0.0) {}
  ScalarField(const Domain& d, std::vector<double> v)
      : domain(&d), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double mean() const;  // (1/|Omega|) integral
};

/// Two-component velocity sample on the same layouts as ScalarField.
struct VectorField {
  const Domain* domain = nullptr;
  std::vector<double> u;  // x component
  std::vector<double> v;  // y component

  VectorField() = default;
  explicit VectorField(const Domain& d)
      : domain(&d),
        u(domain_dofs(d), 0.0),
        v(domain_dofs(d), 0.0) {}

  std::size_t size() const { return u.size(); }
};

/// Fixed-energy (rms velocity U) or fixed-enstrophy (rate of strain 1/tau)
/// flow constraint.
struct Constraint {
  enum class Kind { Energy, Enstrophy };
  Kind kind = Kind::Energy;
  double U = 0.0;
  double inv_tau = 0.0;

  static Constraint energy(double U);
  static Constraint enstrophy(double inv_tau);
  double magnitude() const { return kind == Kind::Energy ? U : inv_tau; }
};

// |Omega|-normalized inner products and norms: <f,g> = (1/|Omega|) int f g.
double inner_product(const ScalarField& f, const ScalarField& g);
double inner_product(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& f);
double linf_norm(const ScalarField& f);
double linf_norm(const VectorField& f);

/// Returns f minus its spatial mean; a no-op (within roundoff) for fields
/// that are already mean-zero.
ScalarField subtract_mean(const ScalarField& f);

/// Unnormalized kinetic energy, int |u|^2.
double energy(const VectorField& u);

/// Unnormalized enstrophy from precomputed component gradients:
/// int (|grad u|^2 + |grad v|^2). Each backend supplies the gradients.
double enstrophy_from_gradients(const VectorField& grad_u,
                                const VectorField& grad_v);

/// Max over dofs of the Frobenius norm of the velocity gradient.
double max_gradient_frobenius(const VectorField& grad_u,
                              const VectorField& grad_v);

}  // namespace optmix
