#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "optmix/fields.hpp"

namespace optmix {

/// All-or-nothing spectral filter applied to nonlinear products. The cutoff
/// is a fraction of the axis Nyquist wavenumber pi/h of the *original* grid,
/// so periodic and even-extension runs at the same resolution filter the same
/// physical wavenumbers.
enum class DealiasRule { TwoThirds, Half };

/// Fourier pseudospectral operators on a rectangle.
///
/// For bc = no-flux the workspace transforms on the doubled periodic domain
/// (2(nx-1) x 2(ny-1) samples; the duplicated reflection line is dropped) and
/// fields are mirrored across the edges: scalars evenly, velocity components
/// with odd symmetry in their own direction. For bc = periodic the transform
/// grid is the original grid.
///
/// A workspace owns scratch buffers and FFTW plans: use one workspace per
/// thread of execution; distinct workspaces may run concurrently.
class SpectralWorkspace {
 public:
  /// `dom` must hold a RectDomain and outlive the workspace.
  explicit SpectralWorkspace(const Domain& dom);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Domain& original_domain() const { return *orig_; }
  /// Doubled periodic rectangle for no-flux, the original domain otherwise.
  const Domain& transform_domain() const { return ext_domain_; }
  const RectDomain& rect() const;
  int ex() const { return ex_; }
  int ey() const { return ey_; }

  // -- mirroring -----------------------------------------------------------
  ScalarField even_extend(const ScalarField& f) const;
  ScalarField restrict_scalar(const ScalarField& f_ext) const;
  /// Velocity parity: u odd across x edges / even across y, v the converse.
  VectorField extend_velocity(const VectorField& v) const;
  VectorField restrict_velocity(const VectorField& v_ext) const;

  // -- Poisson solves (mean-zero gauge: the k=0 coefficient is zeroed) ------
  /// Solves Laplace(phi) = theta with grad(phi).n = 0 on the rectangle edges
  /// via the doubled-domain transform. Input must be mean-zero.
  ScalarField poisson_neumann(const ScalarField& theta);
  /// Solves Laplace(phi) = theta with periodic conditions; accepts fields on
  /// the transform domain (or the original domain of a periodic workspace).
  ScalarField poisson_periodic(const ScalarField& theta);
  /// Dispatches on the workspace boundary condition.
  ScalarField solve_poisson(const ScalarField& theta);

  // -- differential operators on original-domain fields ---------------------
  VectorField gradient(const ScalarField& f);
  ScalarField divergence(const VectorField& v);
  ScalarField laplacian(const ScalarField& f);
  /// Componentwise scalar Poisson solve (Neumann or periodic per bc); each
  /// component is mean-subtracted first.
  VectorField inverse_laplacian_vector(const VectorField& v);
  /// Componentwise inverse Laplacian in velocity parity on the transform
  /// torus; the formulation behind the enstrophy-constrained flow.
  VectorField inverse_laplacian_velocity(const VectorField& v);
  /// Componentwise Laplacian in velocity parity (adjoint check for the above).
  VectorField laplacian_velocity(const VectorField& v);

  /// Leray-Helmholtz projection: divergence-free part of v honoring the
  /// workspace boundary condition.
  VectorField leray_project(const VectorField& v);

  ScalarField dealias(const ScalarField& f, DealiasRule rule);
  VectorField dealias(const VectorField& v, DealiasRule rule);

  /// int over the rectangle of the squared velocity-gradient Frobenius norm.
  double enstrophy(const VectorField& v);
  /// Componentwise gradients of a velocity field (for diagnostics).
  void velocity_gradients(const VectorField& v, VectorField& grad_u,
                          VectorField& grad_v);

  // -- raw-buffer interface for the stirring/timestepping hot path ----------
  using Complex = std::complex<double>;
  std::size_t real_size() const { return static_cast<std::size_t>(ex_) * ey_; }
  std::size_t spec_size() const {
    return static_cast<std::size_t>(ex_ / 2 + 1) * ey_;
  }
  void forward(const double* real_in, Complex* spec_out);   // unnormalized
  void inverse(const Complex* spec_in, double* real_out);   // normalized
  void apply_inverse_laplacian(Complex* spec) const;        // in place
  void apply_laplacian(Complex* spec) const;
  void apply_mask(Complex* spec, DealiasRule rule) const;
  void apply_gradient(const Complex* spec, Complex* ddx, Complex* ddy) const;
  void project_divergence_free(Complex* sx, Complex* sy) const;
  void extend_scalar_raw(const double* src, double* dst) const;
  void extend_velocity_raw(const double* src, double* dst, bool x_component) const;
  void restrict_raw(const double* ext, double* orig) const;
  /// Mean over the transform torus of fx^2 (+ fy^2 when fy != nullptr);
  /// equals the |Omega|-normalized mean over the original rectangle.
  double torus_mean_square(const double* fx, const double* fy) const;

 private:
  const Domain* orig_;
  Domain ext_domain_;
  int nx_, ny_, ex_, ey_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Fraction of the axis Nyquist kept by a rule (2/3 or 1/2).
double dealias_fraction(DealiasRule rule);

/// Default rule bound to the constraint kind: two-thirds for enstrophy,
/// half for energy.
DealiasRule default_dealias_rule(const Constraint& c);

}  // namespace optmix
