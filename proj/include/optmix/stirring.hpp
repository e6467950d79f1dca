#pragma once

#include <vector>

#include "optmix/fem.hpp"
#include "optmix/fields.hpp"
#include "optmix/spectral.hpp"

namespace optmix {

/// Local-in-time optimal flow for the current scalar snapshot, plus the
/// diagnostics of the normalized field. `rate` is d/dt of the squared
/// (|Omega|-normalized) mix norm under this flow.
struct StirringResult {
  VectorField u;
  double raw_magnitude = 0.0;  // <|projected field|^2>^{1/2} before normalization
  bool stagnated = false;
  double energy = 0.0;
  double enstrophy = 0.0;
  double gamma = 0.0;  // max over dofs of |grad u|_F
  double rate = 0.0;
};

/// Relative stagnation threshold: the flow is declared degenerate when the
/// projected field magnitude falls below eps * ||theta||_L2^2.
constexpr double kStagnationEps = 1e-12;

/// Pseudospectral stirring on rectangles. Degenerate scalars (projection of
/// theta grad(phi) vanishes) yield u = 0 with `stagnated` set.
///
/// The energy flow is U P(theta grad phi) / <|P(theta grad phi)|^2>^{1/2}.
/// The enstrophy flow applies the componentwise inverse Laplacian on the
/// transform torus before projecting (the even-extension formulation under
/// which the flow is optimal on rectangles), then normalizes by
/// <|grad w|^2>^{1/2}.
class SpectralStirrer {
 public:
  SpectralStirrer(SpectralWorkspace& ws, Constraint constraint, DealiasRule rule);

  StirringResult compute(const ScalarField& theta);

  /// Extended-grid velocity samples of the last compute (zero if stagnated);
  /// the time integrator advects on the transform grid directly.
  const std::vector<double>& u_ext() const { return u_ext_; }
  const std::vector<double>& v_ext() const { return v_ext_; }

 private:
  SpectralWorkspace& ws_;
  Constraint constraint_;
  DealiasRule rule_;
  std::vector<double> u_ext_, v_ext_;
};

/// P1 finite-element stirring on meshes. The inverse Laplacian of the
/// enstrophy branch is the componentwise mean-zero Neumann solve.
class FemStirrer {
 public:
  FemStirrer(FemOperators& ops, Constraint constraint);
  StirringResult compute(const ScalarField& theta);

 private:
  FemOperators& ops_;
  Constraint constraint_;
};

/// max(0, mix0 - U |Omega|^{1/2} linf0 t): the fixed-energy mixing bound.
double lower_bound_energy(double mix_norm0, double linf0, double U, double area,
                          double t);

/// mix0 * exp(-int gamma dt) by trapezoidal quadrature of the sampled
/// gamma(t) = ||grad u||_Linf series. Throws on negative samples.
double lower_bound_enstrophy(double mix_norm0, const std::vector<double>& times,
                             const std::vector<double>& gammas);

}  // namespace optmix
