#pragma once

#include <vector>

#include "optmix/fem.hpp"
#include "optmix/fields.hpp"
#include "optmix/spectral.hpp"

namespace optmix {

/// One row per macro step of a simulation.
struct DiagnosticsRecord {
  double t = 0.0;
  double mix_norm = 0.0;
  double mix_norm_normalized = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double energy = 0.0;
  double enstrophy = 0.0;
  double instantaneous_rate = 0.0;  // d/dt mix_norm^2 under the active flow
  double lower_bound = 0.0;
  double gamma = 0.0;  // ||grad u||_Linf estimate
};

/// Least-squares fit of log(mix_norm) = a t + b over a window.
struct RateFit {
  double a = 0.0;
  double b = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

/// ||theta||_m = ||grad(inverse-Laplacian theta)||_L2 with the Neumann (or
/// periodic) solve of the backend owning the field.
double mix_norm(const ScalarField& theta, SpectralWorkspace& ws);
double mix_norm(const ScalarField& theta, FemOperators& ops);

struct HMinusOneResult {
  double value = 0.0;
  bool tail_warning = false;  // truncated modes carry more than 1% of the mass
};

/// Cosine eigen-expansion estimate of ||theta||_{H^-1} on a no-flux
/// rectangle; a test oracle independent of the Poisson solvers.
HMinusOneResult h_minus_one_norm_oracle(const ScalarField& theta, int n_modes = 64);

/// Same expansion evaluated for the mix norm (oracle counterpart).
double mix_norm_eigen_expansion(const ScalarField& theta, int n_modes = 64);

RateFit fit_decay_rate(const std::vector<double>& times,
                       const std::vector<double>& mix_norms, double t_lo,
                       double t_hi);

/// l0 = ||theta0||_m / ||theta0||_L2.
double characteristic_length(const ScalarField& theta0, SpectralWorkspace& ws);
double characteristic_length(const ScalarField& theta0, FemOperators& ops);

/// Paired periodic / no-flux mix-norm series on identical time grids.
struct BcComparison {
  std::vector<double> times;
  std::vector<double> mix_periodic;
  std::vector<double> mix_noflux;
  double max_rel_diff = 0.0;         // max |p - n| / n over the series
  double final_periodic_minus_noflux = 0.0;
};

BcComparison compare_bc_series(const std::vector<DiagnosticsRecord>& periodic,
                               const std::vector<DiagnosticsRecord>& noflux);

}  // namespace optmix
