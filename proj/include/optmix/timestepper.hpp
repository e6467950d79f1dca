#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "optmix/config.hpp"
#include "optmix/diagnostics.hpp"
#include "optmix/spectral.hpp"
#include "optmix/stirring.hpp"

namespace optmix {

/// Macro-step clock: the optimal flow is refreshed every macro_dt and held
/// frozen while the scalar is advanced with inner substeps.
struct SimClock {
  double t = 0.0;
  double macro_dt = 0.01;
  double cfl = 0.5;
  double t_end = 1.0;
  void validate() const;
};

/// -u.grad(theta) with the active dealias rule applied to the product.
ScalarField advect_rhs_spectral(SpectralWorkspace& ws, const ScalarField& theta,
                                const VectorField& u, DealiasRule rule);

/// Classical RK4 with n = ceil(dt_macro max|u| / (cfl h)) equal substeps of
/// the frozen flow. Throws when the substep count exceeds `substep_cap`.
ScalarField rk4_substeps(SpectralWorkspace& ws, const ScalarField& theta,
                         const VectorField& u, double dt_macro, double cfl,
                         DealiasRule rule, int substep_cap = 100000);

/// Transform-grid version used by the run loop (theta_ext updated in place).
/// `forced_substeps` > 0 overrides the CFL substep count (convergence tests).
void rk4_substeps_ext(SpectralWorkspace& ws, std::vector<double>& theta_ext,
                      const std::vector<double>& u_ext,
                      const std::vector<double>& v_ext, double dt_macro,
                      double cfl, DealiasRule rule, int substep_cap = 100000,
                      int forced_substeps = 0);

struct SimulationResult {
  std::shared_ptr<Domain> domain;
  std::vector<DiagnosticsRecord> series;
  std::vector<std::pair<double, ScalarField>> snapshots;
  ScalarField theta_final;
  ScalarField theta_initial;
};

/// Runs the configured simulation: refresh optimal flow, advance theta by
/// macro_dt (spectral RK4 or FEM semi-Lagrangian), enforce the zero mean,
/// record one diagnostics row per macro step.
SimulationResult run_simulation(const SimulationConfig& cfg);

}  // namespace optmix
