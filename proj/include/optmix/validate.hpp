#pragma once

#include <random>
#include <string>
#include <vector>

#include "optmix/fields.hpp"
#include "optmix/spectral.hpp"

namespace optmix {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Random band-limited scalar on a no-flux rectangle: low cosine modes with
/// coefficients in [-1, 1], mean-zero.
ScalarField random_neumann_scalar(const Domain& dom, std::mt19937& rng,
                                  int max_mode = 6);
/// Random band-limited scalar on a periodic rectangle (full Fourier modes).
ScalarField random_periodic_scalar(const Domain& dom, std::mt19937& rng,
                                   int max_mode = 6);
/// Divergence-free, no-flux velocity from a random sine-sine streamfunction.
VectorField random_streamfunction_velocity(const Domain& dom, std::mt19937& rng,
                                           int max_mode = 5);
/// Arbitrary smooth velocity (componentwise random cosine modes).
VectorField random_smooth_velocity(const Domain& dom, std::mt19937& rng,
                                   int max_mode = 6);

/// The property battery behind `optmix validate`: projector orthogonality,
/// even-extension commutation, norm equivalence, constraint satisfaction,
/// decay-rate identity, flow equivariances, and bound monotonicity on a
/// short reference run.
std::vector<CheckResult> run_validation_suite(unsigned seed = 1234,
                                              bool verbose = false);

}  // namespace optmix
