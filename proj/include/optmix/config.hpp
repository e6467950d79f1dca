#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "optmix/fields.hpp"

namespace optmix {

/// Fully resolved run description. Defaults applied during parsing are
/// echoed in `provenance`.
struct SimulationConfig {
  std::string shape = "square";  // square | circle | lshape | annulus
  std::string mesh_path;         // overrides shape when set
  int resolution = 256;
  std::string bc = "no-flux";  // no-flux | periodic (rectangles only)
  Constraint constraint = Constraint::energy(1.0);
  std::string ic = "preset_eq31";
  double macro_dt = 0.0;  // 0 = backend default (0.01 spectral, 0.025 FEM)
  double cfl = 0.5;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  std::string output_dir = "out";
  std::string dealias;  // "" = bound to constraint, else two-thirds | half
  unsigned long seed = 0;
  std::vector<std::string> provenance;

  /// True when the run uses the FEM backend (mesh file or curved shape).
  bool uses_mesh() const;
  double resolved_macro_dt() const;
  void validate() const;
};

SimulationConfig parse_config_string(const std::string& json_text);
SimulationConfig parse_config_file(const std::string& path);

/// Named initial conditions from the benchmark tables.
const std::map<std::string, std::string>& ic_presets();
/// Preset id -> expression source; other strings pass through unchanged.
std::string resolve_ic_expression(const std::string& ic);

/// Samples the initial condition at the domain dofs and subtracts the mean.
/// Errors when the expression is invalid, evaluates to non-finite values, or
/// is zero after mean subtraction.
ScalarField evaluate_ic(const std::string& ic, const Domain& domain);

/// Builds the domain described by the config (grid counts per bc convention,
/// structured mesh, or mesh file).
std::shared_ptr<Domain> make_domain(const SimulationConfig& cfg);

}  // namespace optmix
