#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "optmix/config.hpp"
#include "optmix/diagnostics.hpp"
#include "optmix/errors.hpp"
#include "optmix/fem.hpp"
#include "optmix/io.hpp"
#include "optmix/timestepper.hpp"
#include "optmix/validate.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitValidation = 4;

using namespace optmix;

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::string shape;
  int resolution = 0;
  std::string mesh_path;
  std::string constraint;
  double U = 0.0;
  double inv_tau = 0.0;
  std::string bc;
  double t_end = 0.0;
  double macro_dt = 0.0;
  std::string ic;
  std::vector<double> snapshot_times;
};

void add_common_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file");
  cmd->add_option("--output", a.output_dir, "output directory");
  cmd->add_option("--shape", a.shape, "square|circle|lshape|annulus");
  cmd->add_option("--resolution", a.resolution, "grid cells per axis / mesh fineness");
  cmd->add_option("--mesh", a.mesh_path, "mesh file (text format)");
  cmd->add_option("--constraint", a.constraint, "energy|enstrophy");
  cmd->add_option("--U", a.U, "rms velocity (energy constraint)");
  cmd->add_option("--inv-tau", a.inv_tau, "rate of strain (enstrophy constraint)");
  cmd->add_option("--bc", a.bc, "no-flux|periodic");
  cmd->add_option("--t-end", a.t_end, "final time");
  cmd->add_option("--macro-dt", a.macro_dt, "optimal-flow refresh interval");
  cmd->add_option("--ic", a.ic, "initial condition preset or expression");
  cmd->add_option("--snapshot-times", a.snapshot_times, "snapshot times");
}

SimulationConfig build_config(const CommonArgs& a) {
  SimulationConfig cfg;
  if (!a.config_path.empty()) cfg = parse_config_file(a.config_path);
  if (!a.shape.empty()) cfg.shape = a.shape;
  if (!a.mesh_path.empty()) cfg.mesh_path = a.mesh_path;
  if (a.resolution > 0) cfg.resolution = a.resolution;
  if (!a.bc.empty()) cfg.bc = a.bc;
  if (!a.constraint.empty()) {
    if (a.constraint == "energy")
      cfg.constraint = Constraint::energy(a.U > 0.0 ? a.U : 1.0);
    else if (a.constraint == "enstrophy")
      cfg.constraint = Constraint::enstrophy(a.inv_tau > 0.0 ? a.inv_tau : 15.0);
    else
      throw ConfigError("--constraint: expected energy or enstrophy");
  } else {
    if (a.U > 0.0) cfg.constraint = Constraint::energy(a.U);
    if (a.inv_tau > 0.0) cfg.constraint = Constraint::enstrophy(a.inv_tau);
  }
  if (!a.ic.empty()) cfg.ic = a.ic;
  if (a.t_end > 0.0) cfg.t_end = a.t_end;
  if (a.macro_dt > 0.0) cfg.macro_dt = a.macro_dt;
  if (!a.snapshot_times.empty()) cfg.snapshot_times = a.snapshot_times;
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const CommonArgs& args) {
  const SimulationConfig cfg = build_config(args);
  for (const auto& line : cfg.provenance) std::cout << "[default] " << line << "\n";
  const SimulationResult res = run_simulation(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string csv_path = cfg.output_dir + "/diagnostics.csv";
  write_diagnostics_csv_file(csv_path, res.series);
  for (const auto& [t, field] : res.snapshots)
    std::cout << "snapshot: " << write_snapshot_file(cfg.output_dir, field, t, "theta")
              << "\n";
  const auto& last = res.series.back();
  std::cout << "wrote " << csv_path << "\n";
  std::printf("final t=%g mix_norm=%.6g normalized=%.6g\n", last.t, last.mix_norm,
              last.mix_norm_normalized);
  return 0;
}

int cmd_eigen(const CommonArgs& args) {
  std::shared_ptr<Domain> domain;
  if (!args.mesh_path.empty()) {
    domain = std::make_shared<Domain>(read_mesh_file(args.mesh_path));
  } else {
    SimulationConfig cfg;
    cfg.shape = args.shape.empty() ? "square" : args.shape;
    cfg.resolution = args.resolution > 0 ? args.resolution : 96;
    if (cfg.shape == "square") {
      // eigen solves are a FEM feature; mesh the square too
      const double h = 2.0 / cfg.resolution;
      domain = std::make_shared<Domain>(generate_mesh(MeshShape::Square, h));
    } else {
      domain = make_domain(cfg);
    }
  }
  FemOperators ops(*domain);
  const EigenPair pair = ops.smallest_nonzero_eigenvalue();
  const MeshDomain& m = *as_mesh(*domain);
  std::printf("vertices %zu triangles %zu area %.6f\n", m.vertices.size(),
              m.triangles.size(), m.area);
  std::printf("lambda1 %.6f\n", pair.lambda1);
  return 0;
}

int cmd_norms(const CommonArgs& args) {
  SimulationConfig cfg = build_config(args);
  std::shared_ptr<Domain> domain = make_domain(cfg);
  const ScalarField theta = evaluate_ic(cfg.ic, *domain);
  double mix;
  if (as_rect(*domain)) {
    SpectralWorkspace ws(*domain);
    mix = mix_norm(theta, ws);
  } else {
    FemOperators ops(*domain);
    mix = mix_norm(theta, ops);
  }
  const double l2 = l2_norm(theta);
  std::printf("mix_norm %.8g\n", mix);
  std::printf("l2 %.8g\n", l2);
  std::printf("linf %.8g\n", linf_norm(theta));
  std::printf("l0 %.8g\n", mix / l2);
  return 0;
}

int cmd_validate(bool quiet, unsigned seed) {
  const std::vector<CheckResult> checks = run_validation_suite(seed, false);
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    if (!quiet || !c.passed)
      std::printf("%-44s %s  (%s)\n", c.name.c_str(), c.passed ? "ok" : "FAIL",
                  c.detail.c_str());
  }
  if (!all) {
    std::fprintf(stderr, "validation failed\n");
    return kExitValidation;
  }
  std::printf("all %zu checks passed\n", checks.size());
  return 0;
}

int cmd_compare_bc(const CommonArgs& args) {
  SimulationConfig base = build_config(args);
  if (base.uses_mesh())
    throw ConfigError("compare-bc requires a rectangle domain");
  SimulationConfig periodic = base, noflux = base;
  periodic.bc = "periodic";
  noflux.bc = "no-flux";
  const SimulationResult rp = run_simulation(periodic);
  const SimulationResult rn = run_simulation(noflux);
  const BcComparison cmp = compare_bc_series(rp.series, rn.series);
  std::filesystem::create_directories(base.output_dir);
  write_diagnostics_csv_file(base.output_dir + "/diagnostics_periodic.csv", rp.series);
  write_diagnostics_csv_file(base.output_dir + "/diagnostics_noflux.csv", rn.series);
  std::printf("rows %zu\n", cmp.times.size());
  std::printf("max_rel_mix_diff %.6g\n", cmp.max_rel_diff);
  std::printf("final_periodic_minus_noflux %.6g\n", cmp.final_periodic_minus_noflux);
  std::printf("faster_final_decay %s\n",
              cmp.final_periodic_minus_noflux < 0.0 ? "periodic" : "no-flux");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-in-time optimal stirring of a passive scalar"};
  app.require_subcommand(1);

  CommonArgs sim_args, eig_args, norm_args, cmp_args;
  bool validate_quiet = false;

  CLI::App* sim = app.add_subcommand("simulate", "run a stirring simulation");
  add_common_flags(sim, sim_args);
  CLI::App* eig = app.add_subcommand("eigen", "smallest nonzero Neumann eigenvalue");
  add_common_flags(eig, eig_args);
  CLI::App* nrm = app.add_subcommand("norms", "norms and length scale of an IC");
  add_common_flags(nrm, norm_args);
  CLI::App* val = app.add_subcommand("validate", "run the property suite");
  unsigned validate_seed = 1234;
  val->add_flag("--quiet", validate_quiet, "print failures only");
  val->add_option("--seed", validate_seed, "seed for the randomized checks");
  CLI::App* cbc = app.add_subcommand("compare-bc", "paired periodic/no-flux runs");
  add_common_flags(cbc, cmp_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (eig->parsed()) return cmd_eigen(eig_args);
    if (nrm->parsed()) return cmd_norms(norm_args);
    if (val->parsed()) return cmd_validate(validate_quiet, validate_seed);
    if (cbc->parsed()) return cmd_compare_bc(cmp_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericsError& e) {
    std::fprintf(stderr, "numerics error: %s\n", e.what());
    return kExitNumerics;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
