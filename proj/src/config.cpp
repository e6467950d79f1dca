#include "optmix/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "optmix/errors.hpp"
#include "optmix/expression.hpp"
#include "optmix/fem.hpp"

namespace optmix {

bool SimulationConfig::uses_mesh() const {
  return !mesh_path.empty() || (shape != "square");
}

double SimulationConfig::resolved_macro_dt() const {
  if (macro_dt > 0.0) return macro_dt;
  return uses_mesh() ? 0.025 : 0.01;
}

void SimulationConfig::validate() const {
  if (mesh_path.empty() && shape != "square" && shape != "circle" &&
      shape != "lshape" && shape != "annulus")
    throw ConfigError("config key 'shape': unsupported value '" + shape + "'");
  if (bc != "no-flux" && bc != "periodic")
    throw ConfigError("config key 'bc': expected no-flux or periodic, got '" + bc + "'");
  if (bc == "periodic" && uses_mesh())
    throw ConfigError("config key 'bc': periodic conditions require a rectangle domain");
  if (resolution < 8) throw ConfigError("config key 'resolution': must be >= 8");
  if (!(cfl > 0.0 && cfl <= 0.9))
    throw ConfigError("config key 'cfl': must be in (0, 0.9]");
  if (!(t_end > 0.0)) throw ConfigError("config key 't_end': must be positive");
  if (macro_dt < 0.0 || (macro_dt > 0.0 && macro_dt > t_end))
    throw ConfigError("config key 'macro_dt': must satisfy 0 < macro_dt <= t_end");
  if (!dealias.empty() && dealias != "two-thirds" && dealias != "half")
    throw ConfigError("config key 'dealias': expected two-thirds or half");
  for (double ts : snapshot_times)
    if (ts < 0.0 || ts > t_end)
      throw ConfigError("config key 'snapshot_times': values must lie in [0, t_end]");
  Expression::parse(resolve_ic_expression(ic));
}

const std::map<std::string, std::string>& ic_presets() {
  static const std::map<std::string, std::string> presets = {
      {"preset_eq31", "0.5*sin(pi*x)+0.25*sin(2*pi*y)"},
      {"preset_even", "cos(2*pi*x)*cos(pi*y)+0.5*cos(2*pi*y)"},
      {"preset_table2_no1", "cos(4*pi*x)+1.357*cos(6*pi*y)"},
      {"preset_table2_no2", "0.566*cos(4*pi*x)+cos(6*pi*y)+cos(2*pi*x)*cos(4*pi*y)"},
      {"preset_table2_no3",
       "0.3*cos(4*pi*x)+cos(6*pi*x)+0.896*cos(6*pi*y)+2*cos(2*pi*x)*cos(4*pi*y)"},
      {"preset_table2_no4", "sin(10*pi*y)+0.2496*(x-0.5)*(x+0.5)"},
      {"preset_table2_no5", "cos(pi*x)+0.3*cos(2*pi*y)"},
      {"preset_table2_no6", "2*cos(pi*x)+0.3*cos(2*pi*y)+0.92*cos(pi*x)*cos(pi*y)"},
      {"preset_table2_no7", "3*cos(pi*x)+0.7*cos(2*pi*y)+cos(pi*x)*cos(pi*y)"},
      {"preset_table2_no8", "x^4+0.273*y*(y-0.4)"},
  };
  return presets;
}

std::string resolve_ic_expression(const std::string& ic) {
  const auto it = ic_presets().find(ic);
  if (it != ic_presets().end()) return it->second;
  if (ic.rfind("preset_", 0) == 0)
    throw ConfigError("unknown initial-condition preset '" + ic + "'");
  return ic;
}

ScalarField evaluate_ic(const std::string& ic, const Domain& domain) {
  const Expression expr = Expression::parse(resolve_ic_expression(ic));
  ScalarField f(domain);
  if (const RectDomain* r = as_rect(domain)) {
    for (int j = 0; j < r->ny; ++j)
      for (int i = 0; i < r->nx; ++i)
        f.values[static_cast<std::size_t>(j) * r->nx + i] = expr.eval(r->x(i), r->y(j));
  } else {
    const MeshDomain& m = *as_mesh(domain);
    for (std::size_t k = 0; k < m.vertices.size(); ++k)
      f.values[k] = expr.eval(m.vertices[k].x, m.vertices[k].y);
  }
  for (double v : f.values)
    if (!std::isfinite(v))
      throw ConfigError("initial condition '" + ic +
                        "' evaluates to a non-finite value");
  const double scale = linf_norm(f);
  ScalarField out = subtract_mean(f);
  if (l2_norm(out) <= 1e-13 * std::max(1.0, scale))
    throw ConfigError("initial condition '" + ic +
                      "' is zero after mean subtraction");
  return out;
}

std::shared_ptr<Domain> make_domain(const SimulationConfig& cfg) {
  if (!cfg.mesh_path.empty())
    return std::make_shared<Domain>(read_mesh_file(cfg.mesh_path));
  if (cfg.shape == "square" ) {
    RectDomain r;
    r.x_min = -1.0;
    r.x_max = 1.0;
    r.y_min = -1.0;
    r.y_max = 1.0;
    r.bc = (cfg.bc == "periodic") ? RectBc::Periodic : RectBc::NoFluxEvenExtension;
    // resolution R means R cells: R+1 no-flux samples, R periodic samples
    r.nx = r.periodic() ? cfg.resolution : cfg.resolution + 1;
    r.ny = r.nx;
    r.validate();
    return std::make_shared<Domain>(r);
  }
  const MeshShape shape = mesh_shape_from_string(cfg.shape);
  double extent = 2.0;
  if (shape == MeshShape::Circle) extent = 4.0 / std::sqrt(std::numbers::pi);
  if (shape == MeshShape::LShape) extent = std::sqrt(5.0);
  if (shape == MeshShape::Annulus) extent = 2.0 * std::sqrt(5.0 / std::numbers::pi);
  const double h = extent / cfg.resolution;
  return std::make_shared<Domain>(generate_mesh(shape, h));
}

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

}  // namespace

SimulationConfig parse_config_string(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::set<std::string> known = {
      "shape",    "mesh",           "resolution", "bc",      "constraint",
      "U",        "inv_tau",        "ic",         "macro_dt", "cfl",
      "t_end",    "snapshot_times", "output_dir", "dealias", "seed"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  SimulationConfig cfg;
  auto note_default = [&cfg](const std::string& line) {
    cfg.provenance.push_back(line);
  };

  if (j.contains("shape")) cfg.shape = j.at("shape").get<std::string>();
  else note_default("shape = square (default)");
  if (j.contains("mesh")) cfg.mesh_path = j.at("mesh").get<std::string>();
  if (j.contains("resolution")) {
    if (!j.at("resolution").is_number_integer()) bad_key("resolution", "must be an integer");
    cfg.resolution = j.at("resolution").get<int>();
  } else {
    cfg.resolution = cfg.uses_mesh() ? 96 : 256;
    note_default("resolution = " + std::to_string(cfg.resolution) + " (default)");
  }
  if (j.contains("bc")) cfg.bc = j.at("bc").get<std::string>();
  else note_default("bc = no-flux (default)");

  std::string kind = "energy";
  if (j.contains("constraint")) kind = j.at("constraint").get<std::string>();
  else note_default("constraint = energy (default)");
  if (kind == "energy") {
    double U = 1.0;
    if (j.contains("U")) {
      if (!j.at("U").is_number()) bad_key("U", "must be a number");
      U = j.at("U").get<double>();
    } else {
      note_default("U = 1 (default)");
    }
    if (!(U > 0.0)) bad_key("U", "must be positive");
    if (j.contains("inv_tau")) bad_key("inv_tau", "not valid for the energy constraint");
    cfg.constraint = Constraint::energy(U);
  } else if (kind == "enstrophy") {
    double inv_tau = 15.0;
    if (j.contains("inv_tau")) {
      if (!j.at("inv_tau").is_number()) bad_key("inv_tau", "must be a number");
      inv_tau = j.at("inv_tau").get<double>();
    } else {
      note_default("inv_tau = 15 (default)");
    }
    if (!(inv_tau > 0.0)) bad_key("inv_tau", "must be positive");
    if (j.contains("U")) bad_key("U", "not valid for the enstrophy constraint");
    cfg.constraint = Constraint::enstrophy(inv_tau);
  } else {
    bad_key("constraint", "expected energy or enstrophy, got '" + kind + "'");
  }

  if (j.contains("ic")) cfg.ic = j.at("ic").get<std::string>();
  else note_default("ic = preset_eq31 (default)");
  if (j.contains("macro_dt")) {
    if (!j.at("macro_dt").is_number()) bad_key("macro_dt", "must be a number");
    cfg.macro_dt = j.at("macro_dt").get<double>();
    if (!(cfg.macro_dt > 0.0)) bad_key("macro_dt", "must be positive");
  } else {
    std::ostringstream os;
    os << "macro_dt = " << cfg.resolved_macro_dt() << " (default for "
       << (cfg.uses_mesh() ? "FEM" : "spectral") << " backend)";
    note_default(os.str());
  }
  if (j.contains("cfl")) {
    if (!j.at("cfl").is_number()) bad_key("cfl", "must be a number");
    cfg.cfl = j.at("cfl").get<double>();
  } else {
    note_default("cfl = 0.5 (default)");
  }
  if (j.contains("t_end")) {
    if (!j.at("t_end").is_number()) bad_key("t_end", "must be a number");
    cfg.t_end = j.at("t_end").get<double>();
  } else {
    note_default("t_end = 1 (default)");
  }
  if (j.contains("snapshot_times")) {
    if (!j.at("snapshot_times").is_array()) bad_key("snapshot_times", "must be an array");
    for (const auto& e : j.at("snapshot_times")) {
      if (!e.is_number()) bad_key("snapshot_times", "entries must be numbers");
      cfg.snapshot_times.push_back(e.get<double>());
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("dealias")) cfg.dealias = j.at("dealias").get<std::string>();
  else note_default(std::string("dealias = ") +
                    (cfg.constraint.kind == Constraint::Kind::Enstrophy
                         ? "two-thirds" : "half") +
                    " (default bound to constraint)");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) bad_key("seed", "must be an integer");
    cfg.seed = j.at("seed").get<unsigned long>();
  }

  cfg.validate();
  return cfg;
}

SimulationConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace optmix
