#include "optmix/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "optmix/errors.hpp"

namespace optmix {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_diagnostics_csv(std::ostream& os,
                           const std::vector<DiagnosticsRecord>& series) {
  os << "t,mix_norm,mix_norm_normalized,l2,linf,energy,enstrophy,"
        "instantaneous_rate,lower_bound,gamma\n";
  for (const auto& r : series) {
    os << fmt(r.t) << ',' << fmt(r.mix_norm) << ',' << fmt(r.mix_norm_normalized)
       << ',' << fmt(r.l2) << ',' << fmt(r.linf) << ',' << fmt(r.energy) << ','
       << fmt(r.enstrophy) << ',' << fmt(r.instantaneous_rate) << ','
       << fmt(r.lower_bound) << ',' << fmt(r.gamma) << '\n';
  }
}

void write_diagnostics_csv_file(const std::string& path,
                                const std::vector<DiagnosticsRecord>& series) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output file: " + path);
  write_diagnostics_csv(os, series);
}

void write_grid_snapshot(std::ostream& os, const ScalarField& field, double time,
                         const std::string& name) {
  const RectDomain* r = field.domain ? as_rect(*field.domain) : nullptr;
  if (!r) throw ConfigError("grid snapshot requires a rectangle field");
  os << "# optmix grid snapshot\n";
  os << "# field " << name << "\n";
  os << "# time " << fmt(time) << "\n";
  os << "# rect " << fmt(r->x_min) << ' ' << fmt(r->x_max) << ' ' << fmt(r->y_min)
     << ' ' << fmt(r->y_max) << ' ' << r->nx << ' ' << r->ny << ' '
     << (r->periodic() ? "periodic" : "no-flux") << "\n";
  for (int j = 0; j < r->ny; ++j) {
    for (int i = 0; i < r->nx; ++i) {
      if (i) os << ',';
      os << fmt(field.values[static_cast<std::size_t>(j) * r->nx + i]);
    }
    os << '\n';
  }
}

ScalarField read_grid_snapshot(std::istream& is, std::shared_ptr<Domain>& domain,
                               double& time, std::string& name) {
  std::string line;
  if (!std::getline(is, line) || line != "# optmix grid snapshot")
    throw ConfigError("grid snapshot: bad magic line");
  std::string tag, hash;
  if (!std::getline(is, line)) throw ConfigError("grid snapshot: truncated header");
  {
    std::istringstream ls(line);
    ls >> hash >> tag >> name;
    if (hash != "#" || tag != "field") throw ConfigError("grid snapshot: bad field line");
  }
  if (!std::getline(is, line)) throw ConfigError("grid snapshot: truncated header");
  {
    std::istringstream ls(line);
    ls >> hash >> tag >> time;
    if (hash != "#" || tag != "time") throw ConfigError("grid snapshot: bad time line");
  }
  RectDomain r;
  std::string bc;
  if (!std::getline(is, line)) throw ConfigError("grid snapshot: truncated header");
  {
    std::istringstream ls(line);
    ls >> hash >> tag >> r.x_min >> r.x_max >> r.y_min >> r.y_max >> r.nx >> r.ny >> bc;
    if (hash != "#" || tag != "rect") throw ConfigError("grid snapshot: bad rect line");
  }
  r.bc = (bc == "periodic") ? RectBc::Periodic : RectBc::NoFluxEvenExtension;
  domain = std::make_shared<Domain>(r);
  ScalarField f(*domain);
  for (int j = 0; j < r.ny; ++j) {
    if (!std::getline(is, line)) throw ConfigError("grid snapshot: truncated data");
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < r.nx; ++i) {
      if (!std::getline(ls, cell, ','))
        throw ConfigError("grid snapshot: short row " + std::to_string(j));
      f.values[static_cast<std::size_t>(j) * r.nx + i] = std::strtod(cell.c_str(), nullptr);
    }
  }
  return f;
}

void write_vtk_snapshot(std::ostream& os, const ScalarField& field, double time,
                        const std::string& name) {
  const MeshDomain* m = field.domain ? as_mesh(*field.domain) : nullptr;
  if (!m) throw ConfigError("VTK snapshot requires a mesh field");
  os << "# vtk DataFile Version 3.0\n";
  os << "optmix snapshot time=" << fmt(time) << " field=" << name << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m->vertices.size() << " double\n";
  for (const auto& p : m->vertices)
    os << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  os << "CELLS " << m->triangles.size() << ' ' << 4 * m->triangles.size() << "\n";
  for (const auto& t : m->triangles)
    os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  os << "CELL_TYPES " << m->triangles.size() << "\n";
  for (std::size_t t = 0; t < m->triangles.size(); ++t) os << "5\n";
  os << "POINT_DATA " << m->vertices.size() << "\n";
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) os << fmt(v) << "\n";
}

ScalarField read_vtk_snapshot(std::istream& is, std::shared_ptr<Domain>& domain,
                              double& time, std::string& name) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# vtk DataFile", 0) != 0)
    throw ConfigError("VTK snapshot: bad magic line");
  if (!std::getline(is, line)) throw ConfigError("VTK snapshot: missing title");
  {
    time = 0.0;
    name = "theta";
    std::istringstream ls(line);
    std::string word;
    while (ls >> word) {
      if (word.rfind("time=", 0) == 0) time = std::strtod(word.c_str() + 5, nullptr);
      if (word.rfind("field=", 0) == 0) name = word.substr(6);
    }
  }
  std::string tag;
  is >> tag;
  if (tag != "ASCII") throw ConfigError("VTK snapshot: expected ASCII");
  std::string kw1, kw2;
  is >> kw1 >> kw2;
  if (kw1 != "DATASET" || kw2 != "UNSTRUCTURED_GRID")
    throw ConfigError("VTK snapshot: expected DATASET UNSTRUCTURED_GRID");

  MeshDomain mesh;
  std::size_t n = 0;
  is >> tag >> n;
  if (tag != "POINTS") throw ConfigError("VTK snapshot: expected POINTS");
  is >> tag;  // type
  mesh.vertices.resize(n);
  for (auto& p : mesh.vertices) {
    double z;
    if (!(is >> p.x >> p.y >> z)) throw ConfigError("VTK snapshot: truncated points");
  }
  std::size_t ncell = 0, nint = 0;
  is >> tag >> ncell >> nint;
  if (tag != "CELLS") throw ConfigError("VTK snapshot: expected CELLS");
  mesh.triangles.resize(ncell);
  for (auto& t : mesh.triangles) {
    int k;
    if (!(is >> k >> t[0] >> t[1] >> t[2]) || k != 3)
      throw ConfigError("VTK snapshot: only triangle cells supported");
  }
  is >> tag >> ncell;
  if (tag != "CELL_TYPES") throw ConfigError("VTK snapshot: expected CELL_TYPES");
  for (std::size_t t = 0; t < ncell; ++t) {
    int k;
    is >> k;
    if (k != 5) throw ConfigError("VTK snapshot: only VTK_TRIANGLE supported");
  }
  is >> tag >> n;
  if (tag != "POINT_DATA") throw ConfigError("VTK snapshot: expected POINT_DATA");
  is >> tag >> name >> kw1 >> kw2;  // SCALARS name double 1
  is >> tag >> kw1;                 // LOOKUP_TABLE default
  mesh.finalize();
  domain = std::make_shared<Domain>(std::move(mesh));
  ScalarField f(*domain);
  for (auto& v : f.values)
    if (!(is >> v)) throw ConfigError("VTK snapshot: truncated point data");
  return f;
}

std::string write_snapshot_file(const std::string& dir, const ScalarField& field,
                                double time, const std::string& name) {
  std::filesystem::create_directories(dir);
  char stamp[32];
  std::snprintf(stamp, sizeof(stamp), "%.4f", time);
  const bool rect = as_rect(*field.domain) != nullptr;
  const std::string path =
      dir + "/" + name + "_t" + stamp + (rect ? ".csv" : ".vtk");
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open snapshot file: " + path);
  if (rect)
    write_grid_snapshot(os, field, time, name);
  else
    write_vtk_snapshot(os, field, time, name);
  return path;
}

}  // namespace optmix
