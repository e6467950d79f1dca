#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace optmix {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class RectBc { NoFluxEvenExtension, Periodic };

/// Axis-aligned rectangle with a uniform tensor grid.
///
/// For the no-flux (even extension) condition the grid includes both
/// endpoints per axis, so the spacing is L/(n-1) and the doubled transform
/// grid has 2(n-1) samples per axis (the duplicated reflection line is
/// dropped). For periodic conditions the right/top endpoints are excluded
/// and the spacing is L/n.
struct RectDomain {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int nx = 0, ny = 0;
  RectBc bc = RectBc::NoFluxEvenExtension;

  double lx() const { return x_max - x_min; }
  double ly() const { return y_max - y_min; }
  double area() const { return lx() * ly(); }
  bool periodic() const { return bc == RectBc::Periodic; }
  double hx() const { return periodic() ? lx() / nx : lx() / (nx - 1); }
  double hy() const { return periodic() ? ly() / ny : ly() / (ny - 1); }
  double x(int i) const { return x_min + i * hx(); }
  double y(int j) const { return y_min + j * hy(); }
  std::size_t dof_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }

  /// Throws ConfigError when bounds or grid counts are inadmissible.
  void validate() const;
};

bool operator==(const RectDomain& a, const RectDomain& b);

struct BoundaryEdge {
  int a = 0, b = 0;  // vertex indices, oriented so the domain lies on the left
  Vec2 normal;       // outward unit normal
};

/// Conforming triangulation with tagged boundary.
struct MeshDomain {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW vertex triples
  std::vector<BoundaryEdge> boundary_edges;

  double area = 0.0;            // sum of triangle areas
  double min_edge_length = 0.0;

  std::size_t dof_count() const { return vertices.size(); }
  double triangle_area(int t) const;

  /// Recomputes derived data (area, min edge, boundary normals) and checks
  /// orientation, conformity and boundary-loop closure.
  void finalize();
  int boundary_loop_count() const;
};

using Domain = std::variant<RectDomain, MeshDomain>;

double domain_area(const Domain& d);
std::size_t domain_dofs(const Domain& d);
const RectDomain* as_rect(const Domain& d);
const MeshDomain* as_mesh(const Domain& d);

/// True when fields on the two domain objects may be combined: identical
/// object, or value-equal rectangles. Meshes compare by identity only.
bool domains_compatible(const Domain* a, const Domain* b);

}  // namespace optmix
