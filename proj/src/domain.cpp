#include "optmix/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "optmix/errors.hpp"

namespace optmix {

void RectDomain::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min))
    throw ConfigError("rectangle bounds must satisfy x_max > x_min, y_max > y_min");
  if (nx < 8 || ny < 8)
    throw ConfigError("grid counts nx, ny must be >= 8");
}

bool operator==(const RectDomain& a, const RectDomain& b) {
  return a.x_min == b.x_min && a.x_max == b.x_max && a.y_min == b.y_min &&
         a.y_max == b.y_max && a.nx == b.nx && a.ny == b.ny && a.bc == b.bc;
}

double MeshDomain::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Vec2& p0 = vertices[tri[0]];
  const Vec2& p1 = vertices[tri[1]];
  const Vec2& p2 = vertices[tri[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

void MeshDomain::finalize() {
  area = 0.0;
  min_edge_length = std::numeric_limits<double>::max();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const double a = triangle_area(static_cast<int>(t));
    if (a < 1e-14)
      throw NumericsError("degenerate or inverted triangle " + std::to_string(t) +
                          " (area " + std::to_string(a) + ")");
    area += a;
    const auto& tri = triangles[t];
    for (int e = 0; e < 3; ++e) {
      const Vec2& p = vertices[tri[e]];
      const Vec2& q = vertices[tri[(e + 1) % 3]];
      min_edge_length = std::min(min_edge_length, std::hypot(q.x - p.x, q.y - p.y));
    }
  }

  // Boundary edges are those referenced by exactly one triangle. Conformity:
  // no edge may be referenced more than twice.
  std::map<std::pair<int, int>, std::pair<int, int>> edge_count;  // -> (count, oriented a)
  for (const auto& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_count.find(key);
      if (it == edge_count.end())
        edge_count[key] = {1, a};
      else
        it->second.first += 1;
    }
  }
  boundary_edges.clear();
  for (const auto& [key, info] : edge_count) {
    if (info.first > 2)
      throw NumericsError("non-conforming mesh: edge shared by more than two triangles");
    if (info.first == 1) {
      BoundaryEdge be;
      be.a = info.second;
      be.b = (key.first == be.a) ? key.second : key.first;
      const Vec2& p = vertices[be.a];
      const Vec2& q = vertices[be.b];
      const double dx = q.x - p.x;
      const double dy = q.y - p.y;
      const double len = std::hypot(dx, dy);
      be.normal = Vec2{dy / len, -dx / len};  // CCW triangle => outward is right of a->b
      boundary_edges.push_back(be);
    }
  }
  // Closure check: each boundary vertex must have exactly one outgoing and
  // one incoming boundary edge.
  std::map<int, int> out_deg, in_deg;
  for (const auto& be : boundary_edges) {
    out_deg[be.a] += 1;
    in_deg[be.b] += 1;
  }
  for (const auto& [v, d] : out_deg)
    if (d != 1 || in_deg[v] != 1)
      throw NumericsError("boundary edges do not form closed loops at vertex " +
                          std::to_string(v));
}

int MeshDomain::boundary_loop_count() const {
  std::map<int, int> next;
  for (const auto& be : boundary_edges) next[be.a] = be.b;
  std::set<int> seen;
  int loops = 0;
  for (const auto& [start, first] : next) {
    if (seen.count(start)) continue;
    ++loops;
    int v = start;
    do {
      seen.insert(v);
      v = next.at(v);
    } while (v != start);
  }
  return loops;
}

double domain_area(const Domain& d) {
  if (const auto* r = std::get_if<RectDomain>(&d)) return r->area();
  return std::get<MeshDomain>(d).area;
}

std::size_t domain_dofs(const Domain& d) {
  if (const auto* r = std::get_if<RectDomain>(&d)) return r->dof_count();
  return std::get<MeshDomain>(d).dof_count();
}

const RectDomain* as_rect(const Domain& d) { return std::get_if<RectDomain>(&d); }
const MeshDomain* as_mesh(const Domain& d) { return std::get_if<MeshDomain>(&d); }

bool domains_compatible(const Domain* a, const Domain* b) {
  if (a == b && a != nullptr) return true;
  if (a == nullptr || b == nullptr) return false;
  const RectDomain* ra = as_rect(*a);
  const RectDomain* rb = as_rect(*b);
  return ra && rb && *ra == *rb;
}

}  // namespace optmix
