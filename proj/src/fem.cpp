#include "optmix/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "optmix/errors.hpp"

namespace optmix {

// ---------------------------------------------------------------------------
// Sparse algebra
// ---------------------------------------------------------------------------

void SparseOperator::multiply(const double* x, double* y) const {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int s = row_offsets[i]; s < row_offsets[i + 1]; ++s)
      acc += values[s] * x[col_indices[s]];
    y[i] = acc;
  }
}

std::vector<double> SparseOperator::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int s = row_offsets[i]; s < row_offsets[i + 1]; ++s)
      if (col_indices[s] == i) d[i] = values[s];
  return d;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void remove_mean(std::vector<double>& v) {
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(v.size());
  for (double& x : v) x -= mu;
}

}  // namespace

CgResult conjugate_gradient(const SparseOperator& A, const std::vector<double>& b,
                            std::vector<double>& x, double rel_tol, int max_iter,
                            bool deflate_constants) {
  const int n = A.n;
  x.assign(n, 0.0);
  std::vector<double> r = b;
  if (deflate_constants) remove_mean(r);
  const double bnorm = std::sqrt(dot(r, r));
  if (bnorm == 0.0) return {0, 0.0};

  const std::vector<double> diag = A.diagonal();
  std::vector<double> z(n), p(n), Ap(n);
  auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (int i = 0; i < n; ++i) zz[i] = rr[i] / diag[i];
    if (deflate_constants) remove_mean(zz);
  };

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p.data(), Ap.data());
    const double pAp = dot(p, Ap);
    if (pAp <= 0.0)
      throw NumericsError("CG breakdown: operator not positive definite on subspace");
    const double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (deflate_constants && (it % 16 == 0)) remove_mean(r);
    const double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= rel_tol * bnorm) {
      if (deflate_constants) remove_mean(x);
      return {it, rnorm / bnorm};
    }
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::vector<double> res(n);
  A.multiply(x.data(), res.data());
  double rn = 0.0;
  for (int i = 0; i < n; ++i) rn += (res[i] - b[i]) * (res[i] - b[i]);
  throw NumericsError("CG failed to converge in " + std::to_string(max_iter) +
                      " iterations (relative residual " +
                      std::to_string(std::sqrt(rn) / bnorm) + ")");
}

// ---------------------------------------------------------------------------
// P1 assembly
// ---------------------------------------------------------------------------

void p1_element_matrices(const Vec2& a, const Vec2& b, const Vec2& c,
                         double K_elem[3][3], double M_elem[3][3]) {
  const double area =
      0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  const double bb[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
  const double cc[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      K_elem[i][j] = (bb[i] * bb[j] + cc[i] * cc[j]) / (4.0 * area);
      M_elem[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
}

namespace {

struct CsrBuilder {
  int n;
  std::vector<std::vector<int>> adj;

  explicit CsrBuilder(const MeshDomain& mesh) : n(static_cast<int>(mesh.vertices.size())) {
    adj.resize(n);
    for (const auto& tri : mesh.triangles)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) adj[tri[a]].push_back(tri[b]);
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }

  SparseOperator empty() const {
    SparseOperator A;
    A.n = n;
    A.row_offsets.resize(n + 1, 0);
    for (int i = 0; i < n; ++i)
      A.row_offsets[i + 1] = A.row_offsets[i] + static_cast<int>(adj[i].size());
    A.col_indices.reserve(A.row_offsets[n]);
    for (int i = 0; i < n; ++i)
      A.col_indices.insert(A.col_indices.end(), adj[i].begin(), adj[i].end());
    A.values.assign(A.row_offsets[n], 0.0);
    return A;
  }
};

void add_entry(SparseOperator& A, int i, int j, double v) {
  const auto begin = A.col_indices.begin() + A.row_offsets[i];
  const auto end = A.col_indices.begin() + A.row_offsets[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  A.values[static_cast<std::size_t>(it - A.col_indices.begin())] += v;
}

}  // namespace

FemOperators::FemOperators(const Domain& dom) : dom_(&dom) {
  const MeshDomain* m = as_mesh(dom);
  if (!m) throw ConfigError("FEM operators require a mesh domain");
  const CsrBuilder builder(*m);
  K_ = builder.empty();
  M_ = builder.empty();
  double K_elem[3][3], M_elem[3][3];
  for (std::size_t t = 0; t < m->triangles.size(); ++t) {
    const auto& tri = m->triangles[t];
    const double area = m->triangle_area(static_cast<int>(t));
    if (area < 1e-14)
      throw NumericsError("degenerate triangle " + std::to_string(t) +
                          " in FEM assembly");
    p1_element_matrices(m->vertices[tri[0]], m->vertices[tri[1]],
                        m->vertices[tri[2]], K_elem, M_elem);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        add_entry(K_, tri[a], tri[b], K_elem[a][b]);
        add_entry(M_, tri[a], tri[b], M_elem[a][b]);
      }
  }
  k_diag_ = K_.diagonal();
  m_diag_ = M_.diagonal();
}

const MeshDomain& FemOperators::mesh() const { return *as_mesh(*dom_); }

ScalarField FemOperators::solve_neumann(const ScalarField& theta, double rel_tol) {
  if (!domains_compatible(theta.domain, dom_))
    throw NumericsError("solve_neumann: field on wrong domain");
  ScalarField rhs_field = subtract_mean(theta);
  const int n = K_.n;
  std::vector<double> mtheta(n);
  M_.multiply(rhs_field.values.data(), mtheta.data());
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = -mtheta[i];
  ScalarField phi(*dom_);
  conjugate_gradient(K_, b, phi.values, rel_tol, 50000, true);
  // mean-zero gauge in the L2 sense
  const double mu = phi.mean();
  for (double& v : phi.values) v -= mu;
  return phi;
}

VectorField FemOperators::recover_gradient(const ScalarField& f, double rel_tol) {
  const MeshDomain& m = mesh();
  const int n = K_.n;
  std::vector<double> bx(n, 0.0), by(n, 0.0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2& p0 = m.vertices[tri[0]];
    const Vec2& p1 = m.vertices[tri[1]];
    const Vec2& p2 = m.vertices[tri[2]];
    const double area = m.triangle_area(static_cast<int>(t));
    const double bb[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double cc[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    double gx = 0.0, gy = 0.0;
    for (int a = 0; a < 3; ++a) {
      gx += f.values[tri[a]] * bb[a] / (2.0 * area);
      gy += f.values[tri[a]] * cc[a] / (2.0 * area);
    }
    for (int a = 0; a < 3; ++a) {
      bx[tri[a]] += gx * area / 3.0;
      by[tri[a]] += gy * area / 3.0;
    }
  }
  VectorField g(*dom_);
  conjugate_gradient(M_, bx, g.u, rel_tol, 20000, false);
  conjugate_gradient(M_, by, g.v, rel_tol, 20000, false);
  return g;
}

std::vector<double> FemOperators::weak_divergence(const VectorField& v) const {
  const MeshDomain& m = mesh();
  std::vector<double> b(K_.n, 0.0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2& p0 = m.vertices[tri[0]];
    const Vec2& p1 = m.vertices[tri[1]];
    const Vec2& p2 = m.vertices[tri[2]];
    const double area = m.triangle_area(static_cast<int>(t));
    const double bb[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double cc[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    const double vx = (v.u[tri[0]] + v.u[tri[1]] + v.u[tri[2]]) / 3.0;
    const double vy = (v.v[tri[0]] + v.v[tri[1]] + v.v[tri[2]]) / 3.0;
    for (int a = 0; a < 3; ++a)
      b[tri[a]] += area * (vx * bb[a] / (2.0 * area) + vy * cc[a] / (2.0 * area));
  }
  return b;
}

VectorField FemOperators::leray_project(const VectorField& v, double rel_tol) {
  if (!domains_compatible(v.domain, dom_))
    throw NumericsError("leray_project: field on wrong domain");
  std::vector<double> b = weak_divergence(v);
  remove_mean(b);
  std::vector<double> p;
  const CgResult cg = conjugate_gradient(K_, b, p, rel_tol, 50000, true);
  last_proj_residual_ = cg.rel_residual;
  ScalarField pf(*dom_);
  pf.values = p;
  const VectorField gp = recover_gradient(pf, rel_tol);
  VectorField out(*dom_);
  for (int i = 0; i < K_.n; ++i) {
    out.u[i] = v.u[i] - gp.u[i];
    out.v[i] = v.v[i] - gp.v[i];
  }
  return out;
}

EigenPair FemOperators::smallest_nonzero_eigenvalue(double eig_rel_tol,
                                                    int max_outer) {
  const int n = K_.n;
  std::vector<double> ones(n, 1.0);
  std::vector<double> m_ones(n);
  M_.multiply(ones.data(), m_ones.data());
  const double vol = dot(ones, m_ones);

  auto m_deflate = [&](std::vector<double>& x) {
    const double c = dot(x, m_ones) / vol;
    for (int i = 0; i < n; ++i) x[i] -= c;
  };

  // deterministic generic start vector
  std::vector<double> x(n);
  unsigned long long s = 88172645463325252ull;
  for (int i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x[i] = static_cast<double>(s % 1000003) / 1000003.0 - 0.5;
  }
  m_deflate(x);

  std::vector<double> mx(n), kx(n), y;
  double lambda = 0.0;
  for (int outer = 1; outer <= max_outer; ++outer) {
    M_.multiply(x.data(), mx.data());
    conjugate_gradient(K_, mx, y, 1e-12, 50000, true);
    m_deflate(y);
    M_.multiply(y.data(), mx.data());
    const double norm = std::sqrt(dot(y, mx));
    if (norm == 0.0) throw NumericsError("eigen iteration produced a zero vector");
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;

    M_.multiply(x.data(), mx.data());
    K_.multiply(x.data(), kx.data());
    lambda = dot(x, kx);  // x is M-normalized
    double resid = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = kx[i] - lambda * mx[i];
      resid += r * r;
      scale += lambda * mx[i] * lambda * mx[i];
    }
    if (std::sqrt(resid) <= eig_rel_tol * std::sqrt(scale)) {
      EigenPair pair;
      pair.lambda1 = lambda;
      pair.mode = ScalarField(*dom_);
      pair.mode.values = x;
      return pair;
    }
  }
  throw NumericsError("inverse power iteration stagnated after " +
                      std::to_string(max_outer) + " iterations (lambda ~ " +
                      std::to_string(lambda) + ")");
}

double FemOperators::gradient_l2_norm(const ScalarField& phi) const {
  std::vector<double> kphi(K_.n);
  K_.multiply(phi.values.data(), kphi.data());
  const double q = dot(phi.values, kphi);
  return std::sqrt(std::max(0.0, q) / domain_area(*dom_));
}

double FemOperators::enstrophy(const VectorField& v) const {
  std::vector<double> tmp(K_.n);
  K_.multiply(v.u.data(), tmp.data());
  double acc = dot(v.u, tmp);
  K_.multiply(v.v.data(), tmp.data());
  acc += dot(v.v, tmp);
  return std::max(0.0, acc);
}

void FemOperators::velocity_gradients(const VectorField& v, VectorField& grad_u,
                                      VectorField& grad_v, double rel_tol) {
  ScalarField comp(*dom_);
  comp.values = v.u;
  grad_u = recover_gradient(comp, rel_tol);
  comp.values = v.v;
  grad_v = recover_gradient(comp, rel_tol);
}

// ---------------------------------------------------------------------------
// Point location and semi-Lagrangian transport
// ---------------------------------------------------------------------------

struct FemOperators::Locator {
  const MeshDomain* mesh = nullptr;
  double x0 = 0, y0 = 0, cell = 1;
  int ncx = 1, ncy = 1;
  std::vector<std::vector<int>> cells;            // triangle candidates per cell
  std::vector<int> edge_triangle;                 // owning triangle per boundary edge

  explicit Locator(const MeshDomain& m) : mesh(&m) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : m.vertices) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const double avg_area = m.area / static_cast<double>(m.triangles.size());
    cell = 2.0 * std::sqrt(avg_area);
    x0 = xmin;
    y0 = ymin;
    ncx = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / cell)));
    ncy = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / cell)));
    cells.resize(static_cast<std::size_t>(ncx) * ncy);
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const auto& tri = m.triangles[t];
      double txmin = 1e300, txmax = -1e300, tymin = 1e300, tymax = -1e300;
      for (int a = 0; a < 3; ++a) {
        const Vec2& p = m.vertices[tri[a]];
        txmin = std::min(txmin, p.x);
        txmax = std::max(txmax, p.x);
        tymin = std::min(tymin, p.y);
        tymax = std::max(tymax, p.y);
      }
      const int i0 = clampi(static_cast<int>((txmin - x0) / cell), ncx);
      const int i1 = clampi(static_cast<int>((txmax - x0) / cell), ncx);
      const int j0 = clampi(static_cast<int>((tymin - y0) / cell), ncy);
      const int j1 = clampi(static_cast<int>((tymax - y0) / cell), ncy);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          cells[static_cast<std::size_t>(j) * ncx + i].push_back(static_cast<int>(t));
    }
    // boundary edge -> a triangle containing both endpoints
    std::map<std::pair<int, int>, int> edge_owner;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const auto& tri = m.triangles[t];
      for (int e = 0; e < 3; ++e) {
        auto key = std::minmax(tri[e], tri[(e + 1) % 3]);
        edge_owner[key] = static_cast<int>(t);
      }
    }
    edge_triangle.resize(m.boundary_edges.size());
    for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
      auto key = std::minmax(m.boundary_edges[e].a, m.boundary_edges[e].b);
      edge_triangle[e] = edge_owner.at(key);
    }
  }

  static int clampi(int v, int n) { return std::max(0, std::min(n - 1, v)); }

  const std::vector<int>& candidates(double x, double y) const {
    const int i = clampi(static_cast<int>((x - x0) / cell), ncx);
    const int j = clampi(static_cast<int>((y - y0) / cell), ncy);
    return cells[static_cast<std::size_t>(j) * ncx + i];
  }
};

void FemOperators::ensure_locator() {
  if (!locator_) locator_ = std::make_shared<Locator>(mesh());
}

namespace {

bool barycentric(const MeshDomain& m, int t, double x, double y, double bary[3],
                 double tol) {
  const auto& tri = m.triangles[t];
  const Vec2& a = m.vertices[tri[0]];
  const Vec2& b = m.vertices[tri[1]];
  const Vec2& c = m.vertices[tri[2]];
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  bary[1] = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
  bary[2] = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
  bary[0] = 1.0 - bary[1] - bary[2];
  return bary[0] >= -tol && bary[1] >= -tol && bary[2] >= -tol;
}

void clamp_bary(double bary[3]) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    bary[i] = std::max(0.0, bary[i]);
    sum += bary[i];
  }
  for (int i = 0; i < 3; ++i) bary[i] /= sum;
}

}  // namespace

bool FemOperators::locate(double x, double y, int& tri, double bary[3]) const {
  const MeshDomain& m = mesh();
  for (int t : locator_->candidates(x, y))
    if (barycentric(m, t, x, y, bary, 1e-12)) {
      tri = t;
      return true;
    }
  // retry with a looser tolerance to absorb roundoff on shared edges
  for (int t : locator_->candidates(x, y))
    if (barycentric(m, t, x, y, bary, 1e-9)) {
      tri = t;
      return true;
    }
  return false;
}

Vec2 FemOperators::project_to_boundary(double x, double y) const {
  const MeshDomain& m = mesh();
  double best = 1e300;
  Vec2 bp{x, y};
  for (const auto& be : m.boundary_edges) {
    const Vec2& p = m.vertices[be.a];
    const Vec2& q = m.vertices[be.b];
    const double dx = q.x - p.x, dy = q.y - p.y;
    const double len2 = dx * dx + dy * dy;
    double s = ((x - p.x) * dx + (y - p.y) * dy) / len2;
    s = std::max(0.0, std::min(1.0, s));
    const double cx = p.x + s * dx, cy = p.y + s * dy;
    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    if (d2 < best) {
      best = d2;
      bp = Vec2{cx, cy};
    }
  }
  return bp;
}

void FemOperators::interpolate_velocity(const VectorField& u, double x, double y,
                                        double& ux, double& uy) const {
  const MeshDomain& m = mesh();
  int t;
  double bary[3];
  if (!locate(x, y, t, bary)) {
    const Vec2 bp = project_to_boundary(x, y);
    if (!locate(bp.x, bp.y, t, bary))
      throw NumericsError("point location failed at (" + std::to_string(x) + ", " +
                          std::to_string(y) + ")");
  }
  clamp_bary(bary);
  const auto& tri = m.triangles[t];
  ux = bary[0] * u.u[tri[0]] + bary[1] * u.u[tri[1]] + bary[2] * u.u[tri[2]];
  uy = bary[0] * u.v[tri[0]] + bary[1] * u.v[tri[1]] + bary[2] * u.v[tri[2]];
}

ScalarField FemOperators::semi_lagrangian_step(const ScalarField& theta,
                                               const VectorField& u, double dt) {
  if (!domains_compatible(theta.domain, dom_) || !domains_compatible(u.domain, dom_))
    throw NumericsError("semi_lagrangian_step: field on wrong domain");
  ensure_locator();
  const MeshDomain& m = mesh();
  double umax = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    umax = std::max(umax, std::hypot(u.u[k], u.v[k]));
  int nsub = 1;
  if (umax > 0.0) {
    const double need = std::ceil(dt * umax / (0.5 * m.min_edge_length));
    if (need > 100000.0)
      throw NumericsError("semi-lagrangian substep count " + std::to_string(need) +
                          " exceeds cap (runaway velocity?)");
    nsub = std::max(1, static_cast<int>(need));
  }
  const double h = dt / nsub;

  ScalarField cur = theta;
  ScalarField next(*dom_);
  for (int step = 0; step < nsub; ++step) {
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
      const Vec2 p = m.vertices[i];
      // RK2 backtracking with the frozen flow
      const double ux0 = u.u[i], uy0 = u.v[i];
      double xm = p.x - 0.5 * h * ux0;
      double ym = p.y - 0.5 * h * uy0;
      double uxm, uym;
      interpolate_velocity(u, xm, ym, uxm, uym);
      double fx = p.x - h * uxm;
      double fy = p.y - h * uym;
      int t;
      double bary[3];
      if (!locate(fx, fy, t, bary)) {
        const Vec2 bp = project_to_boundary(fx, fy);
        if (!locate(bp.x, bp.y, t, bary))
          throw NumericsError("point location failed at (" + std::to_string(fx) +
                              ", " + std::to_string(fy) + ")");
      }
      clamp_bary(bary);
      const auto& tri = m.triangles[t];
      next.values[i] = bary[0] * cur.values[tri[0]] + bary[1] * cur.values[tri[1]] +
                       bary[2] * cur.values[tri[2]];
    }
    std::swap(cur.values, next.values);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Structured meshers
// ---------------------------------------------------------------------------

namespace {

void fix_orientation(MeshDomain& m) {
  for (auto& tri : m.triangles) {
    const Vec2& a = m.vertices[tri[0]];
    const Vec2& b = m.vertices[tri[1]];
    const Vec2& c = m.vertices[tri[2]];
    if ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y) < 0.0)
      std::swap(tri[1], tri[2]);
  }
}

MeshDomain mesh_square(double h) {
  MeshDomain m;
  const int n = std::max(2, static_cast<int>(std::lround(2.0 / h)));
  const double step = 2.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.vertices.push_back(Vec2{-1.0 + i * step, -1.0 + j * step});
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

MeshDomain mesh_circle(double h) {
  MeshDomain m;
  const double R = 2.0 / std::sqrt(std::numbers::pi);
  const int rings = std::max(2, static_cast<int>(std::lround(R / h)));
  m.vertices.push_back(Vec2{0.0, 0.0});
  std::vector<int> ring_start(rings + 1, 0);
  for (int i = 1; i <= rings; ++i) {
    ring_start[i] = static_cast<int>(m.vertices.size());
    const double r = R * i / rings;
    const int cnt = 6 * i;
    for (int k = 0; k < cnt; ++k) {
      const double a = 2.0 * std::numbers::pi * k / cnt;
      m.vertices.push_back(Vec2{r * std::cos(a), r * std::sin(a)});
    }
  }
  auto ring_vertex = [&](int ring, int k) {
    if (ring == 0) return 0;
    const int cnt = 6 * ring;
    return ring_start[ring] + ((k % cnt) + cnt) % cnt;
  };
  for (int k = 0; k < 6; ++k)
    m.triangles.push_back({0, ring_vertex(1, k), ring_vertex(1, k + 1)});
  for (int i = 2; i <= rings; ++i) {
    for (int s = 0; s < 6; ++s) {
      // zipper merge of the two vertex sequences of the sector band
      int a = 0, b = 0;  // outer / inner local indices
      while (a < i || b < i - 1) {
        const double next_outer = (a < i) ? double(a + 1) / i : 2.0;
        const double next_inner = (b < i - 1) ? double(b + 1) / (i - 1) : 2.0;
        if (next_outer <= next_inner) {
          m.triangles.push_back({ring_vertex(i, s * i + a),
                                 ring_vertex(i, s * i + a + 1),
                                 ring_vertex(i - 1, s * (i - 1) + b)});
          ++a;
        } else {
          m.triangles.push_back({ring_vertex(i, s * i + a),
                                 ring_vertex(i - 1, s * (i - 1) + b + 1),
                                 ring_vertex(i - 1, s * (i - 1) + b)});
          ++b;
        }
      }
    }
  }
  return m;
}

MeshDomain mesh_annulus(double h) {
  MeshDomain m;
  const double r_in = 1.0 / std::sqrt(std::numbers::pi);
  const double r_out = std::sqrt(5.0 / std::numbers::pi);
  const int layers = std::max(2, static_cast<int>(std::lround((r_out - r_in) / h)));
  const double r_mid = 0.5 * (r_in + r_out);
  const int cnt = std::max(12, static_cast<int>(std::lround(
                                   2.0 * std::numbers::pi * r_mid / h)));
  for (int j = 0; j <= layers; ++j) {
    const double r = r_in + (r_out - r_in) * j / layers;
    for (int k = 0; k < cnt; ++k) {
      const double a = 2.0 * std::numbers::pi * k / cnt;
      m.vertices.push_back(Vec2{r * std::cos(a), r * std::sin(a)});
    }
  }
  auto id = [cnt](int j, int k) { return j * cnt + ((k % cnt) + cnt) % cnt; };
  for (int j = 0; j < layers; ++j)
    for (int k = 0; k < cnt; ++k) {
      m.triangles.push_back({id(j, k), id(j + 1, k), id(j + 1, k + 1)});
      m.triangles.push_back({id(j, k), id(j + 1, k + 1), id(j, k + 1)});
    }
  return m;
}

MeshDomain mesh_lshape(double h) {
  MeshDomain m;
  const double b = std::sqrt(5.0);
  const double a = b - 1.0;
  auto axis_lines = [&](std::vector<double>& lines) {
    const int n1 = std::max(1, static_cast<int>(std::lround(a / h)));
    const int n2 = std::max(1, static_cast<int>(std::lround((b - a) / h)));
    for (int i = 0; i <= n1; ++i) lines.push_back(a * i / n1);
    for (int i = 1; i <= n2; ++i) lines.push_back(a + (b - a) * i / n2);
  };
  std::vector<double> xs, ys;
  axis_lines(xs);
  axis_lines(ys);
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());

  std::vector<int> vid(static_cast<std::size_t>(nx) * ny, -1);
  auto inside = [&](double cx, double cy) { return cy < a || cx < a; };
  auto get_vertex = [&](int i, int j) {
    int& v = vid[static_cast<std::size_t>(j) * nx + i];
    if (v < 0) {
      v = static_cast<int>(m.vertices.size());
      m.vertices.push_back(Vec2{xs[i], ys[j]});
    }
    return v;
  };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      if (!inside(cx, cy)) continue;
      const int v00 = get_vertex(i, j);
      const int v10 = get_vertex(i + 1, j);
      const int v11 = get_vertex(i + 1, j + 1);
      const int v01 = get_vertex(i, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  return m;
}

}  // namespace

MeshDomain generate_mesh(MeshShape shape, double target_h) {
  if (!(target_h > 0.0)) throw ConfigError("mesh target_h must be positive");
  MeshDomain m;
  switch (shape) {
    case MeshShape::Square: m = mesh_square(target_h); break;
    case MeshShape::Circle: m = mesh_circle(target_h); break;
    case MeshShape::LShape: m = mesh_lshape(target_h); break;
    case MeshShape::Annulus: m = mesh_annulus(target_h); break;
  }
  fix_orientation(m);
  m.finalize();
  return m;
}

MeshShape mesh_shape_from_string(const std::string& name) {
  if (name == "square") return MeshShape::Square;
  if (name == "circle") return MeshShape::Circle;
  if (name == "lshape") return MeshShape::LShape;
  if (name == "annulus") return MeshShape::Annulus;
  throw ConfigError("unsupported shape '" + name +
                    "' (expected square|circle|lshape|annulus)");
}

// ---------------------------------------------------------------------------
// Mesh file format
// ---------------------------------------------------------------------------

void write_mesh(std::ostream& os, const MeshDomain& mesh) {
  char buf[80];
  os << "vertices " << mesh.vertices.size() << "\n";
  os << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& t : mesh.triangles)
    os << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges)
    os << "b " << e.a << " " << e.b << "\n";
}

MeshDomain read_mesh(std::istream& is) {
  MeshDomain m;
  std::string tag;
  std::size_t nv = 0, nt = 0;
  if (!(is >> tag >> nv) || tag != "vertices")
    throw ConfigError("mesh file: expected 'vertices N' header");
  if (!(is >> tag >> nt) || tag != "triangles")
    throw ConfigError("mesh file: expected 'triangles M' header");
  m.vertices.resize(nv);
  for (auto& p : m.vertices)
    if (!(is >> p.x >> p.y)) throw ConfigError("mesh file: truncated vertex list");
  m.triangles.resize(nt);
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2]))
      throw ConfigError("mesh file: truncated triangle list");
  std::vector<std::pair<int, int>> declared;
  while (is >> tag) {
    if (tag != "b") throw ConfigError("mesh file: unexpected token '" + tag + "'");
    int a, b;
    if (!(is >> a >> b)) throw ConfigError("mesh file: truncated boundary edge");
    declared.emplace_back(a, b);
  }
  m.finalize();
  if (!declared.empty()) {
    // Order-independent consistency check against the recomputed boundary.
    auto canon = [](int a, int b) {
      return std::pair<int, int>(std::min(a, b), std::max(a, b));
    };
    std::vector<std::pair<int, int>> want, have;
    for (const auto& e : declared) want.push_back(canon(e.first, e.second));
    for (const auto& e : m.boundary_edges) have.push_back(canon(e.a, e.b));
    std::sort(want.begin(), want.end());
    std::sort(have.begin(), have.end());
    if (want != have)
      throw ConfigError("mesh file: declared boundary does not match mesh topology");
  }
  return m;
}

void write_mesh_file(const std::string& path, const MeshDomain& mesh) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open mesh file for writing: " + path);
  write_mesh(os, mesh);
}

MeshDomain read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open mesh file: " + path);
  return read_mesh(is);
}

}  // namespace optmix
