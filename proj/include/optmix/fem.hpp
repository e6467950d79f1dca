#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "optmix/fields.hpp"

namespace optmix {

/// CSR sparse matrix. Assembled stiffness matrices are symmetric positive
/// semidefinite with the constants in the null space; mass matrices are SPD.
struct SparseOperator {
  int n = 0;
  std::vector<int> row_offsets;
  std::vector<int> col_indices;
  std::vector<double> values;
  bool symmetric = true;

  void multiply(const double* x, double* y) const;
  std::vector<double> diagonal() const;
};

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Preconditioned conjugate gradients with optional deflation of the
/// constant mode (for the singular Neumann stiffness matrix). Throws
/// NumericsError on non-convergence.
CgResult conjugate_gradient(const SparseOperator& A, const std::vector<double>& b,
                            std::vector<double>& x, double rel_tol, int max_iter,
                            bool deflate_constants);

struct EigenPair {
  double lambda1 = 0.0;
  ScalarField mode;
};

enum class MeshShape { Square, Circle, LShape, Annulus };

/// Structured triangulations of the benchmark domains. Boundary
/// vertices of the curved shapes lie exactly on the circles.
MeshDomain generate_mesh(MeshShape shape, double target_h);
MeshShape mesh_shape_from_string(const std::string& name);

/// Text mesh format: "vertices N" / "triangles M" header lines, N vertex
/// lines "x y", M triangle lines "i j k" (0-based), then boundary edge lines
/// "b i j". Round-trips bit-exactly.
void write_mesh(std::ostream& os, const MeshDomain& mesh);
MeshDomain read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const MeshDomain& mesh);
MeshDomain read_mesh_file(const std::string& path);

/// P1 Galerkin operators and solver scratch for one mesh.
class FemOperators {
 public:
  /// `dom` must hold a MeshDomain and outlive this object.
  explicit FemOperators(const Domain& dom);

  const Domain& domain() const { return *dom_; }
  const MeshDomain& mesh() const;
  const SparseOperator& stiffness() const { return K_; }
  const SparseOperator& mass() const { return M_; }

  /// Solves Laplace(phi) = theta, grad(phi).n = 0, mean(phi) = 0:
  /// K phi = -M theta by deflated CG.
  ScalarField solve_neumann(const ScalarField& theta, double rel_tol = 1e-10);

  /// Nodal gradient by consistent-mass L2 projection of the elementwise
  /// P1 gradient (one CG solve per component).
  VectorField recover_gradient(const ScalarField& f, double rel_tol = 1e-10);

  /// Weak divergence assembly: b_i = int v . grad(hat_i).
  std::vector<double> weak_divergence(const VectorField& v) const;

  /// Divergence-free, no-flux part of v: solves the pressure Poisson problem
  /// in weak form and subtracts the recovered gradient.
  VectorField leray_project(const VectorField& v, double rel_tol = 1e-10);
  /// Relative residual of the last leray_project pressure solve.
  double last_projection_residual() const { return last_proj_residual_; }

  /// Smallest nonzero Neumann eigenvalue by inverse power iteration on
  /// (K, M) with constant-mode deflation.
  EigenPair smallest_nonzero_eigenvalue(double eig_rel_tol = 1e-8,
                                        int max_outer = 200);

  /// sqrt(phi^T K phi / |Omega|): the L2 norm of the gradient of the P1
  /// Poisson solution (used by the mix norm).
  double gradient_l2_norm(const ScalarField& phi) const;

  double enstrophy(const VectorField& v) const;  // u^T K u + v^T K v
  void velocity_gradients(const VectorField& v, VectorField& grad_u,
                          VectorField& grad_v, double rel_tol = 1e-10);

  /// Semi-Lagrangian transport: theta'(x) = theta(X(x,-dt)) with RK2
  /// characteristic backtracking and barycentric interpolation. Substeps
  /// internally until dt_sub * max|u| <= min_edge/2. Feet outside the domain
  /// are projected to the nearest boundary point.
  ScalarField semi_lagrangian_step(const ScalarField& theta, const VectorField& u,
                                   double dt);

 private:
  struct Locator;
  const Domain* dom_;
  SparseOperator K_, M_;
  std::vector<double> k_diag_, m_diag_;
  std::shared_ptr<Locator> locator_;  // built on first advection
  double last_proj_residual_ = 0.0;

  void ensure_locator();
  bool locate(double x, double y, int& tri, double bary[3]) const;
  void interpolate_velocity(const VectorField& u, double x, double y,
                            double& ux, double& uy) const;
  Vec2 project_to_boundary(double x, double y) const;
};

/// Element-matrix assembly, exposed for tests.
void p1_element_matrices(const Vec2& a, const Vec2& b, const Vec2& c,
                         double K_elem[3][3], double M_elem[3][3]);

}  // namespace optmix
