#include "oracles.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace optmix::oracles {

std::vector<double> fd_poisson_neumann(const std::vector<double>& f, int n,
                                       double x_min, double x_max, double y_min,
                                       double y_max) {
  const double hx = (x_max - x_min) / (n - 1);
  const double hy = (y_max - y_min) / (n - 1);
  std::vector<double> work = f;
  // DCT-I diagonalizes the mirror-ghost FD Neumann Laplacian.
  fftw_plan fwd = fftw_plan_r2r_2d(n, n, work.data(), work.data(), FFTW_REDFT00,
                                   FFTW_REDFT00, FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);
  const double norm = 1.0 / (4.0 * (n - 1) * (n - 1));
  for (int j = 0; j < n; ++j) {
    const double ly = (2.0 * std::cos(M_PI * j / (n - 1)) - 2.0) / (hy * hy);
    for (int i = 0; i < n; ++i) {
      const double lx = (2.0 * std::cos(M_PI * i / (n - 1)) - 2.0) / (hx * hx);
      const double lam = lx + ly;
      const std::size_t s = static_cast<std::size_t>(j) * n + i;
      work[s] = (lam == 0.0) ? 0.0 : work[s] / lam * norm;
    }
  }
  fftw_plan bwd = fftw_plan_r2r_2d(n, n, work.data(), work.data(), FFTW_REDFT00,
                                   FFTW_REDFT00, FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);
  // mean-zero gauge under trapezoid weights
  double mean = 0.0, wsum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double w = ((i == 0 || i == n - 1) ? 0.5 : 1.0) *
                       ((j == 0 || j == n - 1) ? 0.5 : 1.0);
      mean += w * work[static_cast<std::size_t>(j) * n + i];
      wsum += w;
    }
  mean /= wsum;
  for (double& v : work) v -= mean;
  return work;
}

std::vector<double> fd_poisson_neumann_richardson(
    const std::function<double(double, double)>& f, int n, int refine,
    double x_min, double x_max, double y_min, double y_max) {
  auto solve_restricted = [&](int r) {
    const int nf = r * (n - 1) + 1;
    std::vector<double> rhs(static_cast<std::size_t>(nf) * nf);
    const double hx = (x_max - x_min) / (nf - 1);
    const double hy = (y_max - y_min) / (nf - 1);
    for (int j = 0; j < nf; ++j)
      for (int i = 0; i < nf; ++i)
        rhs[static_cast<std::size_t>(j) * nf + i] = f(x_min + i * hx, y_min + j * hy);
    std::vector<double> phi = fd_poisson_neumann(rhs, nf, x_min, x_max, y_min, y_max);
    std::vector<double> coarse(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        coarse[static_cast<std::size_t>(j) * n + i] =
            phi[static_cast<std::size_t>(j) * r * nf + static_cast<std::size_t>(i) * r];
    return coarse;
  };
  const std::vector<double> c1 = solve_restricted(refine);
  const std::vector<double> c2 = solve_restricted(2 * refine);
  std::vector<double> out(c1.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (4.0 * c2[k] - c1[k]) / 3.0;
  return out;
}

std::vector<double> fd_poisson_neumann_flux(
    const std::vector<double>& rhs, int n, double x_min, double x_max,
    double y_min, double y_max,
    const std::function<double(double, double, double, double)>& g) {
  const double hx = (x_max - x_min) / (n - 1);
  const double hy = (y_max - y_min) / (n - 1);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  auto weight = [&](int i, int j) {
    return ((i == 0 || i == n - 1) ? 0.5 : 1.0) *
           ((j == 0 || j == n - 1) ? 0.5 : 1.0);
  };
  // negated mirror-ghost Laplacian, symmetrized by the trapezoid weights
  // (positive semidefinite, so plain CG applies)
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(j) * n + i;
        const double c = x[s];
        const double xl = (i > 0) ? x[s - 1] : x[s + 1];
        const double xr = (i < n - 1) ? x[s + 1] : x[s - 1];
        const double yd = (j > 0) ? x[s - n] : x[s + n];
        const double yu = (j < n - 1) ? x[s + n] : x[s - n];
        y[s] = -weight(i, j) * ((xl + xr - 2 * c) / (hx * hx) +
                                (yd + yu - 2 * c) / (hy * hy));
      }
  };
  // fold the inhomogeneous Neumann data into the right side
  std::vector<double> b(nn);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * n + i;
      double add = 0.0;
      const double x = x_min + i * hx;
      const double y = y_min + j * hy;
      if (i == 0) add += 2.0 / hx * g(x, y, -1.0, 0.0);
      if (i == n - 1) add += 2.0 / hx * g(x, y, 1.0, 0.0);
      if (j == 0) add += 2.0 / hy * g(x, y, 0.0, -1.0);
      if (j == n - 1) add += 2.0 / hy * g(x, y, 0.0, 1.0);
      b[s] = -weight(i, j) * (rhs[s] - add);
    }
  double bmean = 0.0;
  for (double v : b) bmean += v;
  bmean /= static_cast<double>(nn);
  for (double& v : b) v -= bmean;

  std::vector<double> x(nn, 0.0), r = b, p = b, Ap(nn);
  double rr = 0.0;
  for (double v : r) rr += v * v;
  const double b0 = std::sqrt(rr);
  if (b0 == 0.0) return x;
  for (int it = 0; it < 200000; ++it) {
    apply(p, Ap);
    double pAp = 0.0;
    for (std::size_t k = 0; k < nn; ++k) pAp += p[k] * Ap[k];
    const double alpha = rr / pAp;
    for (std::size_t k = 0; k < nn; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * Ap[k];
    }
    double rmean = 0.0;
    for (double v : r) rmean += v;
    rmean /= static_cast<double>(nn);
    for (double& v : r) v -= rmean;
    double rr_new = 0.0;
    for (double v : r) rr_new += v * v;
    if (std::sqrt(rr_new) <= 1e-12 * b0) break;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < nn; ++k) p[k] = r[k] + beta * p[k];
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(nn);
  for (double& v : x) v -= mean;
  return x;
}

}  // namespace optmix::oracles
