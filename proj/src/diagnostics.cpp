#include "optmix/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include "optmix/errors.hpp"

namespace optmix {

double mix_norm(const ScalarField& theta, SpectralWorkspace& ws) {
  using Complex = SpectralWorkspace::Complex;
  const ScalarField clean = subtract_mean(theta);
  std::vector<double> ext(ws.real_size()), gx(ws.real_size()), gy(ws.real_size());
  std::vector<Complex> spec(ws.spec_size()), cx(ws.spec_size()), cy(ws.spec_size());
  ws.extend_scalar_raw(clean.values.data(), ext.data());
  ws.forward(ext.data(), spec.data());
  ws.apply_inverse_laplacian(spec.data());
  ws.apply_gradient(spec.data(), cx.data(), cy.data());
  ws.inverse(cx.data(), gx.data());
  ws.inverse(cy.data(), gy.data());
  return std::sqrt(ws.torus_mean_square(gx.data(), gy.data()));
}

double mix_norm(const ScalarField& theta, FemOperators& ops) {
  const ScalarField phi = ops.solve_neumann(theta);
  return ops.gradient_l2_norm(phi);
}

namespace {

struct CosineExpansion {
  // coefficients against cos(n pi (x-x0)/Lx) cos(m pi (y-y0)/Ly)
  std::vector<double> coeff;       // (n_modes x n_modes), (0,0) excluded
  std::vector<double> mode_norm2;  // <phi_nm, phi_nm>
  std::vector<double> lambda;
  int n_modes = 0;
  double captured = 0.0;  // sum a^2 ||phi||^2
  double total = 0.0;     // <theta, theta>
};

CosineExpansion expand(const ScalarField& theta, int n_modes) {
  const RectDomain* r = theta.domain ? as_rect(*theta.domain) : nullptr;
  if (!r) throw NumericsError("cosine expansion requires a rectangle domain");
  if (r->periodic())
    throw NumericsError("cosine expansion requires the no-flux grid layout");
  CosineExpansion e;
  e.n_modes = n_modes;
  e.coeff.assign(static_cast<std::size_t>(n_modes) * n_modes, 0.0);
  e.mode_norm2.assign(e.coeff.size(), 0.0);
  e.lambda.assign(e.coeff.size(), 0.0);

  // 1-D trapezoid-weighted cosine samples
  std::vector<double> cx(static_cast<std::size_t>(n_modes) * r->nx);
  std::vector<double> cy(static_cast<std::size_t>(n_modes) * r->ny);
  for (int n = 0; n < n_modes; ++n) {
    for (int i = 0; i < r->nx; ++i)
      cx[static_cast<std::size_t>(n) * r->nx + i] =
          std::cos(n * std::numbers::pi * (r->x(i) - r->x_min) / r->lx());
    for (int j = 0; j < r->ny; ++j)
      cy[static_cast<std::size_t>(n) * r->ny + j] =
          std::cos(n * std::numbers::pi * (r->y(j) - r->y_min) / r->ly());
  }
  auto wx = [&](int i) { return (i == 0 || i == r->nx - 1) ? 0.5 : 1.0; };
  auto wy = [&](int j) { return (j == 0 || j == r->ny - 1) ? 0.5 : 1.0; };

  ScalarField clean = subtract_mean(theta);
  e.total = inner_product(clean, clean);

  const double cell = r->hx() * r->hy() / r->area();
  for (int n = 0; n < n_modes; ++n) {
    for (int m = 0; m < n_modes; ++m) {
      if (n == 0 && m == 0) continue;
      double acc = 0.0;
      for (int j = 0; j < r->ny; ++j) {
        const double wj = wy(j) * cy[static_cast<std::size_t>(m) * r->ny + j];
        double row = 0.0;
        for (int i = 0; i < r->nx; ++i)
          row += wx(i) * cx[static_cast<std::size_t>(n) * r->nx + i] *
                 clean.values[static_cast<std::size_t>(j) * r->nx + i];
        acc += wj * row;
      }
      const double ip = acc * cell;  // <theta, phi_nm>
      const double norm2 = (n == 0 ? 1.0 : 0.5) * (m == 0 ? 1.0 : 0.5);
      const std::size_t s = static_cast<std::size_t>(n) * n_modes + m;
      e.coeff[s] = ip / norm2;
      e.mode_norm2[s] = norm2;
      const double kx = n * std::numbers::pi / r->lx();
      const double ky = m * std::numbers::pi / r->ly();
      e.lambda[s] = kx * kx + ky * ky;
      e.captured += e.coeff[s] * e.coeff[s] * norm2;
    }
  }
  return e;
}

}  // namespace

HMinusOneResult h_minus_one_norm_oracle(const ScalarField& theta, int n_modes) {
  const CosineExpansion e = expand(theta, n_modes);
  double acc = 0.0;
  for (std::size_t s = 0; s < e.coeff.size(); ++s)
    if (e.lambda[s] > 0.0)
      acc += e.coeff[s] * e.coeff[s] * e.mode_norm2[s] / (1.0 + e.lambda[s]);
  HMinusOneResult out;
  out.value = std::sqrt(acc);
  out.tail_warning = (e.total > 0.0) && (e.captured < 0.99 * e.total);
  return out;
}

double mix_norm_eigen_expansion(const ScalarField& theta, int n_modes) {
  const CosineExpansion e = expand(theta, n_modes);
  double acc = 0.0;
  for (std::size_t s = 0; s < e.coeff.size(); ++s)
    if (e.lambda[s] > 0.0)
      acc += e.coeff[s] * e.coeff[s] * e.mode_norm2[s] / e.lambda[s];
  return std::sqrt(acc);
}

RateFit fit_decay_rate(const std::vector<double>& times,
                       const std::vector<double>& mix_norms, double t_lo,
                       double t_hi) {
  if (times.size() != mix_norms.size())
    throw NumericsError("fit_decay_rate: mismatched series lengths");
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_lo || times[k] > t_hi) continue;
    if (!(mix_norms[k] > 0.0))
      throw NumericsError("fit_decay_rate: nonpositive mix norm sample at t = " +
                          std::to_string(times[k]));
    ts.push_back(times[k]);
    ys.push_back(std::log(mix_norms[k]));
  }
  if (ts.size() < 5)
    throw NumericsError("fit_decay_rate: fewer than 5 samples in window");
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    st += ts[k];
    sy += ys[k];
    stt += ts[k] * ts[k];
    sty += ts[k] * ys[k];
  }
  RateFit fit;
  fit.samples = static_cast<int>(ts.size());
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.a = (n * sty - st * sy) / (n * stt - st * st);
  fit.b = (sy - fit.a * st) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double pred = fit.a * ts[k] + fit.b;
    ss_res += (ys[k] - pred) * (ys[k] - pred);
    ss_tot += (ys[k] - ybar) * (ys[k] - ybar);
  }
  fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

double char_length(double mix, double l2) {
  if (!(l2 > 0.0))
    throw NumericsError("characteristic_length: zero field");
  return mix / l2;
}

}  // namespace

double characteristic_length(const ScalarField& theta0, SpectralWorkspace& ws) {
  const ScalarField clean = subtract_mean(theta0);
  return char_length(mix_norm(clean, ws), l2_norm(clean));
}

double characteristic_length(const ScalarField& theta0, FemOperators& ops) {
  const ScalarField clean = subtract_mean(theta0);
  return char_length(mix_norm(clean, ops), l2_norm(clean));
}

BcComparison compare_bc_series(const std::vector<DiagnosticsRecord>& periodic,
                               const std::vector<DiagnosticsRecord>& noflux) {
  if (periodic.size() != noflux.size())
    throw NumericsError("compare_bc_series: mismatched series lengths");
  BcComparison cmp;
  for (std::size_t k = 0; k < periodic.size(); ++k) {
    if (std::abs(periodic[k].t - noflux[k].t) > 1e-12)
      throw NumericsError("compare_bc_series: mismatched time grids at row " +
                          std::to_string(k));
    cmp.times.push_back(periodic[k].t);
    cmp.mix_periodic.push_back(periodic[k].mix_norm);
    cmp.mix_noflux.push_back(noflux[k].mix_norm);
    if (noflux[k].mix_norm > 0.0)
      cmp.max_rel_diff =
          std::max(cmp.max_rel_diff,
                   std::abs(periodic[k].mix_norm - noflux[k].mix_norm) /
                       noflux[k].mix_norm);
  }
  cmp.final_periodic_minus_noflux =
      periodic.back().mix_norm - noflux.back().mix_norm;
  return cmp;
}

}  // namespace optmix
