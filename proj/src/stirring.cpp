#include "optmix/stirring.hpp"

#include <algorithm>
#include <cmath>

#include "optmix/errors.hpp"

namespace optmix {

SpectralStirrer::SpectralStirrer(SpectralWorkspace& ws, Constraint constraint,
                                 DealiasRule rule)
    : ws_(ws), constraint_(constraint), rule_(rule) {
  u_ext_.assign(ws_.real_size(), 0.0);
  v_ext_.assign(ws_.real_size(), 0.0);
}

StirringResult SpectralStirrer::compute(const ScalarField& theta) {
  using Complex = SpectralWorkspace::Complex;
  if (!domains_compatible(theta.domain, &ws_.original_domain()))
    throw NumericsError("stirring: scalar is not on the workspace domain");
  const std::size_t nr = ws_.real_size();
  const std::size_t ns = ws_.spec_size();
  const double area = domain_area(ws_.original_domain());
  const double l2_theta = l2_norm(theta);

  std::vector<double> th(nr), gx(nr), gy(nr), mx(nr), my(nr), wx(nr), wy(nr);
  std::vector<Complex> spec(ns), cwx(ns), cwy(ns), cgx(ns), cgy(ns);

  ws_.extend_scalar_raw(theta.values.data(), th.data());
  ws_.forward(th.data(), spec.data());
  ws_.apply_inverse_laplacian(spec.data());  // potential phi
  ws_.apply_gradient(spec.data(), cgx.data(), cgy.data());
  ws_.inverse(cgx.data(), gx.data());
  ws_.inverse(cgy.data(), gy.data());
  for (std::size_t k = 0; k < nr; ++k) {
    mx[k] = th[k] * gx[k];  // m = theta grad(phi)
    my[k] = th[k] * gy[k];
  }
  ws_.forward(mx.data(), cwx.data());
  ws_.forward(my.data(), cwy.data());
  ws_.apply_mask(cwx.data(), rule_);
  ws_.apply_mask(cwy.data(), rule_);
  const bool enstrophy_kind = constraint_.kind == Constraint::Kind::Enstrophy;
  if (enstrophy_kind) {
    ws_.apply_inverse_laplacian(cwx.data());
    ws_.apply_inverse_laplacian(cwy.data());
  }
  ws_.project_divergence_free(cwx.data(), cwy.data());
  ws_.inverse(cwx.data(), wx.data());
  ws_.inverse(cwy.data(), wy.data());
  if (enstrophy_kind) {
    for (std::size_t k = 0; k < nr; ++k) {
      wx[k] = -wx[k];
      wy[k] = -wy[k];
    }
    for (std::size_t s = 0; s < ns; ++s) {
      cwx[s] = -cwx[s];
      cwy[s] = -cwy[s];
    }
  }

  StirringResult res;
  res.raw_magnitude = std::sqrt(ws_.torus_mean_square(wx.data(), wy.data()));
  if (res.raw_magnitude <= kStagnationEps * l2_theta * l2_theta ||
      res.raw_magnitude == 0.0) {
    res.stagnated = true;
    res.u = VectorField(ws_.original_domain());
    std::fill(u_ext_.begin(), u_ext_.end(), 0.0);
    std::fill(v_ext_.begin(), v_ext_.end(), 0.0);
    return res;
  }

  // gradient fields of the projected flow (pre-normalization)
  std::vector<double> gux(nr), guy(nr), gvx(nr), gvy(nr);
  ws_.apply_gradient(cwx.data(), cgx.data(), cgy.data());
  ws_.inverse(cgx.data(), gux.data());
  ws_.inverse(cgy.data(), guy.data());
  ws_.apply_gradient(cwy.data(), cgx.data(), cgy.data());
  ws_.inverse(cgx.data(), gvx.data());
  ws_.inverse(cgy.data(), gvy.data());

  double scale;
  if (enstrophy_kind) {
    const double grad_mean_sq = ws_.torus_mean_square(gux.data(), guy.data()) +
                                ws_.torus_mean_square(gvx.data(), gvy.data());
    scale = constraint_.inv_tau / std::sqrt(grad_mean_sq);
  } else {
    scale = constraint_.U / res.raw_magnitude;
  }

  for (std::size_t k = 0; k < nr; ++k) {
    u_ext_[k] = scale * wx[k];
    v_ext_[k] = scale * wy[k];
  }
  res.u = VectorField(ws_.original_domain());
  ws_.restrict_raw(u_ext_.data(), res.u.u.data());
  ws_.restrict_raw(v_ext_.data(), res.u.v.data());

  res.energy = area * ws_.torus_mean_square(u_ext_.data(), v_ext_.data());
  res.enstrophy = area * scale * scale *
                  (ws_.torus_mean_square(gux.data(), guy.data()) +
                   ws_.torus_mean_square(gvx.data(), gvy.data()));
  double gmax = 0.0;
  for (std::size_t k = 0; k < nr; ++k) {
    const double s = gux[k] * gux[k] + guy[k] * guy[k] + gvx[k] * gvx[k] +
                     gvy[k] * gvy[k];
    gmax = std::max(gmax, s);
  }
  res.gamma = scale * std::sqrt(gmax);
  double mdotu = 0.0;
  for (std::size_t k = 0; k < nr; ++k) mdotu += mx[k] * wx[k] + my[k] * wy[k];
  res.rate = -2.0 * scale * mdotu / static_cast<double>(nr);
  return res;
}

FemStirrer::FemStirrer(FemOperators& ops, Constraint constraint)
    : ops_(ops), constraint_(constraint) {}

StirringResult FemStirrer::compute(const ScalarField& theta_in) {
  const Domain& dom = ops_.domain();
  const double area = domain_area(dom);
  const ScalarField theta = subtract_mean(theta_in);
  const double l2_theta = l2_norm(theta);

  const ScalarField phi = ops_.solve_neumann(theta);
  const VectorField grad_phi = ops_.recover_gradient(phi);
  VectorField m(dom);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m.u[k] = theta.values[k] * grad_phi.u[k];
    m.v[k] = theta.values[k] * grad_phi.v[k];
  }

  VectorField w(dom);
  const bool enstrophy_kind = constraint_.kind == Constraint::Kind::Enstrophy;
  if (enstrophy_kind) {
    ScalarField comp(dom);
    VectorField inv(dom);
    comp.values = m.u;
    inv.u = ops_.solve_neumann(comp).values;
    comp.values = m.v;
    inv.v = ops_.solve_neumann(comp).values;
    w = ops_.leray_project(inv);
    for (std::size_t k = 0; k < w.size(); ++k) {
      w.u[k] = -w.u[k];
      w.v[k] = -w.v[k];
    }
  } else {
    w = ops_.leray_project(m);
  }

  StirringResult res;
  res.raw_magnitude = l2_norm(w);
  if (res.raw_magnitude <= kStagnationEps * l2_theta * l2_theta ||
      res.raw_magnitude == 0.0) {
    res.stagnated = true;
    res.u = VectorField(dom);
    return res;
  }

  double scale;
  if (enstrophy_kind) {
    const double grad_mean_sq = ops_.enstrophy(w) / area;
    scale = constraint_.inv_tau / std::sqrt(grad_mean_sq);
  } else {
    scale = constraint_.U / res.raw_magnitude;
  }
  res.u = VectorField(dom);
  for (std::size_t k = 0; k < w.size(); ++k) {
    res.u.u[k] = scale * w.u[k];
    res.u.v[k] = scale * w.v[k];
  }
  res.energy = energy(res.u);
  res.enstrophy = ops_.enstrophy(res.u);
  VectorField gu, gv;
  ops_.velocity_gradients(res.u, gu, gv);
  res.gamma = max_gradient_frobenius(gu, gv);
  res.rate = -2.0 * inner_product(m, res.u);
  return res;
}

double lower_bound_energy(double mix_norm0, double linf0, double U, double area,
                          double t) {
  return std::max(0.0, mix_norm0 - U * std::sqrt(area) * linf0 * t);
}

double lower_bound_enstrophy(double mix_norm0, const std::vector<double>& times,
                             const std::vector<double>& gammas) {
  if (times.size() != gammas.size())
    throw NumericsError("lower_bound_enstrophy: mismatched series lengths");
  double integral = 0.0;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (gammas[k] < 0.0)
      throw NumericsError("lower_bound_enstrophy: negative gamma sample");
    if (k > 0)
      integral += 0.5 * (gammas[k] + gammas[k - 1]) * (times[k] - times[k - 1]);
  }
  return mix_norm0 * std::exp(-integral);
}

}  // namespace optmix
