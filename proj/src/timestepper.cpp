#include "optmix/timestepper.hpp"

#include <algorithm>
#include <cmath>

#include "optmix/errors.hpp"

namespace optmix {

void SimClock::validate() const {
  if (!(macro_dt > 0.0) || macro_dt > t_end)
    throw ConfigError("SimClock: need 0 < macro_dt <= t_end");
  if (!(cfl > 0.0 && cfl <= 0.9)) throw ConfigError("SimClock: need 0 < cfl <= 0.9");
}

namespace {

using Complex = SpectralWorkspace::Complex;

/// Spectral advection tendency: rhs_hat = mask(fft(-u.grad(theta))), with the
/// mean mode pinned to zero (the continuum tendency is mean-free).
struct SpectralRhs {
  SpectralWorkspace& ws;
  const std::vector<double>& u_ext;
  const std::vector<double>& v_ext;
  DealiasRule rule;
  std::vector<Complex> cgx, cgy;
  std::vector<double> gx, gy, prod;

  SpectralRhs(SpectralWorkspace& w, const std::vector<double>& u,
              const std::vector<double>& v, DealiasRule r)
      : ws(w), u_ext(u), v_ext(v), rule(r) {
    cgx.resize(ws.spec_size());
    cgy.resize(ws.spec_size());
    gx.resize(ws.real_size());
    gy.resize(ws.real_size());
    prod.resize(ws.real_size());
  }

  void operator()(const std::vector<Complex>& theta_hat, std::vector<Complex>& out) {
    ws.apply_gradient(theta_hat.data(), cgx.data(), cgy.data());
    ws.inverse(cgx.data(), gx.data());
    ws.inverse(cgy.data(), gy.data());
    const std::size_t n = ws.real_size();
    for (std::size_t k = 0; k < n; ++k)
      prod[k] = -(u_ext[k] * gx[k] + v_ext[k] * gy[k]);
    ws.forward(prod.data(), out.data());
    ws.apply_mask(out.data(), rule);
    out[0] = 0.0;
  }
};

}  // namespace

void rk4_substeps_ext(SpectralWorkspace& ws, std::vector<double>& theta_ext,
                      const std::vector<double>& u_ext,
                      const std::vector<double>& v_ext, double dt_macro,
                      double cfl, DealiasRule rule, int substep_cap,
                      int forced_substeps) {
  const RectDomain& r = ws.rect();
  double umax = 0.0;
  for (std::size_t k = 0; k < u_ext.size(); ++k)
    umax = std::max(umax, std::hypot(u_ext[k], v_ext[k]));
  const double h = std::min(r.hx(), r.hy());
  int n = 1;
  if (forced_substeps > 0) {
    n = forced_substeps;
  } else if (umax > 0.0) {
    const double need = std::ceil(dt_macro * umax / (cfl * h));
    if (need > static_cast<double>(substep_cap))
      throw NumericsError("RK4 substep count " + std::to_string(need) +
                          " exceeds cap (runaway velocity?)");
    n = std::max(1, static_cast<int>(need));
  }
  if (n > substep_cap)
    throw NumericsError("RK4 substep count " + std::to_string(n) +
                        " exceeds cap (runaway velocity?)");
  const double dt = dt_macro / n;

  std::vector<Complex> that(ws.spec_size());
  ws.forward(theta_ext.data(), that.data());
  SpectralRhs rhs(ws, u_ext, v_ext, rule);
  std::vector<Complex> k1(ws.spec_size()), k2(ws.spec_size()), k3(ws.spec_size()),
      k4(ws.spec_size()), stage(ws.spec_size());

  for (int step = 0; step < n; ++step) {
    rhs(that, k1);
    for (std::size_t s = 0; s < that.size(); ++s)
      stage[s] = that[s] + 0.5 * dt * k1[s];
    rhs(stage, k2);
    for (std::size_t s = 0; s < that.size(); ++s)
      stage[s] = that[s] + 0.5 * dt * k2[s];
    rhs(stage, k3);
    for (std::size_t s = 0; s < that.size(); ++s)
      stage[s] = that[s] + dt * k3[s];
    rhs(stage, k4);
    for (std::size_t s = 0; s < that.size(); ++s)
      that[s] += (dt / 6.0) * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
  }
  ws.inverse(that.data(), theta_ext.data());
}

ScalarField advect_rhs_spectral(SpectralWorkspace& ws, const ScalarField& theta,
                                const VectorField& u, DealiasRule rule) {
  std::vector<double> th(ws.real_size());
  std::vector<double> ue(ws.real_size()), ve(ws.real_size());
  ws.extend_scalar_raw(theta.values.data(), th.data());
  ws.extend_velocity_raw(u.u.data(), ue.data(), true);
  ws.extend_velocity_raw(u.v.data(), ve.data(), false);
  std::vector<Complex> that(ws.spec_size()), out(ws.spec_size());
  ws.forward(th.data(), that.data());
  SpectralRhs rhs(ws, ue, ve, rule);
  rhs(that, out);
  ws.inverse(out.data(), th.data());
  ScalarField res(ws.original_domain());
  ws.restrict_raw(th.data(), res.values.data());
  return res;
}

ScalarField rk4_substeps(SpectralWorkspace& ws, const ScalarField& theta,
                         const VectorField& u, double dt_macro, double cfl,
                         DealiasRule rule, int substep_cap) {
  std::vector<double> th(ws.real_size());
  std::vector<double> ue(ws.real_size()), ve(ws.real_size());
  ws.extend_scalar_raw(theta.values.data(), th.data());
  ws.extend_velocity_raw(u.u.data(), ue.data(), true);
  ws.extend_velocity_raw(u.v.data(), ve.data(), false);
  rk4_substeps_ext(ws, th, ue, ve, dt_macro, cfl, rule, substep_cap);
  ScalarField res(ws.original_domain());
  ws.restrict_raw(th.data(), res.values.data());
  return res;
}

namespace {

struct SnapshotPlan {
  std::vector<double> times;
  std::vector<bool> written;

  explicit SnapshotPlan(std::vector<double> ts) : times(std::move(ts)) {
    std::sort(times.begin(), times.end());
    written.assign(times.size(), false);
  }

  // macro-step-aligned: a snapshot fires at the first record time within
  // half a macro step of the request
  bool due(double t, double macro_dt, std::size_t& index) {
    for (std::size_t k = 0; k < times.size(); ++k)
      if (!written[k] && std::abs(t - times[k]) <= 0.5 * macro_dt + 1e-12) {
        written[k] = true;
        index = k;
        return true;
      }
    return false;
  }
};

template <typename Stirrer, typename Advance, typename MixNorm, typename PrepareIc>
SimulationResult run_loop(const SimulationConfig& cfg, std::shared_ptr<Domain> domain,
                          Stirrer&& stirrer, Advance&& advance, MixNorm&& mix_of,
                          PrepareIc&& prepare_ic) {
  SimulationResult result;
  result.domain = std::move(domain);

  ScalarField theta = prepare_ic(evaluate_ic(cfg.ic, *result.domain));
  result.theta_initial = theta;
  const double macro_dt = cfg.resolved_macro_dt();
  const double t_end = cfg.t_end;

  const double mix0 = mix_of(theta);
  const double linf0 = linf_norm(theta);
  const double area = domain_area(*result.domain);
  const bool energy_kind = cfg.constraint.kind == Constraint::Kind::Energy;

  SnapshotPlan snapshots(cfg.snapshot_times);
  std::vector<double> gamma_times, gamma_samples;

  double t = 0.0;
  for (;;) {
    StirringResult flow = stirrer(theta);
    if (flow.stagnated && t == 0.0)
      throw NumericsError(
          "optimal flow stagnated at t=0: P(theta grad phi) vanishes for this "
          "initial condition");
    gamma_times.push_back(t);
    gamma_samples.push_back(flow.gamma);

    DiagnosticsRecord rec;
    rec.t = t;
    rec.mix_norm = mix_of(theta);
    rec.mix_norm_normalized = rec.mix_norm / mix0;
    rec.l2 = l2_norm(theta);
    rec.linf = linf_norm(theta);
    rec.energy = flow.energy;
    rec.enstrophy = flow.enstrophy;
    rec.instantaneous_rate = flow.rate;
    rec.lower_bound = energy_kind
                          ? lower_bound_energy(mix0, linf0, cfg.constraint.U, area, t)
                          : lower_bound_enstrophy(mix0, gamma_times, gamma_samples);
    rec.gamma = flow.gamma;
    result.series.push_back(rec);

    std::size_t snap_index;
    if (snapshots.due(t, macro_dt, snap_index))
      result.snapshots.emplace_back(t, theta);

    if (t >= t_end - 1e-12) break;
    const double dt = std::min(macro_dt, t_end - t);
    if (!flow.stagnated) theta = advance(theta, flow, dt);
    theta = subtract_mean(theta);
    t += dt;
  }
  result.theta_final = theta;
  return result;
}

}  // namespace

SimulationResult run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  std::shared_ptr<Domain> domain = make_domain(cfg);

  if (!cfg.uses_mesh()) {
    auto ws = std::make_shared<SpectralWorkspace>(*domain);
    const DealiasRule rule = cfg.dealias.empty()
                                 ? default_dealias_rule(cfg.constraint)
                                 : (cfg.dealias == "two-thirds" ? DealiasRule::TwoThirds
                                                                : DealiasRule::Half);
    SpectralStirrer stirrer(*ws, cfg.constraint, rule);

    auto stir = [&](const ScalarField& th) { return stirrer.compute(th); };
    auto advance = [&](const ScalarField& th, const StirringResult&, double dt) {
      std::vector<double> ext(ws->real_size());
      ws->extend_scalar_raw(th.values.data(), ext.data());
      rk4_substeps_ext(*ws, ext, stirrer.u_ext(), stirrer.v_ext(), dt, cfg.cfl, rule);
      ScalarField out(*domain);
      ws->restrict_raw(ext.data(), out.values.data());
      return out;
    };
    auto mix_of = [&](const ScalarField& th) { return mix_norm(th, *ws); };
    // The all-or-nothing filter also applies to the initial spectrum.
    auto prepare = [&](const ScalarField& th) {
      return subtract_mean(ws->dealias(th, rule));
    };
    return run_loop(cfg, domain, stir, advance, mix_of, prepare);
  }

  FemOperators ops(*domain);
  FemStirrer stirrer(ops, cfg.constraint);
  auto stir = [&](const ScalarField& th) { return stirrer.compute(th); };
  auto advance = [&](const ScalarField& th, const StirringResult& flow, double dt) {
    return ops.semi_lagrangian_step(th, flow.u, dt);
  };
  auto mix_of = [&](const ScalarField& th) { return mix_norm(th, ops); };
  auto prepare = [](const ScalarField& th) { return th; };
  return run_loop(cfg, domain, stir, advance, mix_of, prepare);
}

}  // namespace optmix
