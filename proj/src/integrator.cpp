#include "sdde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>

#include "sdde/errors.hpp"

namespace sdde {

namespace {

// History view during a single run: initial segment for t <= 0, accepted
// mesh knots after that, and the provisional endpoint of the step being
// built.  Lookups into the provisional interval flag the step for sweeping.
struct Hist {
  const Segment& phi;
  const std::vector<double>& ts;
  const std::vector<double>& xs;
  const std::vector<double>& ds;
  double dt;
  double t_k = 0.0, dt_k = 0.0;
  double x_end = 0.0, d_end = 0.0;
  bool provisional_used = false;

  double value_at(double u) {
    if (u <= 0.0) return phi.eval(u);
    if (u <= t_k) {
      size_t i = std::min(static_cast<size_t>(u / dt), ts.size() - 2);
      if (u < ts[i] && i > 0) --i;
      if (i + 2 < ts.size() && u >= ts[i + 1]) ++i;
      const double w = ts[i + 1] - ts[i];
      return hermite::eval_local((u - ts[i]) / w, w, xs[i], ds[i], xs[i + 1],
                                 ds[i + 1]);
    }
    provisional_used = true;
    const double s = std::min((u - t_k) / dt_k, 1.0);
    return hermite::eval_local(s, dt_k, xs.back(), ds.back(), x_end, d_end);
  }
};

using Rhs = std::function<double(double t, double x, Hist& hist)>;

// Dense derivative lookup into already committed data (value channel).
using DerivAt = std::function<double(double u)>;
// x''(t) from knot data plus a delayed-derivative lookup.
using Curv = std::function<double(double t, double x, double d,
                                  const DerivAt& past)>;

// One RK4 step with fixed-point resolution of delayed lookups into the
// provisional interval.  Returns false when the sweeps fail to settle.
bool rk4_step(double t_k, double dt_k, double x_k, double d_k, Hist& hist,
              const Rhs& rhs, double& x_out, double& d_out) {
  hist.t_k = t_k;
  hist.dt_k = dt_k;
  hist.x_end = x_k + dt_k * d_k;
  hist.d_end = d_k;
  for (int sweep = 0; sweep < 5; ++sweep) {
    hist.provisional_used = false;
    const double half = 0.5 * dt_k;
    const double k1 = d_k;
    const double k2 = rhs(t_k + half, x_k + half * k1, hist);
    const double k3 = rhs(t_k + half, x_k + half * k2, hist);
    const double k4 = rhs(t_k + dt_k, x_k + dt_k * k3, hist);
    const double x_new = x_k + dt_k / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x_new)) return false;
    const double d_new = rhs(t_k + dt_k, x_new, hist);
    const double dx = std::fabs(x_new - hist.x_end);
    const double dd = std::fabs(d_new - hist.d_end);
    const bool used = hist.provisional_used;
    hist.x_end = x_new;
    hist.d_end = d_new;
    if (!used || (dx <= 1e-12 * std::max(1.0, std::fabs(x_new)) &&
                  dd <= 1e-12 * std::max(1.0, std::fabs(d_new)))) {
      x_out = x_new;
      d_out = d_new;
      return true;
    }
  }
  return false;
}

enum class RunOutcome { done, blowup, sweep_failure };

RunOutcome run_mesh(const Segment& phi, double T, double dt, double blowup,
                    const Rhs& rhs, std::vector<double>& ts,
                    std::vector<double>& xs, std::vector<double>& ds) {
  ts.clear();
  xs.clear();
  ds.clear();
  Hist hist{phi, ts, xs, ds, dt};

  const double x0 = phi.eval(0.0);
  ts.push_back(0.0);
  xs.push_back(x0);
  ds.push_back(rhs(0.0, x0, hist));
  if (std::fabs(x0) >= blowup) return RunOutcome::blowup;

  const long n_full = static_cast<long>(std::floor(T / dt + 1e-9));
  const double rem = T - static_cast<double>(n_full) * dt;
  const long n_steps = n_full + (rem > dt * 1e-6 ? 1 : 0);

  for (long k = 0; k < n_steps; ++k) {
    const double t_k = static_cast<double>(k) * dt;
    const double dt_k = (k < n_full) ? dt : rem;
    double x_new = 0.0, d_new = 0.0;
    if (!rk4_step(t_k, dt_k, xs.back(), ds.back(), hist, rhs, x_new, d_new))
      return RunOutcome::sweep_failure;
    const double t_next =
        (k + 1 == n_steps) ? T : static_cast<double>(k + 1) * dt;
    ts.push_back(t_next);
    xs.push_back(x_new);
    ds.push_back(d_new);
    if (std::fabs(x_new) >= blowup) return RunOutcome::blowup;
  }
  return RunOutcome::done;
}

double max_spot_residual(const Trajectory& tr, int checks, unsigned seed) {
  if (tr.ts.size() < 2 || tr.end_time() <= 4.0 * tr.dt) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(tr.dt, tr.end_time() - tr.dt);
  double worst = 0.0;
  for (int i = 0; i < checks; ++i)
    worst = std::max(worst, residual(tr, u(rng)));
  return worst;
}

void build_tables(Trajectory& tr, const Curv& curv) {
  if (tr.ts.size() < 2) return;
  tr.forward = hermite::Table(tr.ts, tr.xs, tr.ds);
  const double end = tr.ts.back();
  DerivAt past = [&tr, end](double u) {
    if (u <= 0.0) return tr.initial.eval_derivative(std::max(u, -tr.h()));
    return tr.forward.derivative(std::min(u, end));
  };
  std::vector<double> cs(tr.ts.size());
  for (size_t i = 0; i < tr.ts.size(); ++i)
    cs[i] = curv(tr.ts[i], tr.xs[i], tr.ds[i], past);
  tr.forward_rate = hermite::Table(tr.ts, tr.ds, std::move(cs));
}

Trajectory drive(const Segment& phi, double T, const IntegrateOptions& opts,
                 const Rhs& rhs, const Curv& curv, std::optional<Model> model,
                 std::optional<LinearCoeffs> linear) {
  if (!(T > 0.0)) throw PreconditionError("integrate: T must be positive");
  if (!(opts.dt > 0.0) || opts.dt >= phi.h())
    throw PreconditionError("integrate: dt must lie in (0, h)");

  Trajectory tr{phi, opts.dt, {}, {}, {}, TrajectoryStatus::completed,
                std::move(model), linear, {}, {}};

  double dt = opts.dt;
  for (int attempt = 0; attempt <= opts.max_halvings; ++attempt, dt *= 0.5) {
    const RunOutcome out =
        run_mesh(phi, T, dt, opts.blowup_bound, rhs, tr.ts, tr.xs, tr.ds);
    tr.dt = dt;
    if (out == RunOutcome::sweep_failure) {
      tr.status = TrajectoryStatus::step_failure;
      continue;
    }
    tr.status = out == RunOutcome::blowup ? TrajectoryStatus::blowup_stopped
                                          : TrajectoryStatus::completed;
    build_tables(tr, curv);
    if (tr.status == TrajectoryStatus::blowup_stopped) return tr;
    if (max_spot_residual(tr, opts.residual_checks, opts.rng_seed) <=
        opts.residual_tol)
      return tr;
    tr.status = TrajectoryStatus::step_failure;
  }
  if (tr.ts.size() >= 2 && tr.forward.size() == 0) build_tables(tr, curv);
  return tr; // step_failure: best effort data, honest status
}

} // namespace

double Trajectory::value(double t) const {
  if (t <= 0.0) return initial.eval(t);
  const double end = end_time();
  if (t > end + 1e-12 * std::max(1.0, end))
    throw DomainError("Trajectory: t beyond end of run");
  if (forward.size() < 2) throw DomainError("Trajectory: no forward mesh");
  return forward.value(std::min(t, end));
}

double Trajectory::derivative(double t) const {
  if (t <= 0.0) return initial.eval_derivative(t);
  const double end = end_time();
  if (t > end + 1e-12 * std::max(1.0, end))
    throw DomainError("Trajectory: t beyond end of run");
  if (forward_rate.size() >= 2) return forward_rate.value(std::min(t, end));
  if (forward.size() < 2) throw DomainError("Trajectory: no forward mesh");
  return forward.derivative(std::min(t, end));
}

Trajectory integrate(const Model& m, const Segment& phi, double T,
                     const IntegrateOptions& opts) {
  m.validate();
  if (std::fabs(phi.h() - m.h) > 1e-12 * std::max(1.0, m.h))
    throw PreconditionError("integrate: segment length differs from model h");
  const double res0 = std::fabs(phi.eval_derivative(0.0) - rhs_f(m, phi));
  if (res0 > opts.admissibility_tol)
    throw PreconditionError(
        "integrate: initial segment not admissible, |phi'(0) - f(phi)| = " +
        std::to_string(res0));
  if (!(phi.norm_c1() < m.domain_radius))
    throw PreconditionError("integrate: initial segment outside the domain");

  const Model model = m;
  Rhs rhs = [model](double t, double x, Hist& hist) {
    const double r = model.delay(x);
    if (!(r > 0.0) || r > model.h * (1.0 + 1e-12))
      throw ModelViolation("integrate: delay left (0, h] during the run");
    return rhs_pointwise(model, x, hist.value_at(t - r));
  };
  Curv curv = [model](double t, double x, double d, const DerivAt& past) {
    return rhs_rate(model, x, d, past(t - model.delay(x)));
  };
  return drive(phi, T, opts, rhs, curv, model, std::nullopt);
}

Trajectory integrate_linear(const LinearCoeffs& lc, const Segment& phi,
                            double T, const IntegrateOptions& opts) {
  if (phi.h() < 1.0 - 1e-12)
    throw PreconditionError(
        "integrate_linear: history shorter than the unit lag");
  Rhs rhs = [lc](double t, double x, Hist& hist) {
    return lc.A * x + lc.B * hist.value_at(t - 1.0);
  };
  Curv curv = [lc](double t, double /*x*/, double d, const DerivAt& past) {
    return lc.A * d + lc.B * past(t - 1.0);
  };
  return drive(phi, T, opts, rhs, curv, std::nullopt, lc);
}

Trajectory integrate_linear(double a, const Segment& phi, double T,
                            const IntegrateOptions& opts) {
  return integrate_linear(LinearCoeffs::exchange_rate(a), phi, T, opts);
}

double residual(const Trajectory& tr, double t) {
  if (t < 0.0 || t > tr.end_time() + 1e-12)
    throw PreconditionError("residual: t outside [0, end]");
  if (tr.model) {
    const Segment seg = segment_at(tr, t);
    return std::fabs(tr.derivative(t) - rhs_f(*tr.model, seg));
  }
  if (tr.linear) {
    return std::fabs(tr.derivative(t) - tr.linear->A * tr.value(t) -
                     tr.linear->B * tr.value(t - 1.0));
  }
  throw PreconditionError("residual: trajectory carries no equation");
}

Segment segment_at(const Trajectory& tr, double t, int n_nodes) {
  if (t < 0.0 || t > tr.end_time() + 1e-12)
    throw PreconditionError("segment_at: t outside [0, end]");
  const double h = tr.h();
  if (n_nodes <= 0) {
    const int mesh_nodes =
        tr.dt > 0.0 ? static_cast<int>(std::lround(h / tr.dt)) + 1 : 2;
    const int model_nodes =
        tr.model ? tr.model->grid_nodes : Segment::kDefaultIntervals + 1;
    n_nodes = std::max({mesh_nodes, model_nodes, 2});
  }
  std::vector<double> thetas(static_cast<size_t>(n_nodes)), vs(thetas.size()),
      ds(thetas.size());
  const int m = n_nodes - 1;
  for (int i = 0; i <= m; ++i) {
    const double th = -h + h * static_cast<double>(i) / static_cast<double>(m);
    const double u = std::max(t + th, -h);
    thetas[static_cast<size_t>(i)] = th;
    vs[static_cast<size_t>(i)] = tr.value(u);
    ds[static_cast<size_t>(i)] = tr.derivative(u);
  }
  thetas.back() = 0.0;
  return Segment(h, std::move(thetas), std::move(vs), std::move(ds));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr,
                          double stride) {
  std::string buf = "t,x,xprime\n";
  char num[40];
  auto row = [&](double t, double x, double d) {
    std::snprintf(num, sizeof num, "%.17g", t);
    buf += num;
    buf += ',';
    std::snprintf(num, sizeof num, "%.17g", x);
    buf += num;
    buf += ',';
    std::snprintf(num, sizeof num, "%.17g", d);
    buf += num;
    buf += '\n';
  };
  if (stride <= 0.0) {
    for (size_t i = 0; i < tr.ts.size(); ++i) row(tr.ts[i], tr.xs[i], tr.ds[i]);
  } else {
    const double end = tr.end_time();
    for (double t = 0.0; t < end; t += stride) row(t, tr.value(t),
                                                   tr.derivative(t));
    row(end, tr.value(end), tr.derivative(end));
  }
  out << buf;
}

void write_trajectory_csv_file(const std::string& path, const Trajectory& tr,
                               double stride) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open for write: " + path);
  write_trajectory_csv(f, tr, stride);
}

const char* trajectory_status_name(TrajectoryStatus s) {
  switch (s) {
  case TrajectoryStatus::completed: return "completed";
  case TrajectoryStatus::blowup_stopped: return "blowup_stopped";
  case TrajectoryStatus::step_failure: return "step_failure";
  }
  return "?";
}

} // namespace sdde
