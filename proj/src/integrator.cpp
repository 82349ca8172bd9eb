#include "nlspde/integrator.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace nlspde {

void StepperConfig::validate() const {
  if (!(dt0 > 0.0)) throw ConfigError("dt0 must be > 0");
  if (!(c_adapt > 0.0)) throw ConfigError("c_adapt must be > 0");
  if (!(u_max > 1.0)) throw ConfigError("u_max must be > 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (!(dt_min_factor >= 0.0 && dt_min_factor < 1.0)) throw ConfigError("dt_min_factor must lie in [0, 1)");
  if (fit_window < 2) throw ConfigError("fit_window must be >= 2");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::blowup_threshold: return "blowup_threshold";
    case Termination::blowup_overflow: return "blowup_overflow";
    case Termination::stalled: return "stalled_near_blowup";
    case Termination::numerical_failure: return "numerical_failure";
    case Termination::max_steps: return "max_steps";
  }
  return "unknown";
}

// ------------------------------------------------------------- ImplicitSolver

ImplicitSolver::ImplicitSolver(const DiscreteOperator& op, double dt0) : op_(&op), dt0_(dt0) {
  identity_.resize(op.matrix.rows(), op.matrix.cols());
  identity_.setIdentity();
  const SparseMatrix pattern = identity_ + op.matrix;
  base_.analyzePattern(pattern);
  other_.analyzePattern(pattern);
  factor(base_, dt0_);
}

void ImplicitSolver::factor(Factor& f, double dt) {
  f.factorize(identity_ + dt * op_->matrix);
  if (f.info() != Eigen::Success) throw NumericalFailure("factorization of I + dt A failed");
}

Field ImplicitSolver::solve(double dt, const Field& rhs) {
  Factor* f = &base_;
  if (dt != dt0_) {
    if (dt != other_dt_) {
      factor(other_, dt);
      other_dt_ = dt;
    }
    f = &other_;
  }
  Field x = f->solve(rhs);
  if (f->info() != Eigen::Success) throw NumericalFailure("implicit solve failed");
  return x;
}

// ------------------------------------------------------------------ step_imex

void step_imex(State& state, double dt, const Field& drift, const Field& increment, const ProblemSpec& spec,
               ImplicitSolver& solver) {
  if (!(dt > 0.0)) throw ConfigError("step needs dt > 0");
  const Eigen::Index n = state.u.size();
  if (drift.size() != n || increment.size() != n) throw ShapeError("drift/increment size does not match state");
  Field rhs = state.u + dt * drift;
  if (!spec.sigma.vanishes()) {
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] += spec.sigma.value(state.u[i]) * increment[i];
  }
  state.u = solver.solve(dt, rhs);
  state.t += dt;
}

void step_imex(State& state, double dt, const Simulation& sim, ImplicitSolver& solver, RngStream& rng) {
  const Drift d = nonlocal_drift(state.u, sim.spec, sim.grid);
  const Field dw = sim.noise.sample_increment(state.u.size(), dt, rng);
  step_imex(state, dt, d.values, dw, sim.spec, solver);
}

// -------------------------------------------------------------- detect_blowup

std::optional<double> detect_blowup(std::span<const double> times, std::span<const double> sup, double u_max,
                                    int fit_window) {
  if (times.empty() || times.size() != sup.size()) throw ShapeError("blow-up series must be nonempty and aligned");
  std::size_t k = 0;
  while (k < sup.size() && !(sup[k] >= u_max)) ++k;
  if (k == sup.size()) return std::nullopt;
  if (k == 0) return times[0];

  const std::size_t window = static_cast<std::size_t>(std::max(fit_window, 2));
  const std::size_t first = k + 1 >= window ? k + 1 - window : 0;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t m = 0;
  for (std::size_t i = first; i <= k; ++i) {
    if (!(sup[i] > 0.0) || !std::isfinite(sup[i])) continue;
    const double y = 1.0 / sup[i];
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++m;
  }
  const double tk = times[k];
  if (m < 2) return tk;
  const double denom = m * stt - st * st;
  if (!(denom > 0.0)) return tk;
  const double slope = (m * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / m;
  if (!(slope < 0.0)) return tk;
  const double root = -intercept / slope;
  const double last_dt = tk - times[k - 1];
  return std::clamp(root, tk, tk + last_dt * fit_window);
}

// ------------------------------------------------------------ integrate_path

namespace {

void record_state(PathRecord& rec, const State& s, const Drift& d, const Simulation& sim, bool keep_field) {
  rec.times.push_back(s.t);
  rec.kaplan.push_back(quadrature(s.u.cwiseProduct(sim.eigen.vector), sim.grid));
  rec.sup_norm.push_back(s.u.cwiseAbs().maxCoeff());
  rec.l2_norm.push_back(std::sqrt(quadrature(s.u.cwiseAbs2(), sim.grid)));
  rec.nonlocal_factor.push_back(d.K);
  rec.weighted_mass.push_back(d.weighted_mass);
  rec.drift_projection.push_back(d.projection);
  if (keep_field) rec.snapshots.push_back(s.u);
}

}  // namespace

PathRecord integrate_path(const Simulation& sim, std::uint64_t path_index, std::uint64_t master_seed,
                          const PathOptions& options) {
  sim.stepper.validate();
  const StepperConfig& cfg = sim.stepper;
  const double horizon = sim.spec.horizon;

  PathRecord rec;
  rec.path_index = path_index;

  State state;
  state.u = options.initial ? *options.initial : sim.spec.initial.materialize(sim.grid, sim.eigen.vector);
  if (state.u.size() != sim.grid.size()) throw ShapeError("initial datum does not match grid");
  if (state.u.minCoeff() < 0.0) throw ConfigError("initial datum must be >= 0 at every node");

  std::vector<double> checkpoints = options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  for (double c : checkpoints) {
    if (c < 0.0 || c > horizon) throw ConfigError("checkpoints must lie in [0, horizon]");
  }
  const bool use_grid = !checkpoints.empty();
  std::size_t next_cp = 0;

  RngStream rng(master_seed, path_index);
  ImplicitSolver solver(sim.op, cfg.dt0);
  const double dt_min = cfg.dt0 * cfg.dt_min_factor;
  const bool clamping = sim.spec.f.kind() == Nonlinearity::Kind::shifted_power ||
                        sim.spec.f.kind() == Nonlinearity::Kind::constant_plus ||
                        sim.spec.sigma.kind() == DiffusionCoefficient::Kind::power;

  std::deque<double> trace_t{0.0};
  std::deque<double> trace_sup{state.u.cwiseAbs().maxCoeff()};
  const std::size_t trace_len = static_cast<std::size_t>(cfg.fit_window) + 1;

  Drift drift;
  bool recorded_now = false;
  auto finish = [&](Termination why) {
    rec.termination = why;
    rec.blew_up = why == Termination::blowup_threshold || why == Termination::blowup_overflow ||
                  why == Termination::stalled;
    rec.t_final = state.t;
    rec.sup_final = state.u.allFinite() ? state.u.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
    rec.kaplan_final = quadrature(state.u.cwiseProduct(sim.eigen.vector), sim.grid);
    if (!use_grid && !recorded_now && why != Termination::numerical_failure) {
      try {
        drift = nonlocal_drift(state.u, sim.spec, sim.grid, &sim.eigen.vector);
      } catch (const Error&) {
        // keep the last drift; the state itself is still finite here
      }
      record_state(rec, state, drift, sim, options.record_fields);
    }
    if (rec.blew_up) {
      const double threshold = why == Termination::blowup_threshold ? cfg.u_max : trace_sup.back();
      const std::vector<double> ts(trace_t.begin(), trace_t.end());
      const std::vector<double> vs(trace_sup.begin(), trace_sup.end());
      const auto est = detect_blowup(ts, vs, threshold, cfg.fit_window);
      rec.blowup_time = std::min(est.value_or(state.t), horizon);
    }
    return rec;
  };

  while (true) {
    try {
      drift = nonlocal_drift(state.u, sim.spec, sim.grid, &sim.eigen.vector);
    } catch (const NumericalFailure& e) {
      rec.failure = e.what();
      return finish(Termination::numerical_failure);
    }

    recorded_now = false;
    if (use_grid) {
      while (next_cp < checkpoints.size() && checkpoints[next_cp] <= state.t) {
        if (checkpoints[next_cp] == state.t) {
          record_state(rec, state, drift, sim, options.record_fields);
          recorded_now = true;
        }
        ++next_cp;
      }
    } else if (rec.steps % cfg.stride == 0) {
      record_state(rec, state, drift, sim, options.record_fields);
      recorded_now = true;
    }

    if (state.t >= horizon) return finish(Termination::horizon);
    if (!drift.values.allFinite()) return finish(Termination::blowup_overflow);
    if (rec.steps >= cfg.max_steps) return finish(Termination::max_steps);

    const double f_sup = drift.values.cwiseAbs().maxCoeff();
    const double dt_adapt = cfg.c_adapt / (1.0 + f_sup);
    if (dt_adapt < dt_min) return finish(Termination::stalled);

    double dt = std::min(cfg.dt0, dt_adapt);
    double t_target = state.t + dt;
    bool snap = false;
    const double stop = use_grid && next_cp < checkpoints.size() ? std::min(checkpoints[next_cp], horizon) : horizon;
    if (t_target >= stop) {
      t_target = stop;
      dt = stop - state.t;
      snap = true;
    }
    if (!(dt > 0.0)) return finish(Termination::stalled);

    const Field dw = sim.noise.sample_increment(state.u.size(), dt, rng);
    const double t_before = state.t;
    const Field u_before = options.observer ? state.u : Field();
    try {
      step_imex(state, dt, drift.values, dw, sim.spec, solver);
    } catch (const NumericalFailure& e) {
      rec.failure = e.what();
      return finish(Termination::numerical_failure);
    }
    if (snap) state.t = t_target;
    ++rec.steps;

    if (!state.u.allFinite()) {
      rec.failure = "non-finite state after step";
      return finish(Termination::numerical_failure);
    }
    if (clamping) {
      for (Eigen::Index i = 0; i < state.u.size(); ++i) rec.clamp_events += state.u[i] < 0.0;
    }
    if (options.observer) options.observer(StepEvent{t_before, dt, u_before, dw, drift.values, drift.K, state.u});

    const double sup = state.u.cwiseAbs().maxCoeff();
    trace_t.push_back(state.t);
    trace_sup.push_back(sup);
    if (trace_t.size() > trace_len) {
      trace_t.pop_front();
      trace_sup.pop_front();
    }
    if (sup >= cfg.u_max) {
      recorded_now = false;
      return finish(Termination::blowup_threshold);
    }
  }
}

}  // namespace nlspde
