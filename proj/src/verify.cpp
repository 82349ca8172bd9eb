#include "nlspde/verify.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlspde {

namespace {

std::vector<double> position(const Grid& grid, Eigen::Index i) {
  std::vector<double> x;
  for (int a = 0; a < grid.dimension(); ++a) x.push_back(grid.coordinate(i, a));
  return x;
}

}  // namespace

// ------------------------------------------------------------ max principle

std::vector<EnvelopedPath> run_enveloped_paths(const Simulation& sim, std::size_t n_paths, std::uint64_t seed,
                                               const std::vector<double>& checkpoints) {
  std::vector<EnvelopedPath> out;
  out.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const Field xi = sim.spec.initial.materialize(sim.grid, sim.eigen.vector);
    double M = xi.maxCoeff();
    std::vector<std::pair<double, double>> trail{{0.0, M}};

    PathOptions options;
    options.checkpoints = checkpoints;
    options.record_fields = true;
    options.observer = [&](const StepEvent& e) {
      const double dw = e.increment.size() > 0 ? e.increment.maxCoeff() : 0.0;
      double drift = 0.0;
      if (sim.spec.lambda > 0.0) drift = sim.spec.lambda * sim.spec.f.value(M) * e.K;
      M = M + e.dt * drift + sim.spec.sigma.value(M) * dw;
      trail.emplace_back(e.t_before + e.dt, M);
    };
    EnvelopedPath ep;
    ep.record = integrate_path(sim, p, seed, options);
    // Steps land exactly on the checkpoints; the observer sees t_before + dt, which
    // can differ from the snapped time by rounding, so match the nearest entry.
    std::size_t j = 0;
    for (double t : ep.record.times) {
      while (j + 1 < trail.size() && std::abs(trail[j + 1].first - t) <= std::abs(trail[j].first - t)) ++j;
      ep.envelope.push_back(trail[j].second);
    }
    out.push_back(std::move(ep));
  }
  return out;
}

CheckReport check_max_principle(const std::vector<EnvelopedPath>& paths, const Grid& grid, double dt0,
                                double c_tol) {
  CheckReport r;
  r.name = "max_principle";
  double h2 = 0.0;
  for (int a = 0; a < grid.dimension(); ++a) h2 = std::max(h2, grid.spacing(a) * grid.spacing(a));
  const double base_tol = c_tol * (h2 + dt0);
  r.tolerance = base_tol;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& p : paths) {
    const auto& rec = p.record;
    if (rec.snapshots.size() != rec.times.size()) throw ShapeError("max-principle check needs field snapshots");
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      Eigen::Index i;
      const double top = rec.snapshots[k].maxCoeff(&i);
      const double M = p.envelope[k];
      // Normalized so that the comparison is against base_tol for every path.
      const double margin = (top - M) / std::max(1.0, std::abs(M));
      ++r.evaluations;
      if (margin > base_tol) ++r.violations;
      if (margin > r.worst_margin) {
        r.worst_margin = margin;
        r.path = rec.path_index;
        r.t = rec.times[k];
        r.x = position(grid, i);
      }
    }
  }
  r.passed = r.violations == 0;
  std::ostringstream d;
  d << "max_x u - M over max(1, M); tolerance c_tol (h^2 + dt0) with c_tol = " << c_tol;
  r.detail = d.str();
  return r;
}

// --------------------------------------------------------------------- Hopf

CheckReport check_hopf_sign(const std::vector<PathRecord>& paths, const Grid& grid, double t_eval, double tol) {
  CheckReport r;
  r.name = "hopf_sign";
  r.tolerance = 0.0 - tol;  // +0 rather than -0 in reports
  r.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& rec : paths) {
    if (rec.snapshots.empty() || rec.snapshots.size() != rec.times.size()) {
      throw ShapeError("Hopf check needs field snapshots");
    }
    if (rec.snapshots.front().maxCoeff() <= 0.0) throw ConfigError("Hopf check needs nontrivial initial data");
    std::size_t k = 0;
    for (std::size_t j = 1; j < rec.times.size(); ++j) {
      if (std::abs(rec.times[j] - t_eval) < std::abs(rec.times[k] - t_eval)) k = j;
    }
    for (std::size_t b = 0; b < grid.boundary().size(); ++b) {
      const double dn = normal_derivative(rec.snapshots[k], grid, b);
      ++r.evaluations;
      if (!(dn < -tol)) ++r.violations;
      if (dn > r.worst_margin) {
        r.worst_margin = dn;
        r.path = rec.path_index;
        r.t = rec.times[k];
        const auto& pos = grid.boundary()[b].position;
        r.x.assign(pos.begin(), pos.begin() + grid.dimension());
      }
    }
  }
  r.passed = r.violations == 0 && r.evaluations > 0;
  r.detail = "largest outward normal derivative at face boundary nodes; must stay below -tol";
  return r;
}

// --------------------------------------------------------------- comparison

CheckReport check_comparison_positivity(const Simulation& sim, std::uint64_t seed, std::uint64_t path_index,
                                        double delta, double tol) {
  if (!(delta >= 0.0)) throw ConfigError("comparison shift delta must be >= 0");
  const StepperConfig& cfg = sim.stepper;
  cfg.validate();

  CheckReport r;
  r.name = "comparison_positivity";
  r.tolerance = tol;
  r.path = path_index;
  r.worst_margin = -std::numeric_limits<double>::infinity();

  State lo, hi;
  lo.u = sim.spec.initial.materialize(sim.grid, sim.eigen.vector);
  hi.u = lo.u.array() + delta;
  RngStream rng(seed, path_index);
  ImplicitSolver solver(sim.op, cfg.dt0);
  const double dt_min = cfg.dt0 * cfg.dt_min_factor;

  auto assess = [&](double t) {
    const double scale = std::max(1.0, hi.u.cwiseAbs().maxCoeff());
    Eigen::Index i_order, i_lo, i_hi;
    const double order = (lo.u - hi.u).maxCoeff(&i_order);
    const double neg_lo = -lo.u.minCoeff(&i_lo);
    const double neg_hi = -hi.u.minCoeff(&i_hi);
    double m = order;
    Eigen::Index at = i_order;
    if (neg_lo > m) {
      m = neg_lo;
      at = i_lo;
    }
    if (neg_hi > m) {
      m = neg_hi;
      at = i_hi;
    }
    m /= scale;
    ++r.evaluations;
    if (m > tol) ++r.violations;
    if (m > r.worst_margin) {
      r.worst_margin = m;
      r.t = t;
      r.x = position(sim.grid, at);
    }
  };

  assess(0.0);
  std::string stop = "horizon";
  long steps = 0;
  while (lo.t < sim.spec.horizon) {
    if (steps >= cfg.max_steps) {
      stop = "max_steps";
      break;
    }
    Drift d_lo, d_hi;
    try {
      d_lo = nonlocal_drift(lo.u, sim.spec, sim.grid);
      d_hi = nonlocal_drift(hi.u, sim.spec, sim.grid);
    } catch (const NumericalFailure&) {
      stop = "numerical_failure";
      break;
    }
    if (!d_lo.values.allFinite() || !d_hi.values.allFinite()) {
      stop = "blowup";
      break;
    }
    const double f_sup = std::max(d_lo.values.cwiseAbs().maxCoeff(), d_hi.values.cwiseAbs().maxCoeff());
    double dt = std::min(cfg.dt0, cfg.c_adapt / (1.0 + f_sup));
    if (dt < dt_min) {
      stop = "blowup";
      break;
    }
    bool snap = false;
    if (lo.t + dt >= sim.spec.horizon) {
      dt = sim.spec.horizon - lo.t;
      snap = true;
    }
    const Field dw = sim.noise.sample_increment(lo.u.size(), dt, rng);
    step_imex(lo, dt, d_lo.values, dw, sim.spec, solver);
    step_imex(hi, dt, d_hi.values, dw, sim.spec, solver);
    if (snap) lo.t = hi.t = sim.spec.horizon;
    ++steps;
    if (!lo.u.allFinite() || !hi.u.allFinite()) {
      stop = "numerical_failure";
      break;
    }
    assess(lo.t);
    if (hi.u.cwiseAbs().maxCoeff() >= cfg.u_max) {
      stop = "blowup";
      break;
    }
  }
  r.passed = r.violations == 0;
  std::ostringstream d;
  d << "max(u - u_shifted, -u) over max(1, ||u||_inf); delta = " << delta << "; " << steps << " steps; stopped at "
    << stop << " (t = " << lo.t << ")";
  r.detail = d.str();
  return r;
}

// ----------------------------------------------------------- boundary ratio

double boundary_ratio(const Field& u, const ProblemSpec& spec, const Grid& grid, const std::vector<bool>& inner) {
  if (u.size() != grid.size() || inner.size() != static_cast<std::size_t>(grid.size())) {
    throw ShapeError("boundary ratio inputs do not match the grid");
  }
  double top = -std::numeric_limits<double>::infinity();
  Field logf(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    logf[i] = spec.f.log_value(u[i]);
    top = std::max(top, logf[i]);
  }
  double all = 0.0;
  double in = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double e = std::exp(logf[i] - top);
    all += e;
    if (inner[static_cast<std::size_t>(i)]) in += e;
  }
  if (!(in > 0.0)) return std::numeric_limits<double>::infinity();
  return all / in;
}

CheckReport check_boundary_ratio(const std::vector<PathRecord>& paths, const ProblemSpec& spec, const Grid& grid,
                                 double margin, int ell) {
  const std::vector<bool> inner = grid.inner_subdomain(margin);
  CheckReport r;
  r.name = "boundary_ratio";
  r.tolerance = ell + 1.0;
  r.worst_margin = 0.0;
  for (const auto& rec : paths) {
    if (rec.snapshots.size() != rec.times.size()) throw ShapeError("boundary-ratio check needs field snapshots");
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
      const double q = boundary_ratio(rec.snapshots[k], spec, grid, inner);
      ++r.evaluations;
      if (q > r.tolerance) ++r.violations;
      if (q > r.worst_margin) {
        r.worst_margin = q;
        r.path = rec.path_index;
        r.t = rec.times[k];
      }
    }
  }
  r.passed = r.violations == 0 && r.evaluations > 0;
  std::ostringstream d;
  d << "sup ratio = " << r.worst_margin << ", ell_eff = " << r.worst_margin - 1.0 << ", ell = " << ell
    << ", margin = " << margin;
  r.detail = d.str();
  return r;
}

// ------------------------------------------------------- moment identities

std::vector<std::size_t> pre_blowup_interior(const EnsembleStats& stats) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k + 1 < stats.rows.size(); ++k) {
    const auto& next = stats.rows[k + 1];
    if (next.censored || next.blown > 0 || next.failed > 0) break;
    idx.push_back(k);
  }
  return idx;
}

CheckReport check_psi_identity(const EnsembleStats& stats, double lambda1, double lambda, double dt0,
                               double fraction) {
  if (stats.rows.size() < 3) throw InsufficientData("Psi identity needs at least 3 checkpoints");
  const auto idx = pre_blowup_interior(stats);
  if (idx.empty()) throw InsufficientData("no pre-blow-up checkpoint with both neighbours");

  CheckReport r;
  r.name = "psi_identity";
  r.tolerance = 1.0 - fraction;
  double worst_ratio = 0.0;
  for (std::size_t k : idx) {
    const auto& a = stats.rows[k - 1];
    const auto& c = stats.rows[k];
    const auto& b = stats.rows[k + 1];
    const double span = b.t - a.t;
    const double deriv = (b.psi.mean - a.psi.mean) / span;
    const double rhs = -lambda1 * c.psi.mean + lambda * c.drift_projection.mean;
    const double residual = deriv - rhs;
    const double se = std::sqrt((b.psi.se * b.psi.se + a.psi.se * a.psi.se) / (span * span) +
                                lambda1 * lambda1 * c.psi.se * c.psi.se +
                                lambda * lambda * c.drift_projection.se * c.drift_projection.se);
    const double allowance = 3.0 * se + 10.0 * dt0 * (1.0 + lambda1 * std::abs(rhs));
    ++r.evaluations;
    if (std::abs(residual) > allowance) ++r.violations;
    const double ratio = std::abs(residual) / allowance;
    if (ratio >= worst_ratio) {
      worst_ratio = ratio;
      r.t = c.t;
    }
  }
  r.worst_margin = static_cast<double>(r.violations) / static_cast<double>(r.evaluations);
  r.passed = r.worst_margin <= r.tolerance;
  std::ostringstream d;
  d << r.evaluations - r.violations << "/" << r.evaluations
    << " pre-blow-up checkpoints within 3 se + 10 dt0 (1 + lambda1 |rhs|); worst |residual| / allowance = "
    << worst_ratio;
  r.detail = d.str();
  return r;
}

CheckReport check_theta_inequality(const EnsembleStats& stats, double lambda1) {
  if (stats.rows.size() < 3) throw InsufficientData("theta inequality needs at least 3 checkpoints");
  const auto idx = pre_blowup_interior(stats);
  if (idx.empty()) throw InsufficientData("no pre-blow-up checkpoint with both neighbours");

  CheckReport r;
  r.name = "theta_inequality";
  r.tolerance = 0.0;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k : idx) {
    const auto& a = stats.rows[k - 1];
    const auto& c = stats.rows[k];
    const auto& b = stats.rows[k + 1];
    const double span = b.t - a.t;
    const double deriv = (b.theta.mean - a.theta.mean) / span;
    const double se = std::sqrt((b.theta.se * b.theta.se + a.theta.se * a.theta.se) / (span * span) +
                                4.0 * lambda1 * lambda1 * c.theta.se * c.theta.se);
    const double margin = -(deriv + 2.0 * lambda1 * c.theta.mean + 3.0 * se);
    ++r.evaluations;
    if (margin > r.tolerance) ++r.violations;
    if (margin > r.worst_margin) {
      r.worst_margin = margin;
      r.t = c.t;
    }
  }
  r.passed = r.violations == 0;
  r.detail = "-(dtheta/dt + 2 lambda1 theta + 3 se) at pre-blow-up checkpoints";
  return r;
}

// -------------------------------------------------------- fault injection

void inject_fault(PathRecord& record, std::size_t k, Eigen::Index node, double amount) {
  if (k >= record.snapshots.size()) throw ShapeError("fault injection: no snapshot at that index");
  if (node < 0 || node >= record.snapshots[k].size()) throw ShapeError("fault injection: node out of range");
  record.snapshots[k][node] += amount;
}

}  // namespace nlspde
