#include "nlspde/error.hpp"
#include "nlspde/integrator.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace nlspde;
using fixture::Setup;

TEST_CASE("stepper validation") {
  StepperConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt0 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.fit_window = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.dt_min_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("implicit step solves (I + dt A) u+ = u + dt F + sigma(u) dW") {
  const Grid g = build_grid({2, {1.0, 1.0}, {5}});
  const DiscreteOperator op = assemble_laplacian(g);
  ProblemSpec spec;
  spec.sigma = DiffusionCoefficient::linear(0.3);
  ImplicitSolver solver(op, 1e-3);
  for (double dt : {1e-3, 2.5e-4, 2.5e-4, 1e-3}) {
    State s{0.0, Field::LinSpaced(25, 0.1, 2.0)};
    const Field u0 = s.u;
    const Field drift = Field::Constant(25, 0.7);
    const Field dw = Field::LinSpaced(25, -0.01, 0.01);
    step_imex(s, dt, drift, dw, spec, solver);
    const Field rhs = u0 + dt * drift + 0.3 * u0.cwiseProduct(dw);
    const Field lhs = s.u + dt * (op.matrix * s.u);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.t == doctest::Approx(dt));
  }
}

TEST_CASE("pure heat flow decays the principal mode at the implicit-Euler rate") {
  ProblemSpec spec = fixture::line_problem(63, 0.0, 0.05);
  spec.initial = {InitialData::Kind::eigenfunction, 2.0};
  StepperConfig st;
  st.dt0 = 1e-3;
  const Setup s(spec, st);
  const std::vector<double> cps{0.0, 0.01, 0.02, 0.05};
  const PathRecord r = integrate_path(s.sim(), 0, 1, {cps, true, std::nullopt, {}});
  REQUIRE(r.times.size() == cps.size());
  CHECK(r.termination == Termination::horizon);
  CHECK_FALSE(r.blew_up);
  const double lambda1 = oracle::discrete_lambda1(63);
  for (std::size_t k = 0; k < cps.size(); ++k) {
    CHECK(r.times[k] == cps[k]);
    const double steps = std::round(cps[k] / st.dt0);
    const double expected = 2.0 * std::pow(1.0 + st.dt0 * lambda1, -steps);
    CHECK(r.kaplan[k] == doctest::Approx(expected * quadrature(s.eigen.vector.cwiseAbs2(), s.grid)).epsilon(1e-9));
  }
}

TEST_CASE("single node: the drift is lambda / w and the recurrence is exact") {
  ProblemSpec spec = fixture::line_problem(1, 2.0, 0.01);
  spec.q = 1.0;
  spec.initial = {InitialData::Kind::constant, 0.3};
  StepperConfig st;
  st.dt0 = 1e-3;
  st.c_adapt = 1e6;
  st.stride = 1;
  const Setup s(spec, st);
  const PathRecord r = integrate_path(s.sim(), 0, 1);
  double u = 0.3;
  const double w = 0.5;
  for (std::size_t k = 1; k < r.times.size(); ++k) {
    const double dt = r.times[k] - r.times[k - 1];
    u = (u + dt * 2.0 / w) / (1.0 + dt * 8.0);
    CHECK(r.sup_norm[k] == doctest::Approx(u).epsilon(1e-12));
  }
  CHECK(r.times.size() >= 11u);
  CHECK(r.times.back() == 0.01);
}

TEST_CASE("deterministic positivity and the maximum principle without forcing") {
  ProblemSpec spec = fixture::line_problem(31, 0.0, 0.1);
  spec.initial = {InitialData::Kind::sine, 1.5};
  const Setup s(spec);
  const PathRecord r = integrate_path(s.sim(), 0, 1, {{}, true, std::nullopt, {}});
  for (std::size_t k = 1; k < r.sup_norm.size(); ++k) {
    CHECK(r.sup_norm[k] <= r.sup_norm[k - 1] + 1e-15);
    CHECK(r.snapshots[k].minCoeff() >= 0.0);
  }
}

TEST_CASE("paths are reproducible and keyed by index") {
  ProblemSpec spec = fixture::line_problem(31, 1.0, 0.02);
  spec.sigma = DiffusionCoefficient::linear(0.5);
  spec.initial = {InitialData::Kind::sine, 1.0};
  const Grid g = build_grid(spec.domain);
  const Setup s(spec, {}, build_kl_noise({CovarianceKernel::Form::gaussian, 1.0, 0.1}, g, 1e-6));
  const PathRecord a = integrate_path(s.sim(), 3, 9);
  const PathRecord b = integrate_path(s.sim(), 3, 9);
  const PathRecord c = integrate_path(s.sim(), 4, 9);
  CHECK(a.kaplan == b.kaplan);
  CHECK(a.sup_norm == b.sup_norm);
  CHECK(a.kaplan != c.kaplan);
}

TEST_CASE("deterministic blow-up is detected and timed") {
  ProblemSpec spec = fixture::line_problem(63, 35.0, 0.1);
  spec.initial = {InitialData::Kind::constant, 1.0};
  const Setup s(spec);
  const PathRecord r = integrate_path(s.sim(), 0, 1);
  CHECK(r.blew_up);
  REQUIRE(r.blowup_time.has_value());
  CHECK(*r.blowup_time > 0.02);
  CHECK(*r.blowup_time < 0.04);
  CHECK(*r.blowup_time >= r.t_final);
  CHECK(r.termination != Termination::horizon);
}

TEST_CASE("subcritical lambda reaches the horizon") {
  ProblemSpec spec = fixture::line_problem(63, 2.0, 0.2);
  spec.initial = {InitialData::Kind::constant, 0.5};
  const Setup s(spec);
  const PathRecord r = integrate_path(s.sim(), 0, 1);
  CHECK(r.termination == Termination::horizon);
  CHECK(r.t_final == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.times.back() == r.t_final);
}

TEST_CASE("detect_blowup recovers T from an exact 1/(T - t) profile") {
  const double T = 0.3;
  std::vector<double> t, u;
  for (int k = 0; k < 300; ++k) {
    t.push_back(k * 1e-3);
    u.push_back(1.0 / (T - t.back()));
  }
  const auto est = detect_blowup(t, u, 200.0, 8);
  REQUIRE(est.has_value());
  CHECK(*est == doctest::Approx(T).epsilon(1e-9));
  // extrapolation is capped at fit_window steps past the crossing
  CHECK(*detect_blowup(t, u, 50.0, 8) == doctest::Approx(0.28 + 8e-3));
  CHECK_FALSE(detect_blowup(t, u, 1e9, 8).has_value());
  CHECK(*detect_blowup(t, u, 1.0, 8) == 0.0);
}

TEST_CASE("observer sees every step and steps land on checkpoints") {
  ProblemSpec spec = fixture::line_problem(15, 1.0, 0.01);
  StepperConfig st;
  st.dt0 = 3e-4;
  const Setup s(spec, st);
  long seen = 0;
  double t_last = 0.0;
  PathOptions opt;
  opt.checkpoints = {0.0, 0.005, 0.01};
  opt.observer = [&](const StepEvent& e) {
    ++seen;
    CHECK(e.t_before == doctest::Approx(t_last));
    t_last = e.t_before + e.dt;
  };
  const PathRecord r = integrate_path(s.sim(), 0, 1, opt);
  CHECK(seen == r.steps);
  CHECK(r.times == opt.checkpoints);
}

TEST_CASE("invalid inputs") {
  ProblemSpec spec = fixture::line_problem(7, 1.0, 0.01);
  const Setup s(spec);
  PathOptions opt;
  opt.initial = Field::Constant(7, -1.0);
  CHECK_THROWS_AS(integrate_path(s.sim(), 0, 1, opt), ConfigError);
  opt.initial = Field::Constant(6, 1.0);
  CHECK_THROWS_AS(integrate_path(s.sim(), 0, 1, opt), ShapeError);
  opt.initial.reset();
  opt.checkpoints = {0.0, 0.5};
  CHECK_THROWS_AS(integrate_path(s.sim(), 0, 1, opt), ConfigError);
  CHECK(to_string(Termination::stalled) == "stalled_near_blowup");
}
