#include "nlspde/error.hpp"
#include "nlspde/verify.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace nlspde;
using fixture::Setup;

namespace {

EnsembleStats smooth_stats(int rows, double dt, double rate_psi, double rate_theta) {
  EnsembleStats s;
  for (int k = 0; k < rows; ++k) {
    CheckpointStats c;
    c.t = k * dt;
    c.alive = 10;
    c.psi.mean = std::exp(-rate_psi * c.t);
    c.theta.mean = std::exp(-rate_theta * c.t);
    s.rows.push_back(c);
  }
  return s;
}

}  // namespace

TEST_CASE("max principle holds under coordinate noise and catches an injected overshoot") {
  ProblemSpec spec = fixture::line_problem(31, 0.0, 0.05);
  spec.sigma = DiffusionCoefficient::linear(0.1);
  spec.initial = {InitialData::Kind::sine, 1.0};
  const Setup s(spec, {}, NoiseModel(CoordinateNoise{{1.0}}));
  auto paths = run_enveloped_paths(s.sim(), 5, 3, uniform_checkpoints(0.05, 6));
  const CheckReport ok = check_max_principle(paths, s.grid, s.stepper.dt0);
  CHECK(ok.passed);
  CHECK(ok.evaluations == 30u);
  CHECK(ok.worst_margin <= ok.tolerance);

  Eigen::Index i;
  paths[2].record.snapshots[3].maxCoeff(&i);
  inject_fault(paths[2].record, 3, i, 2.0);
  const CheckReport bad = check_max_principle(paths, s.grid, s.stepper.dt0);
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations == 1u);
  CHECK(bad.path == 2u);
  CHECK(bad.t == paths[2].record.times[3]);
  CHECK(bad.worst_margin > bad.tolerance);
}

TEST_CASE("Hopf sign at every face node, and a negative neighbour flips it") {
  ProblemSpec spec = fixture::line_problem(31, 5.0, 0.05);
  spec.initial = {InitialData::Kind::sine, 1.0};
  const Setup s(spec);
  PathOptions opt;
  opt.checkpoints = uniform_checkpoints(0.05, 3);
  opt.record_fields = true;
  std::vector<PathRecord> recs{integrate_path(s.sim(), 0, 1, opt)};
  const CheckReport ok = check_hopf_sign(recs, s.grid, 0.025);
  CHECK(ok.passed);
  CHECK(ok.evaluations == 2u);
  CHECK(ok.worst_margin < 0.0);

  inject_fault(recs[0], 1, 0, -(recs[0].snapshots[1][0] + 1.0));
  const CheckReport bad = check_hopf_sign(recs, s.grid, 0.025);
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations == 1u);
  REQUIRE(bad.x.size() == 1u);
  CHECK(bad.x[0] == 0.0);

  ProblemSpec zero = spec;
  zero.initial = {InitialData::Kind::constant, 0.0};
  const Setup z(zero);
  std::vector<PathRecord> zr{integrate_path(z.sim(), 0, 1, opt)};
  CHECK_THROWS_AS(check_hopf_sign(zr, z.grid, 0.025), ConfigError);
}

TEST_CASE("Hopf in two dimensions covers all faces") {
  ProblemSpec spec;
  spec.domain = {2, {1.0, 1.0}, {7}};
  spec.lambda = 0.0;
  spec.horizon = 0.01;
  spec.initial = {InitialData::Kind::sine, 1.0};
  const Setup s(spec);
  PathOptions opt;
  opt.checkpoints = {0.0, 0.01};
  opt.record_fields = true;
  const CheckReport r = check_hopf_sign({integrate_path(s.sim(), 0, 1, opt)}, s.grid, 0.01);
  CHECK(r.passed);
  CHECK(r.evaluations == 28u);
}

TEST_CASE("comparison and positivity along shared increments") {
  ProblemSpec spec = fixture::line_problem(31, 10.0, 0.05);
  spec.sigma = DiffusionCoefficient::linear(0.1);
  spec.initial = {InitialData::Kind::sine, 0.5};
  const Grid g = build_grid(spec.domain);
  const Setup s(spec, {}, build_kl_noise({CovarianceKernel::Form::gaussian, 1.0, 0.1}, g, 1e-6));
  for (std::uint64_t p = 0; p < 3; ++p) {
    const CheckReport r = check_comparison_positivity(s.sim(), 7, p, 0.1);
    CHECK(r.passed);
    CHECK(r.evaluations > 100u);
    CHECK(r.worst_margin <= 1e-8);
  }
  const CheckReport same = check_comparison_positivity(s.sim(), 7, 0, 0.0);
  CHECK(same.passed);
  CHECK(same.worst_margin == 0.0);
  CHECK_THROWS_AS(check_comparison_positivity(s.sim(), 7, 0, -1.0), ConfigError);
}

TEST_CASE("boundary ratio of a constant field is the node-count ratio") {
  const Grid g = build_grid({1, {1.0}, {9}});
  ProblemSpec spec;
  const auto inner = g.inner_subdomain(0.2);
  CHECK(boundary_ratio(Field::Constant(9, 3.0), spec, g, inner) == doctest::Approx(9.0 / 7.0).epsilon(1e-14));
  // log-space evaluation survives values whose exponential overflows
  CHECK(boundary_ratio(Field::Constant(9, 900.0), spec, g, inner) == doctest::Approx(9.0 / 7.0).epsilon(1e-14));

  PathRecord rec;
  rec.times = {0.0};
  rec.snapshots = {Field::Constant(9, 1.0)};
  CHECK(check_boundary_ratio({rec}, spec, g, 0.2, 2).passed);
  inject_fault(rec, 0, 0, 50.0);  // a spike next to the boundary
  const CheckReport bad = check_boundary_ratio({rec}, spec, g, 0.2, 2);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_margin > 3.0);
}

TEST_CASE("moment identities on exact profiles") {
  const double lambda1 = oracle::pi * oracle::pi;
  const EnsembleStats s = smooth_stats(12, 1e-3, lambda1, lambda1);
  const CheckReport psi = check_psi_identity(s, lambda1, 0.0, 1e-4);
  CHECK(psi.passed);
  CHECK(psi.evaluations == 10u);
  CHECK(psi.worst_margin == 0.0);
  const CheckReport theta = check_theta_inequality(s, lambda1);
  CHECK(theta.passed);
  CHECK(theta.worst_margin < 0.0);
}

TEST_CASE("moment identities reject perturbed statistics") {
  const double lambda1 = oracle::pi * oracle::pi;
  EnsembleStats s = smooth_stats(12, 1e-3, lambda1, lambda1);
  s.rows[5].psi.mean += 0.05;
  const CheckReport psi = check_psi_identity(s, lambda1, 0.0, 1e-4);
  CHECK_FALSE(psi.passed);
  CHECK(psi.violations >= 2u);

  EnsembleStats t = smooth_stats(12, 1e-3, lambda1, lambda1);
  t.rows[6].theta.mean *= 0.5;  // a drop far faster than -2 lambda1 theta allows
  const CheckReport theta = check_theta_inequality(t, lambda1);
  CHECK_FALSE(theta.passed);
  CHECK(theta.t == doctest::Approx(0.005));
}

TEST_CASE("pre-blow-up window stops before the first blown checkpoint") {
  EnsembleStats s = smooth_stats(8, 0.01, 1.0, 1.0);
  s.rows[5].blown = 1;
  const auto idx = pre_blowup_interior(s);
  CHECK(idx == std::vector<std::size_t>{1, 2, 3});
  s.rows[2].censored = true;
  CHECK(pre_blowup_interior(s).empty());
  CHECK_THROWS_AS(check_psi_identity(s, 1.0, 0.0, 1e-4), InsufficientData);
  CHECK_THROWS_AS(check_theta_inequality(smooth_stats(2, 0.1, 1.0, 1.0), 1.0), InsufficientData);
}

TEST_CASE("fault injection bounds") {
  PathRecord r;
  r.snapshots = {Field::Zero(3)};
  CHECK_THROWS_AS(inject_fault(r, 1, 0, 1.0), ShapeError);
  CHECK_THROWS_AS(inject_fault(r, 0, 3, 1.0), ShapeError);
}
