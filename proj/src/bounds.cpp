#include "nlspde/bounds.hpp"

#include "nlspde/error.hpp"
#include "nlspde/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlspde {

int default_cover_count(int dimension) { return dimension == 1 ? 2 : 8; }

double default_margin(const Grid& grid) {
  double shortest = grid.extent(0);
  if (grid.dimension() > 1) shortest = std::min(shortest, grid.extent(1));
  return 0.1 * shortest;
}

double inner_minimum(const Field& phi1, const Grid& grid, double margin) {
  if (phi1.size() != grid.size()) throw ShapeError("phi_1 size does not match grid");
  const std::vector<bool> mask = grid.inner_subdomain(margin);
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) m = std::min(m, phi1[i]);
  }
  return m;
}

namespace {

// f^(1-q) through logs so large s does not overflow before the ratio is formed.
ScalarFunction reduced(const ProblemSpec& spec) {
  return [&spec](double s) { return std::exp((1.0 - spec.q) * spec.f.log_value(s)); };
}

ScalarFunction ratio(const ProblemSpec& spec) {
  return [&spec](double s) { return s * std::exp(-(1.0 - spec.q) * spec.f.log_value(s)); };
}

void require_growth(const ProblemSpec& spec, double psi0) {
  if (!(spec.q < 1.0)) throw ModelError("the non-local bounds need q < 1 so that f^(1-q) grows");
  const GrowthReport g = validate_growth_conditions(spec, psi0, psi0 + 50.0, 501);
  std::string failed;
  for (const char* name : {"f_positive", "f_increasing", "f_convex", "f_pow_convex", "tail_integrable"}) {
    if (!g.passed(name)) failed += failed.empty() ? name : std::string(", ") + name;
  }
  if (!failed.empty()) throw ModelError("growth conditions fail for f = " + spec.f.name() + ": " + failed);
}

}  // namespace

NonlocalLambdaBound bound_nonlocal_lambda(const ProblemSpec& spec, const Grid& grid, const EigenPair& eigen,
                                          double psi0, double margin, int ell) {
  if (!(psi0 >= 0.0)) throw ConfigError("psi0 must be >= 0");
  if (ell < 1) throw ConfigError("ell must be >= 1");
  require_growth(spec, psi0);

  NonlocalLambdaBound b;
  b.lambda = spec.lambda;
  b.q = spec.q;
  b.psi0 = psi0;
  b.margin = margin;
  b.ell = ell;
  b.lambda1 = eigen.value;
  b.m = inner_minimum(eigen.vector, grid, margin);
  b.R = std::pow(b.m / (ell + 1), spec.q);
  if (!(b.R > 0.0 && b.R <= 1.0)) throw ModelError("R left (0, 1]; check the eigenvector normalization");

  const Supremum sup = supremum_above(ratio(spec), psi0);
  if (!sup.bounded) throw ModelError("s / f^(1-q)(s) is unbounded above psi0");
  b.B = sup.value;
  b.B_argmax = sup.argmax;
  b.lambda_min = b.lambda1 * b.B / b.R;

  const IntegralResult tail = improper_integral(reduced(spec), psi0);
  b.tail_integral = tail.value;
  if (tail.divergent) {
    b.note = "tail integral diverges";
    return b;
  }
  if (spec.lambda > b.lambda_min) {
    b.applicable = true;
    b.Lambda = spec.lambda * b.R - b.lambda1 * b.B;
    b.T_star = b.tail_integral / b.Lambda;
    b.note = "Lambda taken at its largest admissible value";
  } else {
    std::ostringstream msg;
    msg << "not applicable at this lambda: lambda = " << spec.lambda << " <= lambda_min = " << b.lambda_min;
    b.note = msg.str();
  }
  return b;
}

NonlocalDataBound bound_nonlocal_data(const ProblemSpec& spec, double lambda1, double R, double psi0) {
  if (!(R > 0.0)) throw ConfigError("R must be > 0");
  if (!(psi0 >= 0.0)) throw ConfigError("psi0 must be >= 0");
  require_growth(spec, psi0);

  NonlocalDataBound b;
  b.lambda = spec.lambda;
  b.R = R;
  b.psi0 = psi0;
  b.lambda1 = lambda1;
  if (!(spec.lambda > 0.0)) {
    b.note = "no conclusion: lambda = 0";
    return b;
  }

  const ScalarFunction g = reduced(spec);
  const ScalarFunction alpha = [&](double s) { return spec.lambda * R * g(s) - lambda1 * s; };
  const double hi = positive_upper_bound(alpha, std::max(1.0, 2.0 * psi0));
  const auto root = largest_root(alpha, hi);
  b.root_found = root.has_value();
  b.zeta = root.value_or(0.0);

  if (!(psi0 > b.zeta)) {
    std::ostringstream msg;
    msg << "no conclusion: psi0 = " << psi0 << " <= zeta = " << b.zeta;
    b.note = msg.str();
    return b;
  }
  const Supremum sup = supremum_above(ratio(spec), psi0);
  b.Lambda1 = spec.lambda * R - lambda1 * sup.value;
  const IntegralResult tail = improper_integral(g, psi0);
  b.tail_integral = tail.value;
  if (!(b.Lambda1 > 0.0) || tail.divergent) {
    b.note = "no conclusion: Lambda1 is not positive or the tail diverges";
    return b;
  }
  b.applicable = true;
  b.T_star = b.tail_integral / b.Lambda1;
  b.note = "Lambda1 = inf over s >= psi0 of alpha / f^(1-q)";
  return b;
}

NoiseBound bound_noise(double theta0, const SuperlinearEnvelope& G, double q1, double measure, double lambda1) {
  if (!(measure > 0.0)) throw ConfigError("domain measure must be > 0");
  NoiseBound b;
  b.theta0 = theta0;
  b.q1 = q1;
  b.measure = measure;
  b.q1_hat = q1 / measure;
  b.lambda1 = lambda1;
  b.G_coefficient = G.coefficient();
  b.G_exponent = G.exponent();
  if (!(b.q1_hat > 0.0)) {
    std::ostringstream msg;
    msg << "covariance lower bound not certified: q1_hat = " << b.q1_hat << " <= 0";
    throw NotApplicable(msg.str());
  }

  const ScalarFunction Gf = [&](double s) { return G.value(s); };
  const ScalarFunction beta = [&](double s) { return 2.0 * b.q1_hat * Gf(s) - 2.0 * lambda1 * s; };
  const double hi = positive_upper_bound(beta, 1.0);
  const auto root = largest_root(beta, hi);
  b.root_found = root.has_value();
  b.gamma = root.value_or(0.0);

  if (!(theta0 > b.gamma)) {
    std::ostringstream msg;
    msg << "no conclusion: theta0 = " << theta0 << " <= gamma = " << b.gamma;
    b.note = msg.str();
    return b;
  }
  const IntegralResult tail = improper_integral(Gf, theta0);
  if (tail.divergent) {
    b.note = "no conclusion: integral of 1/G diverges";
    return b;
  }
  b.applicable = true;
  b.T_star = tail.value;
  b.note = "q1_hat = q1 / |D|";
  return b;
}

}  // namespace nlspde
