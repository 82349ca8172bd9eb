#include "nlspde/problem.hpp"

#include "nlspde/error.hpp"
#include "nlspde/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nlspde {

namespace {

double pos(double s) { return s > 0.0 ? s : 0.0; }

}  // namespace

// ---------------------------------------------------------------- Nonlinearity

Nonlinearity Nonlinearity::exponential() { return {Kind::exponential, "exp", 0.0}; }

Nonlinearity Nonlinearity::shifted_power(double p) {
  if (!(p > 1.0)) throw ConfigError("shifted power exponent p must be > 1");
  return {Kind::shifted_power, "power", p};
}

Nonlinearity Nonlinearity::constant_plus(double m) {
  if (!(m > 0.0)) throw ConfigError("constant_plus offset m must be > 0");
  return {Kind::constant_plus, "constant_plus", m};
}

Nonlinearity Nonlinearity::tabulated(std::vector<double> s, std::vector<double> f) {
  if (s.size() < 2 || s.size() != f.size()) throw ConfigError("tabulated f needs >= 2 matching (s, f) pairs");
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k] > s[k - 1])) throw ConfigError("tabulated f abscissae must be strictly increasing");
  }
  for (double v : f) {
    if (!(v > 0.0)) throw ConfigError("tabulated f values must be positive");
  }
  Nonlinearity n{Kind::tabulated, "tabulated", 0.0};
  n.table_s_ = std::move(s);
  n.table_f_ = std::move(f);
  return n;
}

const std::vector<std::string>& Nonlinearity::registry() {
  static const std::vector<std::string> names{"exp", "power", "constant_plus", "tabulated"};
  return names;
}

double Nonlinearity::value(double s) const {
  switch (kind_) {
    case Kind::exponential:
      return std::exp(s);
    case Kind::shifted_power:
      return std::pow(1.0 + pos(s), param_);
    case Kind::constant_plus:
      return param_ + pos(s) * pos(s);
    case Kind::tabulated: {
      const auto& xs = table_s_;
      const auto& ys = table_f_;
      std::size_t k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), s) - xs.begin());
      k = std::clamp<std::size_t>(k, 1, xs.size() - 1);
      const double t = (s - xs[k - 1]) / (xs[k] - xs[k - 1]);
      return ys[k - 1] + t * (ys[k] - ys[k - 1]);
    }
  }
  return 0.0;
}

double Nonlinearity::log_value(double s) const {
  switch (kind_) {
    case Kind::exponential:
      return s;
    case Kind::shifted_power:
      return param_ * std::log1p(pos(s));
    default:
      return std::log(value(s));
  }
}

double Nonlinearity::derivative(double s) const {
  switch (kind_) {
    case Kind::exponential:
      return std::exp(s);
    case Kind::shifted_power:
      return s > 0.0 ? param_ * std::pow(1.0 + s, param_ - 1.0) : 0.0;
    case Kind::constant_plus:
      return 2.0 * pos(s);
    case Kind::tabulated: {
      const auto& xs = table_s_;
      std::size_t k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), s) - xs.begin());
      k = std::clamp<std::size_t>(k, 1, xs.size() - 1);
      return (table_f_[k] - table_f_[k - 1]) / (xs[k] - xs[k - 1]);
    }
  }
  return 0.0;
}

// -------------------------------------------------------- DiffusionCoefficient

DiffusionCoefficient DiffusionCoefficient::linear(double c) { return {Kind::linear, "linear", c, 0.0}; }

DiffusionCoefficient DiffusionCoefficient::power(double c, double eps) {
  if (!(eps > 0.0)) throw ConfigError("power sigma exponent eps must be > 0");
  return {Kind::power, "power", c, eps};
}

DiffusionCoefficient DiffusionCoefficient::constant(double c) { return {Kind::constant, "constant", c, 0.0}; }

const std::vector<std::string>& DiffusionCoefficient::registry() {
  static const std::vector<std::string> names{"linear", "power", "constant", "none"};
  return names;
}

double DiffusionCoefficient::value(double s) const {
  switch (kind_) {
    case Kind::linear:
      return c_ * s;
    case Kind::power:
      return c_ * std::pow(pos(s), 1.0 + eps_);
    case Kind::constant:
      return c_;
  }
  return 0.0;
}

// --------------------------------------------------------- SuperlinearEnvelope

SuperlinearEnvelope::SuperlinearEnvelope(double c, double eps) : c_(c), eps_(eps) {
  if (!(c > 0.0)) throw ConfigError("envelope coefficient c must be > 0");
  if (!(eps > 0.0)) throw ConfigError("envelope exponent eps must be > 0 (superlinear)");
}

double SuperlinearEnvelope::value(double s) const { return c_ * std::pow(pos(s), 1.0 + eps_); }

// ----------------------------------------------------------------- InitialData

const std::vector<std::string>& InitialData::registry() {
  static const std::vector<std::string> names{"constant", "eigenfunction", "sine"};
  return names;
}

std::string InitialData::name() const { return registry()[static_cast<std::size_t>(kind)]; }

Field InitialData::materialize(const Grid& grid, const Field& phi1) const {
  switch (kind) {
    case Kind::constant:
      return Field::Constant(grid.size(), scale);
    case Kind::eigenfunction:
      if (phi1.size() != grid.size()) throw ShapeError("phi_1 size does not match grid");
      return scale * phi1;
    case Kind::sine: {
      Field out(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        double v = scale;
        for (int a = 0; a < grid.dimension(); ++a) {
          v *= std::sin(std::numbers::pi * grid.coordinate(i, a) / grid.extent(a));
        }
        out[i] = v;
      }
      return out;
    }
  }
  return Field::Zero(grid.size());
}

// ----------------------------------------------------------------- ProblemSpec

void ProblemSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("q must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be > 0");
  if (!(initial.scale >= 0.0)) throw ConfigError("initial data must be >= 0 (scale >= 0)");
}

// --------------------------------------------------------------- nonlocal_drift

namespace {

template <typename Terms>
double log_sum_exp(Eigen::Index n, Terms&& term) {
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, term(i));
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(term(i) - top);
  return top + std::log(acc);
}

}  // namespace

Drift nonlocal_drift(const Field& u, const ProblemSpec& spec, const Grid& grid, const Field* phi1) {
  const Eigen::Index n = grid.size();
  if (u.size() != n) throw ShapeError("state size does not match grid");
  if (!u.allFinite()) throw NumericalFailure("non-finite value in the state");

  Field logf(n);
  for (Eigen::Index i = 0; i < n; ++i) logf[i] = spec.f.log_value(u[i]);
  const double logw = std::log(grid.weight());
  const double log_mass = log_sum_exp(n, [&](Eigen::Index i) { return logf[i] + logw; });
  if (!(log_mass > -std::numeric_limits<double>::infinity()) || std::isnan(log_mass)) {
    throw ModelError("quadrature of f(u) is not positive");
  }

  Drift d;
  d.log_mass = log_mass;
  d.K = std::exp(-spec.q * log_mass);
  d.values.resize(n);
  const double log_lambda = spec.lambda > 0.0 ? std::log(spec.lambda) : -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) d.values[i] = std::exp(log_lambda + logf[i] - spec.q * log_mass);
  if (phi1 != nullptr) {
    if (phi1->size() != n) throw ShapeError("phi_1 size does not match grid");
    const double log_wm = log_sum_exp(n, [&](Eigen::Index i) { return logf[i] + logw + std::log((*phi1)[i]); });
    d.weighted_mass = std::exp(log_wm);
    d.projection = std::exp(log_wm - spec.q * log_mass);
  }
  return d;
}

// ---------------------------------------------------- validate_growth_conditions

bool GrowthReport::passed(const std::string& name) const { return at(name).passed; }

const ConditionResult& GrowthReport::at(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return c;
  }
  throw ConfigError("no growth condition named '" + name + "'");
}

GrowthReport validate_growth_conditions(const ProblemSpec& spec, double s_lo, double s_hi, int samples) {
  if (!(s_lo < s_hi)) throw ConfigError("growth-condition range needs s_lo < s_hi");
  if (samples < 3) throw ConfigError("growth-condition check needs >= 3 samples");

  GrowthReport report;
  report.s_lo = s_lo;
  report.s_hi = s_hi;
  report.samples = samples;

  const double ds = (s_hi - s_lo) / (samples - 1);
  std::vector<double> s(samples), f(samples), g(samples), sig(samples);
  for (int k = 0; k < samples; ++k) {
    s[k] = s_lo + k * ds;
    f[k] = spec.f.value(s[k]);
    g[k] = std::exp((1.0 - spec.q) * spec.f.log_value(s[k]));
    sig[k] = spec.sigma.value(s[k]);
  }

  // Margins are normalized by the local magnitude; -1e-9 absorbs rounding.
  constexpr double slack = -1e-9;
  auto record = [&](std::string name, double worst, std::string detail) {
    report.conditions.push_back({std::move(name), worst >= slack, std::min(worst, 0.0), std::move(detail)});
  };

  double worst_pos = std::numeric_limits<double>::infinity();
  for (double v : f) worst_pos = std::min(worst_pos, v);
  report.conditions.push_back({"f_positive", worst_pos > 0.0, std::min(worst_pos, 0.0), "min f on range"});

  double worst_inc = 0.0;
  for (int k = 0; k + 1 < samples; ++k) {
    const double scale = std::abs(f[k]) + std::abs(f[k + 1]);
    if (scale > 0.0 && std::isfinite(scale)) worst_inc = std::min(worst_inc, (f[k + 1] - f[k]) / scale);
  }
  record("f_increasing", worst_inc, "first differences of f");

  auto convexity = [&](const std::vector<double>& v) {
    double worst = 0.0;
    for (int k = 1; k + 1 < samples; ++k) {
      const double scale = std::abs(v[k - 1]) + 2.0 * std::abs(v[k]) + std::abs(v[k + 1]);
      if (scale > 0.0 && std::isfinite(scale)) worst = std::min(worst, (v[k - 1] - 2.0 * v[k] + v[k + 1]) / scale);
    }
    return worst;
  };
  record("f_convex", convexity(f), "second differences of f");
  record("f_pow_convex", convexity(g), "second differences of f^(1-q)");

  const IntegralResult tail =
      improper_integral([&](double x) { return std::exp((1.0 - spec.q) * spec.f.log_value(x)); }, s_lo, 1e-8);
  {
    std::ostringstream detail;
    detail << "integral of 1/f^(1-q) over [" << s_lo << ", inf)";
    if (tail.divergent) {
      detail << " diverges";
    } else {
      detail << " = " << tail.value;
    }
    report.conditions.push_back({"tail_integrable", !tail.divergent, tail.divergent ? -1.0 : 0.0, detail.str()});
  }

  if (spec.envelope) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      if (s[k] < 0.0) continue;
      const double lhs = sig[k] * sig[k];
      const double rhs = 2.0 * spec.envelope->value(s[k] * s[k]);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      worst = std::min(worst, (lhs - rhs) / scale);
    }
    record("sigma_dominates_envelope", worst, "sigma^2(s) - 2 G(s^2) on s >= 0");
  }

  for (int k = 0; k + 1 < samples; ++k) {
    report.lipschitz_f = std::max(report.lipschitz_f, std::abs(f[k + 1] - f[k]) / ds);
    report.lipschitz_sigma = std::max(report.lipschitz_sigma, std::abs(sig[k + 1] - sig[k]) / ds);
  }
  return report;
}

}  // namespace nlspde
