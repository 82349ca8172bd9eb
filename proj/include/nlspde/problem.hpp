#pragma once

#include "nlspde/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlspde {

/// Registry nonlinearity f. Power-type members clamp their argument to
/// s+ = max(s, 0); `clamps(s)` reports when that happens.
class Nonlinearity {
 public:
  enum class Kind { exponential, shifted_power, constant_plus, tabulated };

  static Nonlinearity exponential();
  /// f(s) = (1 + s+)^p, p > 1.
  static Nonlinearity shifted_power(double p);
  /// f(s) = m + s+^2, m > 0.
  static Nonlinearity constant_plus(double m);
  /// Piecewise-linear interpolation of (s_k, f_k), linear extrapolation outside.
  static Nonlinearity tabulated(std::vector<double> s, std::vector<double> f);
  /// Known registry names, for error messages.
  static const std::vector<std::string>& registry();

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double parameter() const noexcept { return param_; }

  double value(double s) const;
  /// log f(s), finite well past the range where f(s) itself overflows.
  double log_value(double s) const;
  double derivative(double s) const;
  bool clamps(double s) const noexcept { return s < 0.0 && (kind_ == Kind::shifted_power || kind_ == Kind::constant_plus); }

  const std::vector<double>& table_s() const noexcept { return table_s_; }
  const std::vector<double>& table_f() const noexcept { return table_f_; }

 private:
  Nonlinearity(Kind kind, std::string name, double param) : kind_(kind), name_(std::move(name)), param_(param) {}

  Kind kind_;
  std::string name_;
  double param_;
  std::vector<double> table_s_;
  std::vector<double> table_f_;
};

/// Multiplicative noise amplitude sigma(s).
class DiffusionCoefficient {
 public:
  enum class Kind { linear, power, constant };

  static DiffusionCoefficient linear(double c);
  /// sigma(s) = c * s+^(1 + eps).
  static DiffusionCoefficient power(double c, double eps);
  static DiffusionCoefficient constant(double c);
  static DiffusionCoefficient none() { return constant(0.0); }
  static const std::vector<std::string>& registry();

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double coefficient() const noexcept { return c_; }
  double exponent() const noexcept { return eps_; }
  bool vanishes() const noexcept { return c_ == 0.0; }

  double value(double s) const;

 private:
  DiffusionCoefficient(Kind kind, std::string name, double c, double eps)
      : kind_(kind), name_(std::move(name)), c_(c), eps_(eps) {}

  Kind kind_;
  std::string name_;
  double c_;
  double eps_;
};

/// G(s) = c * s+^(1 + eps): positive, increasing, convex, with an integrable reciprocal tail.
class SuperlinearEnvelope {
 public:
  SuperlinearEnvelope(double c, double eps);

  double coefficient() const noexcept { return c_; }
  double exponent() const noexcept { return eps_; }
  double value(double s) const;

 private:
  double c_;
  double eps_;
};

/// Initial datum xi >= 0.
struct InitialData {
  enum class Kind { constant, eigenfunction, sine };
  Kind kind = Kind::constant;
  double scale = 1.0;  ///< constant value, multiple of phi_1, or peak of the sine bump

  static const std::vector<std::string>& registry();
  std::string name() const;

  /// Nodal values; `phi1` is used only by Kind::eigenfunction.
  Field materialize(const Grid& grid, const Field& phi1) const;
};

struct ProblemSpec {
  double lambda = 1.0;  ///< drift strength; 0 switches the non-local term off
  double q = 0.5;       ///< non-local exponent
  Nonlinearity f = Nonlinearity::exponential();
  DiffusionCoefficient sigma = DiffusionCoefficient::none();
  std::optional<SuperlinearEnvelope> envelope;
  InitialData initial;
  double horizon = 1.0;
  DomainSpec domain;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// lambda * f(u) / (quadrature f(u))^q at every node, plus the scalar factors.
struct Drift {
  Field values;
  double K = 0.0;               ///< (quadrature f(u))^(-q)
  double log_mass = 0.0;        ///< log quadrature f(u)
  double weighted_mass = 0.0;   ///< quadrature f(u) * phi_1 (only when phi_1 given)
  double projection = 0.0;      ///< K * quadrature f(u) * phi_1, finite even when the factors are not
};

/// Evaluated in log space so that the ratio stays finite after f(u) itself overflows.
/// Throws NumericalFailure on non-finite u, ModelError if quadrature f(u) <= 0.
Drift nonlocal_drift(const Field& u, const ProblemSpec& spec, const Grid& grid, const Field* phi1 = nullptr);

struct ConditionResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  ///< most negative margin encountered (0 when every sample passes with room)
  std::string detail;
};

struct GrowthReport {
  double s_lo = 0.0;
  double s_hi = 0.0;
  int samples = 0;
  std::vector<ConditionResult> conditions;
  double lipschitz_f = 0.0;      ///< max finite-difference quotient of f on the range
  double lipschitz_sigma = 0.0;  ///< same for sigma

  bool passed(const std::string& name) const;
  const ConditionResult& at(const std::string& name) const;
};

/// Sampled checks of f' >= 0, f'' >= 0, (f^(1-q))'' >= 0, tail integrability of
/// 1/f^(1-q), and sigma^2(s) >= 2 G(s^2) when an envelope is configured.
GrowthReport validate_growth_conditions(const ProblemSpec& spec, double s_lo, double s_hi, int samples);

}  // namespace nlspde
