#pragma once

#include <functional>
#include <optional>

namespace nlspde {

using ScalarFunction = std::function<double(double)>;

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
  bool divergent = false;
  int evaluations = 0;
};

/// Integral of 1/g over [b, inf) by adaptive Gauss-Kronrod (7/15) after the
/// substitution s = b + beta (e^x - 1), x = r/(1-r), r in [0,1). The tail is declared divergent
/// when s/g(s) stops decaying over the last ten doublings of s - b, or when
/// the adaptive refinement cannot meet `tol`. Throws ModelError if g <= 0.
IntegralResult improper_integral(const ScalarFunction& g, double b, double tol = 1e-10);

/// Largest root of h in (0, search_hi]. Scans downward from search_hi for the
/// first nonpositive value, then bisects to `rel_tol` relative width. Returns
/// nullopt when h > 0 on the whole scan. Throws SolverError if h(search_hi) <= 0
/// or h is not finite.
std::optional<double> largest_root(const ScalarFunction& h, double search_hi, double rel_tol = 1e-12);

/// Doubles `start` until h > 0 there; throws SolverError if h never turns positive.
double positive_upper_bound(const ScalarFunction& h, double start);

struct Supremum {
  double argmax = 0.0;
  double value = 0.0;
  double search_hi = 0.0;
  bool bounded = true;  ///< false when the objective kept growing under doubling
};

/// sup of obj over (lo, inf). The upper end is doubled until obj decreases on three
/// consecutive doublings, then the best coarse sample is refined by golden-section search.
Supremum supremum_above(const ScalarFunction& obj, double lo);

}  // namespace nlspde
