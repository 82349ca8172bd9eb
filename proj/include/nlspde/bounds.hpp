#pragma once

#include "nlspde/problem.hpp"
#include "nlspde/spectral.hpp"

#include <optional>
#include <string>

namespace nlspde {

/// Default boundary-cover count: 2 on an interval, 8 on a rectangle.
int default_cover_count(int dimension);
/// Default inner margin: 0.1 times the shortest extent.
double default_margin(const Grid& grid);

/// m = min of phi_1 over D0 = {dist(x, boundary) >= margin}.
double inner_minimum(const Field& phi1, const Grid& grid, double margin);

struct NonlocalLambdaBound {
  double lambda = 0.0;
  double q = 0.0;
  double psi0 = 0.0;
  double margin = 0.0;
  int ell = 0;
  double lambda1 = 0.0;
  double m = 0.0;
  double R = 0.0;             ///< (m / (ell + 1))^q
  double B = 0.0;             ///< sup_{s > psi0} s / f^(1-q)(s)
  double B_argmax = 0.0;
  double lambda_min = 0.0;    ///< lambda1 B / R
  double tail_integral = 0.0; ///< integral of 1/f^(1-q) over [psi0, inf)
  bool applicable = false;
  double Lambda = 0.0;        ///< lambda R - lambda1 B
  double T_star = 0.0;        ///< tail_integral / Lambda
  std::string note;
};

struct NonlocalDataBound {
  double lambda = 0.0;
  double R = 0.0;
  double psi0 = 0.0;
  double lambda1 = 0.0;
  double zeta = 0.0;          ///< largest root of alpha; 0 when alpha > 0 everywhere
  bool root_found = false;
  bool applicable = false;
  double Lambda1 = 0.0;       ///< inf_{s >= psi0} alpha(s) / f^(1-q)(s)
  double tail_integral = 0.0;
  double T_star = 0.0;
  std::string note;
};

struct NoiseBound {
  double theta0 = 0.0;
  double q1 = 0.0;
  double measure = 0.0;
  double q1_hat = 0.0;        ///< q1 / |D|
  double lambda1 = 0.0;
  double G_coefficient = 0.0;
  double G_exponent = 0.0;
  double gamma = 0.0;         ///< largest root of beta
  bool root_found = false;
  bool applicable = false;
  double T_star = 0.0;        ///< integral of 1/G over [theta0, inf)
  std::string note;
};

/// Threshold lambda_min and the blow-up time bound for lambda > lambda_min.
/// Throws ConfigError for an empty D0, ModelError when the growth conditions fail.
NonlocalLambdaBound bound_nonlocal_lambda(const ProblemSpec& spec, const Grid& grid, const EigenPair& eigen,
                                          double psi0, double margin, int ell);

/// Largest root zeta of alpha(s) = lambda R f^(1-q)(s) - lambda1 s; a bound when psi0 > zeta.
NonlocalDataBound bound_nonlocal_data(const ProblemSpec& spec, double lambda1, double R, double psi0);

/// Largest root gamma of beta(s) = 2 q1_hat G(s) - 2 lambda1 s; a bound when theta0 > gamma.
/// Throws NotApplicable when q1_hat <= 0.
NoiseBound bound_noise(double theta0, const SuperlinearEnvelope& G, double q1, double measure, double lambda1);

struct BoundsReport {
  double lambda1 = 0.0;
  std::optional<NonlocalLambdaBound> nonlocal_lambda;
  std::optional<NonlocalDataBound> nonlocal_data;
  std::optional<NoiseBound> noise;
  std::string noise_skipped;  ///< why the noise bound is absent, if it is
};

}  // namespace nlspde
