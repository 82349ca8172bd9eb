#pragma once

#include "nlspde/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace nlspde {

/// Per-path random stream. The generator is keyed by (master_seed, path_index)
/// through std::seed_seq, so a path sees the same draws whichever worker runs it.
/// Normals come from Box-Muller on 53-bit uniforms rather than
/// std::normal_distribution, whose output is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t path_index);

  double uniform();  ///< in (0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

struct CovarianceKernel {
  enum class Form { gaussian, constant };
  Form form = Form::gaussian;
  double amplitude = 1.0;           ///< a = q(x, x)
  double correlation_length = 0.1;  ///< l_c; unused for the constant form

  /// gaussian: a exp(-|x - y|^2 / (2 l_c^2)); constant: a.
  double operator()(const std::array<double, 2>& x, const std::array<double, 2>& y) const;
  void validate() const;
};

/// Truncated Karhunen-Loeve representation W = sum_j sqrt(gamma_j) chi_j beta_j(t).
struct KLNoise {
  std::vector<double> spectrum;  ///< every eigenvalue of the discretized operator, clipped at 0, descending
  Eigen::MatrixXd modes;         ///< N x J, column j is chi_j, orthonormal under quadrature
  Eigen::Index truncation = 0;   ///< J
  double trace = 0.0;
  double captured = 0.0;        ///< sum_{j<J} gamma_j / trace
  double clipped_mass = 0.0;    ///< total negative spectral mass removed by clipping
  double smallest_eigenvalue = 0.0;  ///< before clipping
};

/// Spatially uniform Brownian coordinates: dW(x) = sum_j c_j d beta_j for every x,
/// so sigma(u) dW = sum_j sigma_j(u) d beta_j with sigma_j = c_j sigma.
struct CoordinateNoise {
  std::vector<double> coefficients;
};

struct NoNoise {};

class NoiseModel {
 public:
  NoiseModel() = default;
  explicit NoiseModel(KLNoise kl) : model_(std::move(kl)) {}
  explicit NoiseModel(CoordinateNoise c) : model_(std::move(c)) {}

  bool is_off() const noexcept;
  const KLNoise* kl() const noexcept { return std::get_if<KLNoise>(&model_); }
  const CoordinateNoise* coordinate() const noexcept { return std::get_if<CoordinateNoise>(&model_); }
  /// Number of standard normals consumed per increment.
  Eigen::Index draws() const noexcept;
  std::string name() const;

  /// dW at every interior node over a step of length dt (> 0).
  Field sample_increment(Eigen::Index size, double dt, RngStream& rng) const;
  /// Pointwise variance of dW over a unit step.
  Field pointwise_variance(Eigen::Index size) const;

 private:
  std::variant<NoNoise, KLNoise, CoordinateNoise> model_;
};

/// Eigendecomposition of the quadrature-weighted kernel matrix, truncated at the
/// smallest J capturing at least (1 - eps_tail) of the trace. amplitude 0 gives J = 0.
NoiseModel build_kl_noise(const CovarianceKernel& kernel, const Grid& grid, double eps_tail);

/// Smallest eigenvalue of the discretized covariance operator; 0 when the
/// truncated operator is rank-deficient (J < N). Throws NotApplicable for
/// coordinate or disabled noise.
double estimate_q1(const NoiseModel& model, const Grid& grid);

/// "j,gamma" rows, j starting at 1.
void write_spectrum_csv(std::ostream& out, const NoiseModel& model);

}  // namespace nlspde
