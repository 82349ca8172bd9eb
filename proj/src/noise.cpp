#include "nlspde/noise.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace nlspde {

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32),
                    0x6e6c7370u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

double CovarianceKernel::operator()(const std::array<double, 2>& x, const std::array<double, 2>& y) const {
  if (form == Form::constant) return amplitude;
  const double dx = x[0] - y[0];
  const double dy = x[1] - y[1];
  return amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * correlation_length * correlation_length));
}

void CovarianceKernel::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("kernel amplitude must be >= 0");
  if (form == Form::gaussian && !(correlation_length > 0.0)) {
    throw ConfigError("kernel correlation_length must be > 0");
  }
}

bool NoiseModel::is_off() const noexcept {
  if (std::holds_alternative<NoNoise>(model_)) return true;
  if (const auto* k = kl()) return k->truncation == 0;
  if (const auto* c = coordinate()) return c->coefficients.empty();
  return true;
}

Eigen::Index NoiseModel::draws() const noexcept {
  if (const auto* k = kl()) return k->truncation;
  if (const auto* c = coordinate()) return static_cast<Eigen::Index>(c->coefficients.size());
  return 0;
}

std::string NoiseModel::name() const {
  if (is_off()) return "off";
  return kl() ? "kl" : "coordinate";
}

Field NoiseModel::sample_increment(Eigen::Index size, double dt, RngStream& rng) const {
  if (!(dt > 0.0)) throw ConfigError("noise increment needs dt > 0");
  const double root_dt = std::sqrt(dt);
  if (const auto* k = kl()) {
    if (k->modes.rows() != size) throw ShapeError("noise modes do not match state size");
    Eigen::VectorXd z(k->truncation);
    for (Eigen::Index j = 0; j < k->truncation; ++j) z[j] = std::sqrt(k->spectrum[static_cast<std::size_t>(j)]) * rng.normal();
    return root_dt * (k->modes * z);
  }
  if (const auto* c = coordinate()) {
    double acc = 0.0;
    for (double cj : c->coefficients) acc += cj * rng.normal();
    return Field::Constant(size, root_dt * acc);
  }
  return Field::Zero(size);
}

Field NoiseModel::pointwise_variance(Eigen::Index size) const {
  if (const auto* k = kl()) {
    Field v = Field::Zero(size);
    for (Eigen::Index j = 0; j < k->truncation; ++j) {
      v += k->spectrum[static_cast<std::size_t>(j)] * k->modes.col(j).cwiseAbs2();
    }
    return v;
  }
  if (const auto* c = coordinate()) {
    double s = 0.0;
    for (double cj : c->coefficients) s += cj * cj;
    return Field::Constant(size, s);
  }
  return Field::Zero(size);
}

NoiseModel build_kl_noise(const CovarianceKernel& kernel, const Grid& grid, double eps_tail) {
  kernel.validate();
  if (!(eps_tail > 0.0 && eps_tail < 1.0)) throw ConfigError("eps_tail must lie in (0, 1)");
  const Eigen::Index n = grid.size();
  if (n < 1) throw ConfigError("cannot assemble a kernel matrix on an empty grid");

  std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i)] = {grid.coordinate(i, 0), grid.dimension() > 1 ? grid.coordinate(i, 1) : 0.0};
  }
  // Uniform weights make w * Kmat symmetric; its eigenvectors v give chi = v / sqrt(w).
  const double w = grid.weight();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      c(i, j) = c(j, i) = w * kernel(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
  }
  if (!c.allFinite()) throw ConfigError("kernel matrix contains non-finite entries");

  KLNoise kl;
  kl.trace = c.trace();
  if (kernel.amplitude == 0.0) {
    kl.spectrum.assign(static_cast<std::size_t>(n), 0.0);
    kl.modes.resize(n, 0);
    return NoiseModel(std::move(kl));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) throw SolverError("kernel eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = eig.eigenvalues();
  kl.smallest_eigenvalue = values[0];
  kl.spectrum.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g = values[n - 1 - j];
    if (g < 0.0) kl.clipped_mass += -g;
    kl.spectrum[static_cast<std::size_t>(j)] = std::max(g, 0.0);
  }
  double total = 0.0;
  for (double g : kl.spectrum) total += g;
  double acc = 0.0;
  Eigen::Index truncation = 0;
  while (truncation < n && acc < (1.0 - eps_tail) * total) {
    acc += kl.spectrum[static_cast<std::size_t>(truncation)];
    ++truncation;
  }
  // Zero modes carry no variance; dropping them keeps draws meaningful.
  while (truncation > 0 && kl.spectrum[static_cast<std::size_t>(truncation - 1)] == 0.0) --truncation;
  kl.truncation = truncation;
  kl.captured = total > 0.0 ? acc / total : 0.0;
  kl.modes.resize(n, truncation);
  const double inv_root_w = 1.0 / std::sqrt(w);
  for (Eigen::Index j = 0; j < truncation; ++j) {
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - j);
    // Fix the sign so that runs do not depend on the eigensolver's convention.
    Eigen::Index pivot;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v[pivot] < 0.0) v = -v;
    kl.modes.col(j) = inv_root_w * v;
  }
  return NoiseModel(std::move(kl));
}

double estimate_q1(const NoiseModel& model, const Grid& grid) {
  const KLNoise* k = model.kl();
  if (k == nullptr) throw NotApplicable("q1 is only defined for Karhunen-Loeve noise");
  if (k->truncation < grid.size()) return 0.0;
  return std::max(k->spectrum.back(), 0.0);
}

void write_spectrum_csv(std::ostream& out, const NoiseModel& model) {
  out << "j,gamma\n" << std::setprecision(17);
  if (const auto* k = model.kl()) {
    for (std::size_t j = 0; j < k->spectrum.size(); ++j) out << j + 1 << ',' << k->spectrum[j] << '\n';
  }
}

}  // namespace nlspde
