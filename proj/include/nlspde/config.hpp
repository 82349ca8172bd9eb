#pragma once

#include "nlspde/ensemble.hpp"
#include "nlspde/io.hpp"
#include "nlspde/noise.hpp"
#include "nlspde/problem.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nlspde {

struct NoiseConfig {
  enum class Kind { off, kl, coordinate };
  Kind kind = Kind::off;
  CovarianceKernel kernel;
  double eps_tail = 1e-6;
  std::vector<double> coefficients;
};

struct BoundsConfig {
  std::optional<double> margin;  ///< default 0.1 * shortest extent
  std::optional<int> ell;        ///< default 2 (interval) or 8 (rectangle)
  std::optional<double> psi0;    ///< default quadrature(xi phi_1)
  std::optional<double> theta0;  ///< default psi0^2
};

struct VerifyConfig {
  double c_tol = 10.0;
  std::size_t n_paths = 20;
  std::optional<double> t_eval;  ///< default: the checkpoint nearest horizon / 2
  double delta = 0.1;
  std::vector<std::string> checks;  ///< empty means every check

  static const std::vector<std::string>& registry();
};

struct RunConfig {
  ProblemSpec problem;
  NoiseConfig noise;
  StepperConfig stepper;
  EnsembleConfig ensemble;
  BoundsConfig bounds;
  VerifyConfig verify;
  std::string output_dir = "out";
  std::string run_id;        ///< default: "<config stem>-<subcommand>"
  std::string source_name;   ///< file the config came from
  std::string source_text;   ///< verbatim config text, echoed into manifests
};

/// Strict TOML parse: unknown keys, unknown registry names and out-of-range values
/// throw ConfigError naming the key.
RunConfig parse_config(const std::string& text, const std::string& source_name = "<text>");
RunConfig parse_config_file(const std::filesystem::path& path);

NoiseModel build_noise(const NoiseConfig& config, const Grid& grid);

/// The fully resolved configuration.
Json to_json(const RunConfig& config);

}  // namespace nlspde
