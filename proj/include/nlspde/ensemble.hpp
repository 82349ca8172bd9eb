#pragma once

#include "nlspde/integrator.hpp"

#include <cstdint>
#include <vector>

namespace nlspde {

struct EnsembleConfig {
  std::size_t n_paths = 100;
  std::uint64_t master_seed = 1;
  int worker_count = 1;
  std::vector<double> checkpoints;  ///< sorted, nonempty, inside [0, horizon]
  bool record_fields = false;

  void validate(double horizon) const;
};

/// Checkpoints t_k = k * horizon / (count - 1), k = 0..count-1.
std::vector<double> uniform_checkpoints(double horizon, int count);

/// Sample mean and its standard error over the alive paths.
struct Moment {
  double mean = 0.0;
  double se = 0.0;
};

struct CheckpointStats {
  double t = 0.0;
  std::size_t alive = 0;
  std::size_t blown = 0;   ///< paths that blew up before t
  std::size_t failed = 0;  ///< paths lost to numerical failure before t
  bool censored = false;   ///< no alive path: the moments below are meaningless
  double blowup_fraction = 0.0;
  Moment psi;              ///< kaplan
  Moment theta;            ///< kaplan squared
  Moment l2;
  Moment sup;
  Moment drift_projection; ///< K quadrature(f(u) phi_1)
};

struct EnsembleStats {
  std::size_t n_paths = 0;
  std::size_t n_blown = 0;
  std::size_t n_failed = 0;
  std::vector<CheckpointStats> rows;
  std::vector<double> tobs_probabilities{0.05, 0.25, 0.5, 0.75, 0.95};
  std::vector<double> tobs_quantiles;  ///< empty when no path blew up
};

/// Censored moments: a path contributes to checkpoint k only if it reached t_k.
/// Throws ShapeError when a record's times disagree with `checkpoints`.
EnsembleStats estimate_moments(const std::vector<PathRecord>& records, const std::vector<double>& checkpoints);

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<PathRecord> records;  ///< in path-index order
};

/// Runs paths 0..n_paths-1 on worker_count threads. Results do not depend on the
/// worker count. Throws NumericalFailure, listing the reasons, if every path fails.
EnsembleResult run_ensemble(const Simulation& sim, const EnsembleConfig& config);

}  // namespace nlspde
