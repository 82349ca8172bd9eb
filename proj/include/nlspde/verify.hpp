#pragma once

#include "nlspde/ensemble.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nlspde {

/// Outcome of one property suite. `passed` is false exactly when the worst
/// margin exceeds the tolerance.
struct CheckReport {
  std::string name;
  bool passed = true;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::optional<std::uint64_t> path;  ///< location of the worst case
  double t = 0.0;
  std::vector<double> x;
  std::size_t evaluations = 0;
  std::size_t violations = 0;
  std::string detail;
};

// ------------------------------------------------------------ max principle

/// Upper envelope M at every recorded time of one path. The envelope follows
/// M <- M + dt lambda f(M) K + sigma(M) dW_max, started at max(xi), where K is the
/// path's own non-local factor and dW_max is the largest nodal increment of the
/// step (the constant-mode increment for coordinate noise).
struct EnvelopedPath {
  PathRecord record;  ///< snapshots present
  std::vector<double> envelope;
};

std::vector<EnvelopedPath> run_enveloped_paths(const Simulation& sim, std::size_t n_paths, std::uint64_t seed,
                                               const std::vector<double>& checkpoints);

/// max_x u(x, t) <= M_t + tol at every snapshot, tol = c_tol (h^2 + dt0) max(1, M_t).
CheckReport check_max_principle(const std::vector<EnvelopedPath>& paths, const Grid& grid, double dt0,
                                double c_tol = 10.0);

// --------------------------------------------------------------------- Hopf

/// Outward normal derivative at every face boundary node at the snapshot whose time
/// is closest to t_eval must be < -tol. Throws ConfigError if a path starts from xi = 0.
CheckReport check_hopf_sign(const std::vector<PathRecord>& paths, const Grid& grid, double t_eval, double tol = 0.0);

// --------------------------------------------------------------- comparison

/// Runs xi and xi + delta in lockstep with shared increments and a shared dt.
/// margin = max over steps of max(u_1 - u_2, -u_1, -u_2) / max(1, ||u_2||_inf).
CheckReport check_comparison_positivity(const Simulation& sim, std::uint64_t seed, std::uint64_t path_index,
                                        double delta = 0.1, double tol = 1e-8);

// ----------------------------------------------------------- boundary ratio

/// quadrature_D f(u) / quadrature_D0 f(u), in log space.
double boundary_ratio(const Field& u, const ProblemSpec& spec, const Grid& grid, const std::vector<bool>& inner);

/// sup ratio <= ell + 1 over every snapshot; `detail` reports ell_eff = sup ratio - 1.
CheckReport check_boundary_ratio(const std::vector<PathRecord>& paths, const ProblemSpec& spec, const Grid& grid,
                                 double margin, int ell);

// ------------------------------------------------------- moment identities

/// Checkpoints k with a centred difference available and no blow-up up to t_{k+1}.
std::vector<std::size_t> pre_blowup_interior(const EnsembleStats& stats);

/// Centred dPsi/dt against -lambda1 Psi + lambda mean(K quadrature(f phi_1)).
/// A checkpoint passes when |residual| <= 3 se + 10 dt0 (1 + lambda1 |rhs|); the
/// suite passes when at least `fraction` of pre-blow-up checkpoints pass.
CheckReport check_psi_identity(const EnsembleStats& stats, double lambda1, double lambda, double dt0,
                               double fraction = 0.95);

/// dtheta/dt >= -2 lambda1 theta - 3 se at every pre-blow-up checkpoint.
CheckReport check_theta_inequality(const EnsembleStats& stats, double lambda1);

// -------------------------------------------------------- fault injection

/// Adds `amount` to the snapshot value of node `node` at recorded time `k`.
void inject_fault(PathRecord& record, std::size_t k, Eigen::Index node, double amount);

}  // namespace nlspde
