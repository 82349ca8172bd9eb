#pragma once

#include "nlspde/noise.hpp"
#include "nlspde/problem.hpp"
#include "nlspde/spectral.hpp"

#include <Eigen/SparseCholesky>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlspde {

struct StepperConfig {
  double dt0 = 1e-4;
  double c_adapt = 0.5;     ///< dt = min(dt0, c_adapt / (1 + ||F(u)||_inf))
  double u_max = 1e6;       ///< blow-up threshold on ||u||_inf
  long max_steps = 50'000'000;
  int stride = 10;          ///< steps between records when no checkpoint grid is given
  double dt_min_factor = 1e-8;  ///< stall floor dt_min = dt0 * dt_min_factor
  int fit_window = 8;

  void validate() const;
};

enum class Termination { horizon, blowup_threshold, blowup_overflow, stalled, numerical_failure, max_steps };

std::string to_string(Termination t);

struct State {
  double t = 0.0;
  Field u;
};

struct PathRecord {
  std::uint64_t path_index = 0;
  std::vector<double> times;
  std::vector<double> kaplan;            ///< quadrature(u phi_1)
  std::vector<double> sup_norm;
  std::vector<double> l2_norm;
  std::vector<double> nonlocal_factor;   ///< K(t)
  std::vector<double> weighted_mass;     ///< quadrature(f(u) phi_1)
  std::vector<double> drift_projection;  ///< K(t) quadrature(f(u) phi_1)
  std::vector<Field> snapshots;          ///< u at each recorded time, when requested

  bool blew_up = false;
  std::optional<double> blowup_time;
  Termination termination = Termination::horizon;
  long steps = 0;
  double t_final = 0.0;
  double sup_final = 0.0;
  double kaplan_final = 0.0;
  std::uint64_t clamp_events = 0;  ///< node-steps where a power-type f or sigma saw u < 0
  std::string failure;             ///< message for numerical failures
};

/// Solves (I + dt A) x = b. Keeps the factorization for dt0 and for the last other dt.
/// Not thread-safe; each worker owns one.
class ImplicitSolver {
 public:
  ImplicitSolver(const DiscreteOperator& op, double dt0);
  Field solve(double dt, const Field& rhs);

 private:
  using Factor = Eigen::SimplicialLDLT<SparseMatrix>;
  void factor(Factor& f, double dt);

  const DiscreteOperator* op_;
  SparseMatrix identity_;
  double dt0_;
  Factor base_;
  Factor other_;
  double other_dt_ = -1.0;
};

/// The immutable inputs shared by every path of a run.
struct Simulation {
  const ProblemSpec& spec;
  const StepperConfig& stepper;
  const Grid& grid;
  const DiscreteOperator& op;
  const EigenPair& eigen;
  const NoiseModel& noise;
};

/// u_{n+1} solves (I + dt A) u_{n+1} = u_n + dt F(u_n) + sigma(u_n) dW pointwise.
void step_imex(State& state, double dt, const Field& drift, const Field& increment, const ProblemSpec& spec,
               ImplicitSolver& solver);

/// Convenience form that evaluates the drift and draws the increment itself.
void step_imex(State& state, double dt, const Simulation& sim, ImplicitSolver& solver, RngStream& rng);

struct StepEvent {
  double t_before;
  double dt;
  const Field& u_before;
  const Field& increment;
  const Field& drift;
  double K;  ///< non-local factor at u_before
  const Field& u_after;
};

struct PathOptions {
  /// Record times; empty means every `stride` steps plus the final state.
  std::vector<double> checkpoints;
  bool record_fields = false;
  /// Replaces the initial datum of the spec when set.
  std::optional<Field> initial;
  std::function<void(const StepEvent&)> observer;
};

/// Integrates one path until the horizon, blow-up, stall, failure or max_steps.
PathRecord integrate_path(const Simulation& sim, std::uint64_t path_index, std::uint64_t master_seed,
                          const PathOptions& options = {});

/// Crossing time estimate: first index where sup >= u_max, then the root of a
/// least-squares line through 1/sup over the last `fit_window` points up to it,
/// clamped to [t_k, t_k + (t_k - t_{k-1}) fit_window]. nullopt without a crossing.
std::optional<double> detect_blowup(std::span<const double> times, std::span<const double> sup, double u_max,
                                    int fit_window);

}  // namespace nlspde
