#include "nlspde/ensemble.hpp"

#include "nlspde/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace nlspde {

void EnsembleConfig::validate(double horizon) const {
  if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
  if (checkpoints.empty()) throw ConfigError("checkpoints must not be empty");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 0.0 || checkpoints[k] > horizon) throw ConfigError("checkpoints must lie in [0, horizon]");
    if (k > 0 && !(checkpoints[k] > checkpoints[k - 1])) throw ConfigError("checkpoints must be strictly increasing");
  }
}

std::vector<double> uniform_checkpoints(double horizon, int count) {
  if (count < 2) throw ConfigError("need at least 2 checkpoints");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = horizon * k / (count - 1);
  out.back() = horizon;
  return out;
}

namespace {

// Shifted two-pass moments: identical samples give a standard error of exactly 0.
Moment moment(const std::vector<double>& x) {
  Moment m;
  if (x.empty()) return m;
  const double shift = x.front();
  double s = 0.0;
  for (double v : x) s += v - shift;
  const double n = static_cast<double>(x.size());
  const double dmean = s / n;
  m.mean = shift + dmean;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - shift - dmean) * (v - shift - dmean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

double quantile(std::vector<double> sorted, double p) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

EnsembleStats estimate_moments(const std::vector<PathRecord>& records, const std::vector<double>& checkpoints) {
  EnsembleStats stats;
  stats.n_paths = records.size();
  std::vector<double> tobs;
  for (const auto& r : records) {
    if (r.times.size() > checkpoints.size()) throw ShapeError("record has more times than checkpoints");
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      if (r.times[k] != checkpoints[k]) throw ShapeError("record times do not match the checkpoint grid");
    }
    if (r.blew_up) {
      ++stats.n_blown;
      if (r.blowup_time) tobs.push_back(*r.blowup_time);
    }
    if (r.termination == Termination::numerical_failure) ++stats.n_failed;
  }

  std::vector<double> psi, theta, l2, sup, proj;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    CheckpointStats row;
    row.t = checkpoints[k];
    psi.clear();
    theta.clear();
    l2.clear();
    sup.clear();
    proj.clear();
    for (const auto& r : records) {
      if (k < r.times.size()) {
        psi.push_back(r.kaplan[k]);
        theta.push_back(r.kaplan[k] * r.kaplan[k]);
        l2.push_back(r.l2_norm[k]);
        sup.push_back(r.sup_norm[k]);
        proj.push_back(r.drift_projection[k]);
      } else if (r.blew_up) {
        ++row.blown;
      } else if (r.termination == Termination::numerical_failure) {
        ++row.failed;
      }
    }
    row.alive = psi.size();
    row.censored = row.alive == 0;
    row.blowup_fraction = records.empty() ? 0.0 : static_cast<double>(row.blown) / static_cast<double>(records.size());
    row.psi = moment(psi);
    row.theta = moment(theta);
    row.l2 = moment(l2);
    row.sup = moment(sup);
    row.drift_projection = moment(proj);
    stats.rows.push_back(row);
  }
  if (!tobs.empty()) {
    for (double p : stats.tobs_probabilities) stats.tobs_quantiles.push_back(quantile(tobs, p));
  }
  return stats;
}

EnsembleResult run_ensemble(const Simulation& sim, const EnsembleConfig& config) {
  config.validate(sim.spec.horizon);
  const std::size_t n = config.n_paths;
  std::vector<PathRecord> records(n);
  std::vector<std::exception_ptr> errors(n);

  PathOptions options;
  options.checkpoints = config.checkpoints;
  options.record_fields = config.record_fields;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        records[i] = integrate_path(sim, i, config.master_seed, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.worker_count), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t failed = 0;
  std::ostringstream reasons;
  for (const auto& r : records) {
    if (r.termination == Termination::numerical_failure) {
      ++failed;
      if (failed <= 10) reasons << "; path " << r.path_index << ": " << r.failure;
    }
  }
  if (failed == n) throw NumericalFailure("every path failed" + reasons.str());

  EnsembleResult out;
  out.stats = estimate_moments(records, config.checkpoints);
  out.records = std::move(records);
  return out;
}

}  // namespace nlspde
