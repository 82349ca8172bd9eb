#include "nlspde/io.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nlspde {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Json series(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Json moment_json(const Moment& m) { return Json{{"mean", number(m.mean)}, {"se", number(m.se)}}; }

}  // namespace

Json to_json(const PathRecord& r) {
  Json j;
  j["path_index"] = r.path_index;
  j["termination"] = to_string(r.termination);
  j["blew_up"] = r.blew_up;
  j["blowup_time"] = r.blowup_time ? number(*r.blowup_time) : Json(nullptr);
  j["steps"] = r.steps;
  j["t_final"] = number(r.t_final);
  j["sup_final"] = number(r.sup_final);
  j["kaplan_final"] = number(r.kaplan_final);
  j["clamp_events"] = r.clamp_events;
  j["failure"] = r.failure;
  j["times"] = series(r.times);
  j["kaplan"] = series(r.kaplan);
  j["sup_norm"] = series(r.sup_norm);
  j["l2_norm"] = series(r.l2_norm);
  j["K"] = series(r.nonlocal_factor);
  j["weighted_mass"] = series(r.weighted_mass);
  j["drift_projection"] = series(r.drift_projection);
  return j;
}

void write_jsonl(std::ostream& out, const std::vector<PathRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_stats_csv(std::ostream& out, const EnsembleStats& stats) {
  out << "t,alive,blown,failed,censored,blowup_fraction,psi,psi_se,theta,theta_se,l2,l2_se,sup,sup_se,"
         "drift_projection,drift_projection_se\n";
  for (const auto& row : stats.rows) {
    out << format_number(row.t) << ',' << row.alive << ',' << row.blown << ',' << row.failed << ','
        << (row.censored ? 1 : 0) << ',' << format_number(row.blowup_fraction);
    for (const Moment* m : {&row.psi, &row.theta, &row.l2, &row.sup, &row.drift_projection}) {
      if (row.censored) {
        out << ",,";
      } else {
        out << ',' << format_number(m->mean) << ',' << format_number(m->se);
      }
    }
    out << '\n';
  }
}

Json to_json(const EnsembleStats& stats) {
  Json j;
  j["n_paths"] = stats.n_paths;
  j["n_blown"] = stats.n_blown;
  j["n_failed"] = stats.n_failed;
  j["tobs_probabilities"] = series(stats.tobs_probabilities);
  j["tobs_quantiles"] = series(stats.tobs_quantiles);
  Json rows = Json::array();
  for (const auto& row : stats.rows) {
    Json r;
    r["t"] = number(row.t);
    r["alive"] = row.alive;
    r["blown"] = row.blown;
    r["failed"] = row.failed;
    r["censored"] = row.censored;
    r["blowup_fraction"] = number(row.blowup_fraction);
    r["psi"] = moment_json(row.psi);
    r["theta"] = moment_json(row.theta);
    r["l2"] = moment_json(row.l2);
    r["sup"] = moment_json(row.sup);
    r["drift_projection"] = moment_json(row.drift_projection);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

Json to_json(const BoundsReport& report) {
  Json j;
  j["lambda1"] = number(report.lambda1);
  if (const auto& b = report.nonlocal_lambda) {
    j["nonlocal_lambda.lambda"] = number(b->lambda);
    j["nonlocal_lambda.q"] = number(b->q);
    j["nonlocal_lambda.psi0"] = number(b->psi0);
    j["nonlocal_lambda.margin"] = number(b->margin);
    j["nonlocal_lambda.ell"] = b->ell;
    j["nonlocal_lambda.m"] = number(b->m);
    j["nonlocal_lambda.R"] = number(b->R);
    j["nonlocal_lambda.B"] = number(b->B);
    j["nonlocal_lambda.B_argmax"] = number(b->B_argmax);
    j["nonlocal_lambda.lambda_min"] = number(b->lambda_min);
    j["nonlocal_lambda.tail_integral"] = number(b->tail_integral);
    j["nonlocal_lambda.applicable"] = b->applicable;
    j["nonlocal_lambda.Lambda"] = b->applicable ? number(b->Lambda) : Json(nullptr);
    j["nonlocal_lambda.T_star"] = b->applicable ? number(b->T_star) : Json(nullptr);
    j["nonlocal_lambda.note"] = b->note;
  }
  if (const auto& b = report.nonlocal_data) {
    j["nonlocal_data.lambda"] = number(b->lambda);
    j["nonlocal_data.R"] = number(b->R);
    j["nonlocal_data.psi0"] = number(b->psi0);
    j["nonlocal_data.zeta"] = number(b->zeta);
    j["nonlocal_data.root_found"] = b->root_found;
    j["nonlocal_data.applicable"] = b->applicable;
    j["nonlocal_data.Lambda1"] = b->applicable ? number(b->Lambda1) : Json(nullptr);
    j["nonlocal_data.T_star"] = b->applicable ? number(b->T_star) : Json(nullptr);
    j["nonlocal_data.note"] = b->note;
  }
  if (const auto& b = report.noise) {
    j["noise.theta0"] = number(b->theta0);
    j["noise.q1"] = number(b->q1);
    j["noise.measure"] = number(b->measure);
    j["noise.q1_hat"] = number(b->q1_hat);
    j["noise.q1_hat_convention"] = "q1 / |D|";
    j["noise.G_coefficient"] = number(b->G_coefficient);
    j["noise.G_exponent"] = number(b->G_exponent);
    j["noise.gamma"] = number(b->gamma);
    j["noise.root_found"] = b->root_found;
    j["noise.applicable"] = b->applicable;
    j["noise.T_star"] = b->applicable ? number(b->T_star) : Json(nullptr);
    j["noise.note"] = b->note;
  } else if (!report.noise_skipped.empty()) {
    j["noise.skipped"] = report.noise_skipped;
  }
  return j;
}

std::string render_table(const BoundsReport& report) {
  const Json j = to_json(report);
  std::size_t width = 0;
  for (const auto& [key, value] : j.items()) width = std::max(width, key.size());
  std::ostringstream out;
  for (const auto& [key, value] : j.items()) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << key;
    if (value.is_number_float()) {
      out << format_number(value.get<double>());
    } else if (value.is_string()) {
      out << value.get<std::string>();
    } else {
      out << value.dump();
    }
    out << '\n';
  }
  return out.str();
}

Json to_json(const CheckReport& r) {
  Json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["worst_margin"] = number(r.worst_margin);
  j["tolerance"] = number(r.tolerance);
  j["path"] = r.path ? Json(*r.path) : Json(nullptr);
  j["t"] = number(r.t);
  j["x"] = series(r.x);
  j["evaluations"] = r.evaluations;
  j["violations"] = r.violations;
  j["detail"] = r.detail;
  return j;
}

Json to_json(const std::vector<CheckReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

std::string render_table(const std::vector<CheckReport>& reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width) + 2) << "check" << std::setw(6) << "pass" << std::setw(25)
      << "worst_margin" << std::setw(25) << "tolerance" << "violations\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << r.name << std::setw(6) << (r.passed ? "yes" : "NO")
        << std::setw(25) << format_number(r.worst_margin) << std::setw(25) << format_number(r.tolerance)
        << r.violations << '/' << r.evaluations << '\n';
  }
  return out.str();
}

}  // namespace nlspde
