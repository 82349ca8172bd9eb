#include "nlspde/cli.hpp"

#include "nlspde/bounds.hpp"
#include "nlspde/error.hpp"
#include "nlspde/io.hpp"
#include "nlspde/spectral.hpp"
#include "nlspde/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace nlspde {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"eigen", "sim", "ensemble", "bounds", "verify"};
  return names;
}

namespace {

struct Context {
  Grid grid;
  DiscreteOperator op;
  EigenPair eigen;
  NoiseModel noise;
};

Context prepare(const RunConfig& cfg, bool with_noise) {
  Grid grid = build_grid(cfg.problem.domain);
  DiscreteOperator op = assemble_laplacian(grid);
  EigenPair eigen = principal_eigenpair(op, grid);
  NoiseModel noise = with_noise ? build_noise(cfg.noise, grid) : NoiseModel();
  return {std::move(grid), std::move(op), std::move(eigen), std::move(noise)};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string to_text(const std::vector<PathRecord>& records) {
  std::ostringstream s;
  write_jsonl(s, records);
  return s.str();
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const RunConfig& cfg,
                    const std::vector<std::string>& artifacts) {
  Json m;
  m["tool"] = "nlspde";
  m["version"] = NLSPDE_VERSION;
  m["subcommand"] = subcommand;
  m["run_id"] = cfg.run_id;
  m["master_seed"] = cfg.ensemble.master_seed;
  m["worker_count"] = cfg.ensemble.worker_count;
  m["config_source"] = cfg.source_name;
  m["config_text"] = cfg.source_text;
  m["resolved_config"] = to_json(cfg);
  m["artifacts"] = artifacts;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

double initial_kaplan(const RunConfig& cfg, const Context& ctx) {
  const Field xi = cfg.problem.initial.materialize(ctx.grid, ctx.eigen.vector);
  return quadrature(xi.cwiseProduct(ctx.eigen.vector), ctx.grid);
}

BoundsReport compute_bounds(const RunConfig& cfg, const Context& ctx) {
  BoundsReport report;
  report.lambda1 = ctx.eigen.value;
  const double psi0 = cfg.bounds.psi0.value_or(initial_kaplan(cfg, ctx));
  const double margin = cfg.bounds.margin.value_or(default_margin(ctx.grid));
  const int ell = cfg.bounds.ell.value_or(default_cover_count(ctx.grid.dimension()));
  report.nonlocal_lambda = bound_nonlocal_lambda(cfg.problem, ctx.grid, ctx.eigen, psi0, margin, ell);
  report.nonlocal_data = bound_nonlocal_data(cfg.problem, ctx.eigen.value, report.nonlocal_lambda->R, psi0);

  if (!cfg.problem.envelope) {
    report.noise_skipped = "no envelope G configured";
  } else if (!ctx.noise.kl()) {
    report.noise_skipped = "noise bound needs Karhunen-Loeve noise";
  } else {
    const double theta0 = cfg.bounds.theta0.value_or(psi0 * psi0);
    try {
      report.noise = bound_noise(theta0, *cfg.problem.envelope, estimate_q1(ctx.noise, ctx.grid),
                                 ctx.grid.measure(), ctx.eigen.value);
    } catch (const NotApplicable& e) {
      report.noise_skipped = e.what();
    }
  }
  return report;
}

CheckReport merge(std::vector<CheckReport> parts) {
  CheckReport out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto& p = parts[k];
    out.evaluations += p.evaluations;
    out.violations += p.violations;
    out.passed = out.passed && p.passed;
    if (p.worst_margin > out.worst_margin) {
      out.worst_margin = p.worst_margin;
      out.path = p.path;
      out.t = p.t;
      out.x = p.x;
      out.detail = p.detail;
    }
  }
  return out;
}

bool wanted(const RunConfig& cfg, const std::string& check) {
  const auto& c = cfg.verify.checks;
  return c.empty() || std::find(c.begin(), c.end(), check) != c.end();
}

}  // namespace

int dispatch(const std::string& subcommand, RunConfig& cfg, std::ostream& out) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    throw ConfigError("unknown subcommand \"" + subcommand + "\"");
  }
  if (cfg.run_id.empty()) {
    const std::string stem = cfg.source_name.empty() ? "run" : fs::path(cfg.source_name).stem().string();
    cfg.run_id = stem + "-" + subcommand;
  }
  const fs::path dir = fs::path(cfg.output_dir) / cfg.run_id;
  fs::create_directories(dir);

  const bool needs_noise = subcommand != "eigen";
  const Context ctx = prepare(cfg, needs_noise);
  const Simulation sim{cfg.problem, cfg.stepper, ctx.grid, ctx.op, ctx.eigen, ctx.noise};

  if (subcommand == "eigen") {
    std::ostringstream summary;
    summary << "lambda1,residual,iterations,nodes,quadrature_phi1\n"
            << format_number(ctx.eigen.value) << ',' << format_number(ctx.eigen.residual) << ','
            << ctx.eigen.iterations << ',' << ctx.grid.size() << ','
            << format_number(quadrature(ctx.eigen.vector, ctx.grid)) << '\n';
    write_file(dir / "eigen.csv", summary.str());
    std::ostringstream field;
    write_field_csv(field, ctx.grid, {"phi1"}, {&ctx.eigen.vector});
    write_file(dir / "phi1.csv", field.str());
    write_manifest(dir, subcommand, cfg, {"eigen.csv", "phi1.csv"});
    out << "lambda1 = " << format_number(ctx.eigen.value) << "\n";
    return 0;
  }

  if (subcommand == "sim") {
    const PathRecord rec = integrate_path(sim, 0, cfg.ensemble.master_seed);
    write_file(dir / "paths.jsonl", to_text({rec}));
    write_manifest(dir, subcommand, cfg, {"paths.jsonl"});
    out << "termination = " << to_string(rec.termination) << ", t_final = " << format_number(rec.t_final)
        << ", steps = " << rec.steps << "\n";
    return 0;
  }

  if (subcommand == "ensemble") {
    const EnsembleResult res = run_ensemble(sim, cfg.ensemble);
    std::ostringstream csv;
    write_stats_csv(csv, res.stats);
    write_file(dir / "stats.csv", csv.str());
    write_file(dir / "paths.jsonl", to_text(res.records));
    write_manifest(dir, subcommand, cfg, {"stats.csv", "paths.jsonl"});
    out << res.stats.n_paths << " paths, " << res.stats.n_blown << " blew up, " << res.stats.n_failed
        << " failed\n";
    return 0;
  }

  if (subcommand == "bounds") {
    const BoundsReport report = compute_bounds(cfg, ctx);
    write_file(dir / "bounds.json", to_json(report).dump(2) + "\n");
    write_manifest(dir, subcommand, cfg, {"bounds.json"});
    out << render_table(report);
    return 0;
  }

  // verify
  std::vector<CheckReport> reports;
  const double margin = cfg.bounds.margin.value_or(default_margin(ctx.grid));
  const int ell = cfg.bounds.ell.value_or(default_cover_count(ctx.grid.dimension()));

  if (wanted(cfg, "psi_identity") || wanted(cfg, "theta_inequality")) {
    const EnsembleResult res = run_ensemble(sim, cfg.ensemble);
    if (wanted(cfg, "psi_identity")) {
      reports.push_back(check_psi_identity(res.stats, ctx.eigen.value, cfg.problem.lambda, cfg.stepper.dt0));
    }
    if (wanted(cfg, "theta_inequality")) reports.push_back(check_theta_inequality(res.stats, ctx.eigen.value));
  }
  if (wanted(cfg, "hopf_sign") || wanted(cfg, "boundary_ratio")) {
    EnsembleConfig fields = cfg.ensemble;
    fields.n_paths = cfg.verify.n_paths;
    fields.record_fields = true;
    const EnsembleResult res = run_ensemble(sim, fields);
    if (wanted(cfg, "hopf_sign")) {
      const double t_eval = cfg.verify.t_eval.value_or(0.5 * cfg.problem.horizon);
      reports.push_back(check_hopf_sign(res.records, ctx.grid, t_eval));
    }
    if (wanted(cfg, "boundary_ratio")) {
      reports.push_back(check_boundary_ratio(res.records, cfg.problem, ctx.grid, margin, ell));
    }
  }
  if (wanted(cfg, "max_principle")) {
    const auto paths = run_enveloped_paths(sim, cfg.verify.n_paths, cfg.ensemble.master_seed, cfg.ensemble.checkpoints);
    reports.push_back(check_max_principle(paths, ctx.grid, cfg.stepper.dt0, cfg.verify.c_tol));
  }
  if (wanted(cfg, "comparison_positivity")) {
    std::vector<CheckReport> parts;
    for (std::size_t p = 0; p < cfg.verify.n_paths; ++p) {
      parts.push_back(check_comparison_positivity(sim, cfg.ensemble.master_seed, p, cfg.verify.delta));
    }
    reports.push_back(merge(std::move(parts)));
  }

  write_file(dir / "checks.json", to_json(reports).dump(2) + "\n");
  write_manifest(dir, subcommand, cfg, {"checks.json"});
  out << render_table(reports);
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
  return ok ? 0 : 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and verification harness for non-local stochastic parabolic problems", "nlspde"};
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  app.add_option("subcommand", subcommand, "eigen | sim | ensemble | bounds | verify")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "TOML run configuration")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output root directory (overrides the config)");
  app.set_version_flag("--version", NLSPDE_VERSION);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << NLSPDE_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    RunConfig cfg = parse_config_file(config_path);
    if (seed) cfg.ensemble.master_seed = *seed;
    if (workers) cfg.ensemble.worker_count = *workers;
    if (out_dir) cfg.output_dir = *out_dir;
    return dispatch(subcommand, cfg, out);
  } catch (const Error& e) {
    err << Json{{"error", e.kind()}, {"message", e.what()}, {"subcommand", subcommand}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << Json{{"error", "internal"}, {"message", e.what()}, {"subcommand", subcommand}}.dump() << "\n";
    return 3;
  }
}

}  // namespace nlspde
