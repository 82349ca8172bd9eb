#include "nlspde/config.hpp"

#include "nlspde/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace nlspde {

const std::vector<std::string>& VerifyConfig::registry() {
  static const std::vector<std::string> names{"max_principle",  "hopf_sign",        "comparison_positivity",
                                              "boundary_ratio", "psi_identity",     "theta_inequality"};
  return names;
}

namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

/// Reads one TOML table and remembers which keys were consumed.
class Section {
 public:
  Section(const toml::table* table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  bool present() const { return table_ != nullptr; }
  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

  const toml::node* get(const std::string& k) {
    known_.insert(k);
    return table_ ? table_->get(k) : nullptr;
  }

  std::optional<double> real(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<double>()) return *v;
    if (auto v = n->value_exact<std::int64_t>()) return static_cast<double>(*v);
    throw ConfigError(key(k) + " must be a number");
  }
  double real(const std::string& k, double fallback) { return real(k).value_or(fallback); }
  double required_real(const std::string& k) {
    auto v = real(k);
    if (!v) throw ConfigError("missing required key " + key(k));
    return *v;
  }

  std::optional<std::int64_t> integer(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    throw ConfigError(key(k) + " must be an integer");
  }

  std::optional<std::string> text(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::string>()) return *v;
    throw ConfigError(key(k) + " must be a string");
  }

  std::optional<bool> boolean(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<bool>()) return *v;
    throw ConfigError(key(k) + " must be true or false");
  }

  std::optional<std::vector<double>> reals(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    std::vector<double> out;
    if (const toml::array* a = n->as_array()) {
      for (const auto& e : *a) {
        if (auto v = e.value_exact<double>()) {
          out.push_back(*v);
        } else if (auto i = e.value_exact<std::int64_t>()) {
          out.push_back(static_cast<double>(*i));
        } else {
          throw ConfigError(key(k) + " must be an array of numbers");
        }
      }
      return out;
    }
    if (auto v = real(k)) return std::vector<double>{*v};
    return std::nullopt;
  }

  std::optional<std::vector<std::string>> texts(const std::string& k) {
    const toml::node* n = get(k);
    if (!n) return std::nullopt;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError(key(k) + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *a) {
      auto v = e.value_exact<std::string>();
      if (!v) throw ConfigError(key(k) + " must be an array of strings");
      out.push_back(*v);
    }
    return out;
  }

  Section sub(const std::string& k) {
    const toml::node* n = get(k);
    if (n && !n->is_table()) throw ConfigError(key(k) + " must be a table");
    return Section(n ? n->as_table() : nullptr, key(k));
  }

  /// Rejects every key that was never asked for.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string name(k.str());
      if (!known_.count(name)) throw ConfigError("unknown key " + key(name));
    }
  }

 private:
  const toml::table* table_;
  std::string prefix_;
  std::set<std::string> known_;
};

template <typename T>
T positive(std::optional<T> v, T fallback, const std::string& key) {
  const T x = v.value_or(fallback);
  if (!(x > T(0))) throw ConfigError(key + " must be > 0");
  return x;
}

void parse_domain(Section s, DomainSpec& d) {
  d.dimension = static_cast<int>(s.integer("dimension").value_or(1));
  if (d.dimension != 1 && d.dimension != 2) throw ConfigError("domain.dimension must be 1 or 2");
  d.extents = s.reals("extents").value_or(std::vector<double>(static_cast<std::size_t>(d.dimension), 1.0));
  if (d.extents.size() == 1 && d.dimension == 2) d.extents.push_back(d.extents[0]);
  if (static_cast<int>(d.extents.size()) != d.dimension) throw ConfigError("domain.extents needs one entry per axis");
  for (double e : d.extents) {
    if (!(e > 0.0)) throw ConfigError("domain.extents must be > 0");
  }
  const toml::node* nodes = s.get("nodes");
  d.nodes = {d.dimension == 1 ? 255 : 63};
  if (nodes) {
    d.nodes.clear();
    auto add = [&](const toml::node& n) {
      auto v = n.value_exact<std::int64_t>();
      if (!v) throw ConfigError("domain.nodes must be an integer or an array of integers");
      if (*v < 1) throw ConfigError("domain.nodes: empty interior (need >= 1 node per axis)");
      d.nodes.push_back(static_cast<int>(*v));
    };
    if (const toml::array* a = nodes->as_array()) {
      for (const auto& e : *a) add(e);
    } else {
      add(*nodes);
    }
    if (d.nodes.empty() || static_cast<int>(d.nodes.size()) > d.dimension) {
      throw ConfigError("domain.nodes needs one entry, or one per axis");
    }
  }
  s.finish();
}

Nonlinearity parse_f(Section& parent) {
  const toml::node* n = parent.get("f");
  if (!n) throw ConfigError("missing required key problem.f");
  std::string name;
  Section s(nullptr, "problem.f");
  if (auto v = n->value_exact<std::string>()) {
    name = *v;
  } else if (n->is_table()) {
    s = Section(n->as_table(), "problem.f");
    auto v2 = s.text("name");
    if (!v2) throw ConfigError("missing required key problem.f.name");
    name = *v2;
  } else {
    throw ConfigError("problem.f must be a registry name or a table with a name");
  }
  const auto& reg = Nonlinearity::registry();
  if (std::find(reg.begin(), reg.end(), name) == reg.end()) {
    throw ConfigError("unknown nonlinearity problem.f = \"" + name + "\"; registry: " + join(reg));
  }
  Nonlinearity f = Nonlinearity::exponential();
  if (name == "power") {
    auto p = s.real("p");
    if (!p) throw ConfigError("missing required key problem.f.p");
    f = Nonlinearity::shifted_power(*p);
  } else if (name == "constant_plus") {
    auto m = s.real("m");
    if (!m) throw ConfigError("missing required key problem.f.m");
    f = Nonlinearity::constant_plus(*m);
  } else if (name == "tabulated") {
    auto xs = s.reals("s");
    auto fs = s.reals("values");
    if (!xs || !fs) throw ConfigError("problem.f tabulated needs keys s and values");
    f = Nonlinearity::tabulated(*xs, *fs);
  }
  s.finish();
  return f;
}

DiffusionCoefficient parse_sigma(Section& parent) {
  const toml::node* n = parent.get("sigma");
  if (!n) return DiffusionCoefficient::none();
  std::string name;
  Section s(nullptr, "problem.sigma");
  if (auto v = n->value_exact<std::string>()) {
    name = *v;
  } else if (n->is_table()) {
    s = Section(n->as_table(), "problem.sigma");
    auto v2 = s.text("name");
    if (!v2) throw ConfigError("missing required key problem.sigma.name");
    name = *v2;
  } else {
    throw ConfigError("problem.sigma must be a registry name or a table with a name");
  }
  const auto& reg = DiffusionCoefficient::registry();
  if (std::find(reg.begin(), reg.end(), name) == reg.end()) {
    throw ConfigError("unknown diffusion problem.sigma = \"" + name + "\"; registry: " + join(reg));
  }
  DiffusionCoefficient sigma = DiffusionCoefficient::none();
  const double c = s.real("c", name == "none" ? 0.0 : 1.0);
  if (name == "linear") sigma = DiffusionCoefficient::linear(c);
  if (name == "constant") sigma = DiffusionCoefficient::constant(c);
  if (name == "power") {
    auto eps = s.real("eps");
    if (!eps) throw ConfigError("missing required key problem.sigma.eps");
    sigma = DiffusionCoefficient::power(c, *eps);
  }
  s.finish();
  return sigma;
}

void parse_problem(Section s, ProblemSpec& p) {
  p.lambda = s.required_real("lambda");
  p.q = s.required_real("q");
  p.horizon = s.real("horizon", 1.0);
  p.f = parse_f(s);
  p.sigma = parse_sigma(s);
  if (Section e = s.sub("envelope"); e.present()) {
    p.envelope = SuperlinearEnvelope(e.required_real("c"), e.required_real("eps"));
    e.finish();
  }
  if (Section i = s.sub("initial"); i.present()) {
    const std::string kind = i.text("kind").value_or("constant");
    const auto& reg = InitialData::registry();
    const auto it = std::find(reg.begin(), reg.end(), kind);
    if (it == reg.end()) throw ConfigError("unknown problem.initial.kind = \"" + kind + "\"; registry: " + join(reg));
    p.initial.kind = static_cast<InitialData::Kind>(it - reg.begin());
    p.initial.scale = i.real("scale", 1.0);
    i.finish();
  }
  s.finish();
  p.validate();
}

void parse_noise(Section s, NoiseConfig& n) {
  const std::string kind = s.text("kind").value_or("off");
  if (kind == "off") {
    n.kind = NoiseConfig::Kind::off;
  } else if (kind == "kl") {
    n.kind = NoiseConfig::Kind::kl;
  } else if (kind == "coordinate") {
    n.kind = NoiseConfig::Kind::coordinate;
  } else {
    throw ConfigError("unknown noise.kind = \"" + kind + "\"; registry: off, kl, coordinate");
  }
  const std::string form = s.text("kernel").value_or("gaussian");
  if (form == "gaussian") {
    n.kernel.form = CovarianceKernel::Form::gaussian;
  } else if (form == "constant") {
    n.kernel.form = CovarianceKernel::Form::constant;
  } else {
    throw ConfigError("unknown noise.kernel = \"" + form + "\"; registry: gaussian, constant");
  }
  n.kernel.amplitude = s.real("amplitude", 1.0);
  if (!(n.kernel.amplitude >= 0.0)) throw ConfigError("noise.amplitude must be >= 0");
  n.kernel.correlation_length = positive(s.real("correlation_length"), 0.1, "noise.correlation_length");
  n.eps_tail = s.real("eps_tail", 1e-6);
  if (!(n.eps_tail > 0.0 && n.eps_tail < 1.0)) throw ConfigError("noise.eps_tail must lie in (0, 1)");
  n.coefficients = s.reals("coefficients").value_or(std::vector<double>{});
  if (n.kind == NoiseConfig::Kind::coordinate && n.coefficients.empty()) {
    throw ConfigError("noise.coefficients must be given for coordinate noise");
  }
  s.finish();
}

void parse_stepper(Section s, StepperConfig& c) {
  c.dt0 = positive(s.real("dt0"), c.dt0, "stepper.dt0");
  c.c_adapt = positive(s.real("c_adapt"), c.c_adapt, "stepper.c_adapt");
  c.u_max = s.real("u_max", c.u_max);
  if (!(c.u_max > 1.0)) throw ConfigError("stepper.u_max must be > 1");
  c.max_steps = static_cast<long>(positive<std::int64_t>(s.integer("max_steps"), c.max_steps, "stepper.max_steps"));
  c.stride = static_cast<int>(positive<std::int64_t>(s.integer("stride"), c.stride, "stepper.stride"));
  c.dt_min_factor = s.real("dt_min_factor", c.dt_min_factor);
  c.fit_window = static_cast<int>(s.integer("fit_window").value_or(c.fit_window));
  s.finish();
  c.validate();
}

void parse_ensemble(Section s, EnsembleConfig& e, double horizon) {
  e.n_paths = static_cast<std::size_t>(positive<std::int64_t>(s.integer("n_paths"), 100, "ensemble.n_paths"));
  const auto seed = s.integer("master_seed").value_or(1);
  if (seed < 0) throw ConfigError("ensemble.master_seed must be >= 0");
  e.master_seed = static_cast<std::uint64_t>(seed);
  e.worker_count = static_cast<int>(positive<std::int64_t>(s.integer("worker_count"), 1, "ensemble.worker_count"));
  const auto cps = s.reals("checkpoints");
  const auto count = s.integer("n_checkpoints");
  if (cps && count) throw ConfigError("ensemble.checkpoints and ensemble.n_checkpoints are exclusive");
  if (cps) {
    e.checkpoints = *cps;
  } else {
    const auto n = count.value_or(21);
    if (n < 2) throw ConfigError("ensemble.n_checkpoints must be >= 2");
    e.checkpoints = uniform_checkpoints(horizon, static_cast<int>(n));
  }
  s.finish();
  e.validate(horizon);
}

void parse_bounds(Section s, BoundsConfig& b) {
  b.margin = s.real("margin");
  if (b.margin && !(*b.margin > 0.0)) throw ConfigError("bounds.margin must be > 0");
  if (auto ell = s.integer("ell")) {
    if (*ell < 1) throw ConfigError("bounds.ell must be >= 1");
    b.ell = static_cast<int>(*ell);
  }
  b.psi0 = s.real("psi0");
  if (b.psi0 && !(*b.psi0 >= 0.0)) throw ConfigError("bounds.psi0 must be >= 0");
  b.theta0 = s.real("theta0");
  if (b.theta0 && !(*b.theta0 >= 0.0)) throw ConfigError("bounds.theta0 must be >= 0");
  s.finish();
}

void parse_verify(Section s, VerifyConfig& v, double horizon) {
  v.c_tol = positive(s.real("c_tol"), v.c_tol, "verify.c_tol");
  v.n_paths = static_cast<std::size_t>(positive<std::int64_t>(s.integer("n_paths"), 20, "verify.n_paths"));
  v.t_eval = s.real("t_eval");
  if (v.t_eval && !(*v.t_eval > 0.0 && *v.t_eval <= horizon)) throw ConfigError("verify.t_eval must lie in (0, horizon]");
  v.delta = s.real("delta", v.delta);
  if (!(v.delta >= 0.0)) throw ConfigError("verify.delta must be >= 0");
  v.checks = s.texts("checks").value_or(std::vector<std::string>{});
  const auto& reg = VerifyConfig::registry();
  for (const auto& c : v.checks) {
    if (std::find(reg.begin(), reg.end(), c) == reg.end()) {
      throw ConfigError("unknown check \"" + c + "\" in verify.checks; registry: " + join(reg));
    }
  }
  s.finish();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  RunConfig cfg;
  cfg.source_name = source_name;
  cfg.source_text = text;

  Section top(&root, "");
  parse_domain(top.sub("domain"), cfg.problem.domain);
  Section problem = top.sub("problem");
  if (!problem.present()) throw ConfigError("missing required table [problem]");
  parse_problem(problem, cfg.problem);
  parse_noise(top.sub("noise"), cfg.noise);
  parse_stepper(top.sub("stepper"), cfg.stepper);
  parse_ensemble(top.sub("ensemble"), cfg.ensemble, cfg.problem.horizon);
  parse_bounds(top.sub("bounds"), cfg.bounds);
  parse_verify(top.sub("verify"), cfg.verify, cfg.problem.horizon);
  Section output = top.sub("output");
  cfg.output_dir = output.text("directory").value_or("out");
  cfg.run_id = output.text("run_id").value_or("");
  output.finish();
  top.finish();
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

NoiseModel build_noise(const NoiseConfig& config, const Grid& grid) {
  switch (config.kind) {
    case NoiseConfig::Kind::off:
      return NoiseModel();
    case NoiseConfig::Kind::kl:
      return build_kl_noise(config.kernel, grid, config.eps_tail);
    case NoiseConfig::Kind::coordinate:
      return NoiseModel(CoordinateNoise{config.coefficients});
  }
  return NoiseModel();
}

Json to_json(const RunConfig& c) {
  Json j;
  const auto& p = c.problem;
  j["domain"] = {{"dimension", p.domain.dimension}, {"extents", p.domain.extents}, {"nodes", p.domain.nodes}};

  Json f{{"name", p.f.name()}};
  if (p.f.kind() == Nonlinearity::Kind::shifted_power) f["p"] = p.f.parameter();
  if (p.f.kind() == Nonlinearity::Kind::constant_plus) f["m"] = p.f.parameter();
  if (p.f.kind() == Nonlinearity::Kind::tabulated) {
    f["s"] = p.f.table_s();
    f["values"] = p.f.table_f();
  }
  Json sigma{{"name", p.sigma.name()}, {"c", p.sigma.coefficient()}};
  if (p.sigma.kind() == DiffusionCoefficient::Kind::power) sigma["eps"] = p.sigma.exponent();
  Json problem{{"lambda", p.lambda}, {"q", p.q}, {"horizon", p.horizon}, {"f", f}, {"sigma", sigma}};
  if (p.envelope) problem["envelope"] = {{"c", p.envelope->coefficient()}, {"eps", p.envelope->exponent()}};
  problem["initial"] = {{"kind", p.initial.name()}, {"scale", p.initial.scale}};
  j["problem"] = problem;

  const char* kinds[] = {"off", "kl", "coordinate"};
  j["noise"] = {{"kind", kinds[static_cast<int>(c.noise.kind)]},
                {"kernel", c.noise.kernel.form == CovarianceKernel::Form::gaussian ? "gaussian" : "constant"},
                {"amplitude", c.noise.kernel.amplitude},
                {"correlation_length", c.noise.kernel.correlation_length},
                {"eps_tail", c.noise.eps_tail},
                {"coefficients", c.noise.coefficients}};
  const auto& s = c.stepper;
  j["stepper"] = {{"dt0", s.dt0},         {"c_adapt", s.c_adapt},
                  {"u_max", s.u_max},     {"max_steps", s.max_steps},
                  {"stride", s.stride},   {"dt_min_factor", s.dt_min_factor},
                  {"fit_window", s.fit_window}};
  j["ensemble"] = {{"n_paths", c.ensemble.n_paths},
                   {"master_seed", c.ensemble.master_seed},
                   {"worker_count", c.ensemble.worker_count},
                   {"checkpoints", c.ensemble.checkpoints}};
  Json b = Json::object();
  if (c.bounds.margin) b["margin"] = *c.bounds.margin;
  if (c.bounds.ell) b["ell"] = *c.bounds.ell;
  if (c.bounds.psi0) b["psi0"] = *c.bounds.psi0;
  if (c.bounds.theta0) b["theta0"] = *c.bounds.theta0;
  j["bounds"] = b;
  Json v{{"c_tol", c.verify.c_tol}, {"n_paths", c.verify.n_paths}, {"delta", c.verify.delta},
         {"checks", c.verify.checks}};
  if (c.verify.t_eval) v["t_eval"] = *c.verify.t_eval;
  j["verify"] = v;
  j["output"] = {{"directory", c.output_dir}, {"run_id", c.run_id}};
  return j;
}

}  // namespace nlspde
