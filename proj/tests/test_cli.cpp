#include "nlspde/cli.hpp"
#include "nlspde/config.hpp"
#include "nlspde/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nlspde;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[domain]
nodes = 31

[problem]
lambda = 1.0
q = 0.5
horizon = 0.01
f = "exp"
sigma = { name = "linear", c = 0.2 }
initial = { kind = "sine", scale = 1.0 }

[noise]
kind = "kl"
correlation_length = 0.2

[ensemble]
n_paths = 6
n_checkpoints = 3
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nlspde_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args, std::string& out, std::string& err) {
  std::vector<const char*> argv{"nlspde"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

}  // namespace

TEST_CASE("config: defaults and resolved values") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.problem.domain.nodes == std::vector<int>{31});
  CHECK(c.problem.sigma.kind() == DiffusionCoefficient::Kind::linear);
  CHECK(c.problem.sigma.coefficient() == 0.2);
  CHECK(c.noise.kind == NoiseConfig::Kind::kl);
  CHECK(c.ensemble.checkpoints == std::vector<double>{0.0, 0.005, 0.01});
  CHECK(c.stepper.dt0 == 1e-4);
  const Json j = to_json(c);
  CHECK(j["problem"]["f"]["name"] == "exp");
}

TEST_CASE("config: errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config("[problem]\nq = 0.5\nf = \"exp\"\n"), "missing required key problem.lambda",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[problem]\nlambda = 1.0\nq = 0.5\nf = \"exp2\"\n"),
                       doctest::Contains("unknown nonlinearity problem.f = \"exp2\""), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[problem]\nlambda = 1.0\nq = -1.0\nf = \"exp\"\n"), "q must be > 0",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(std::string(kMinimal) + "[stepper]\ndt = 0.1\n"), doctest::Contains("unknown key"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("[domain]\nnodes = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("not toml = = ="), ConfigError);
}

TEST_CASE("config: tabulated and power nonlinearities") {
  const RunConfig c = parse_config(R"(
[problem]
lambda = 1.0
q = 0.5
f = { name = "tabulated", s = [0.0, 1.0], values = [1.0, 3.0] }
)");
  CHECK(c.problem.f.value(0.5) == doctest::Approx(2.0));
  const RunConfig p = parse_config("[problem]\nlambda = 1.0\nq = 0.5\nf = { name = \"power\", p = 3.0 }\n");
  CHECK(p.problem.f.parameter() == 3.0);
}

TEST_CASE("cli: eigen writes its artifacts and a manifest") {
  const fs::path dir = scratch("eigen");
  std::ofstream(dir / "run.toml") << kMinimal;
  std::string out, err;
  const int code = run({"eigen", "--config", (dir / "run.toml").string(), "--out", (dir / "out").string()}, out, err);
  CHECK(code == 0);
  CHECK(err.empty());
  const fs::path run_dir = dir / "out" / "run-eigen";
  CHECK(fs::exists(run_dir / "eigen.csv"));
  CHECK(fs::exists(run_dir / "phi1.csv"));
  const Json m = Json::parse(slurp(run_dir / "manifest.json"));
  CHECK(m["subcommand"] == "eigen");
  CHECK(m["config_text"] == kMinimal);
}

TEST_CASE("cli: ensemble output is byte-identical across worker counts") {
  const fs::path dir = scratch("workers");
  std::ofstream(dir / "run.toml") << kMinimal;
  std::string out, err;
  std::vector<std::string> csv, jsonl;
  for (const char* w : {"1", "3"}) {
    const fs::path o = dir / (std::string("w") + w);
    REQUIRE(run({"ensemble", "--config", (dir / "run.toml").string(), "--workers", w, "--out", o.string()}, out,
                err) == 0);
    csv.push_back(slurp(o / "run-ensemble" / "stats.csv"));
    jsonl.push_back(slurp(o / "run-ensemble" / "paths.jsonl"));
  }
  CHECK(csv[0] == csv[1]);
  CHECK(jsonl[0] == jsonl[1]);
  CHECK(csv[0].rfind("t,alive,blown,failed,censored,blowup_fraction,psi,psi_se", 0) == 0);
  CHECK(std::count(jsonl[0].begin(), jsonl[0].end(), '\n') == 6);
}

TEST_CASE("cli: errors are JSON on stderr with a nonzero status") {
  const fs::path dir = scratch("errors");
  std::ofstream(dir / "bad.toml") << "[problem]\nlambda = 1.0\nq = 0.5\nf = \"exp2\"\n";
  std::string out, err;
  CHECK(run({"sim", "--config", (dir / "bad.toml").string(), "--out", (dir / "out").string()}, out, err) == 2);
  const Json e = Json::parse(err);
  CHECK(e["error"] == "config");
  CHECK(e["subcommand"] == "sim");
  CHECK(e["message"].get<std::string>().find("exp2") != std::string::npos);

  CHECK(run({"nosuch", "--config", "x.toml"}, out, err) == 2);
  CHECK(Json::parse(err)["error"] == "usage");
  CHECK(run({"sim", "--config", (dir / "missing.toml").string()}, out, err) == 2);
}

TEST_CASE("cli: bounds table and json") {
  const fs::path dir = scratch("bounds");
  std::ofstream(dir / "run.toml") << R"(
[domain]
nodes = 63
[problem]
lambda = 35.0
q = 0.5
f = "exp"
)";
  std::string out, err;
  REQUIRE(run({"bounds", "--config", (dir / "run.toml").string(), "--out", (dir / "out").string()}, out, err) == 0);
  const Json b = Json::parse(slurp(dir / "out" / "run-bounds" / "bounds.json"));
  CHECK(b["nonlocal_lambda.B"].get<double>() == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-8));
  CHECK(out.find("lambda_min") != std::string::npos);
}
