#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "catsync/commands.hpp"
#include "catsync/config.hpp"
#include "catsync/errors.hpp"

using namespace catsync;
namespace fs = std::filesystem;

namespace {

const char* kLocking = R"(coupling:
  epsilon: 0.05
  g:
    - [sin, 1, 0, 0, 1, -1]
    - [sin, 1, 0, 1, 1, 1]
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("catsync_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig small(const fs::path& out) {
  RunConfig c = parse_config(kLocking);
  c.n_phi = 8;
  c.n_t = 32;
  c.n_max = 2;
  c.n_iter = 400;
  c.n_transient = 50;
  c.n_points = 25;
  c.output_dir = out.string();
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  const RunConfig c = parse_config(kLocking);
  CHECK(c.coupling.epsilon == 0.05);
  CHECK(c.coupling.g == locking_example(0.05).g);
  CHECK(c.coupling.f_is_zero());
  CHECK(c.n_phi == 64);
  CHECK(c.n_max == 3);
  CHECK(c.m_sum == 40);
}

TEST_CASE("config errors name the field and the line") {
  CHECK(config_error("coupling:\n  epsilon: 0.1\n").find("coupling.g required") != std::string::npos);
  const std::string bad_kind = config_error("coupling:\n  g:\n    - [tan, 1, 0, 0, 1, -1]\n");
  CHECK(bad_kind.find("coupling.g[0].kind") != std::string::npos);
  CHECK(bad_kind.find("line 3") != std::string::npos);
  CHECK(config_error("coupling:\n  g: []\ngrid:\n  n_t: 33\n").find("grid.n_t") != std::string::npos);
  CHECK(config_error("coupling:\n  g: []\n  h: 1\n").find("coupling.h: unknown field") !=
        std::string::npos);
  CHECK(config_error("coupling:\n  g:\n    - [cos, 1, 0.5, 0, 1, -1]\n").find("integers") !=
        std::string::npos);
  CHECK(config_error("coupling:\n  epsilon: -1\n  g: []\n").find("coupling.epsilon") !=
        std::string::npos);
  CHECK(config_error("coupling: [\n").find("syntax") != std::string::npos);
}

TEST_CASE("config round trip is the identity") {
  RunConfig c = parse_config(kLocking);
  c.coupling.f1 = bidirectional_example(0.0).f1;
  c.coupling.epsilon = 0.1 + 1e-17 * 3;
  c.dt = kTwoPi / 777;
  c.sweep = {0.1, 0.13333333333333333, 0.2};
  c.seed = 18446744073709551615ull;
  c.method = "both";
  c.render = true;
  c.output_dir = "some/dir";
  CHECK(parse_config(write_config(c)) == c);
  CHECK(write_config(parse_config(write_config(c))) == write_config(c));
}

TEST_CASE("sweep ranges expand to a list") {
  const RunConfig c =
      parse_config(std::string(kLocking) + "spectrum:\n  sweep: {from: 0.1, to: 0.2, count: 6}\n");
  REQUIRE(c.sweep.size() == 6);
  CHECK(c.sweep.front() == 0.1);
  CHECK(c.sweep.back() == doctest::Approx(0.2));
}

TEST_CASE("config hash ignores field order and output location") {
  const std::string a = std::string(kLocking) + "grid:\n  n_phi: 32\n  n_t: 64\noutput:\n  dir: x\n";
  const std::string b = "output:\n  dir: y\ngrid:\n  n_t: 64\n  n_phi: 32\n" + std::string(kLocking);
  CHECK(config_hash(parse_config(a)) == config_hash(parse_config(b)));
  RunConfig c = parse_config(a);
  c.coupling.epsilon = 0.06;
  CHECK(config_hash(c) != config_hash(parse_config(a)));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("simulate writes the requested number of points") {
  const fs::path out = scratch("simulate");
  RunConfig c = small(out);
  const ResultManifest m = cmd_simulate(c);
  const std::string csv = slurp(out / "attractor.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
  CHECK(csv.rfind("x1,x2,w\n", 0) == 0);
  CHECK(fs::exists(out / "manifest.json"));
  c.n_points = 0;
  cmd_simulate(c);
  CHECK(slurp(out / "attractor.csv") == "x1,x2,w\n");
  const auto j = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(j["files"].size() == 3);
  CHECK(j["config_hash"] == config_hash(c));
}

TEST_CASE("series: report, omitted zero families, cache reuse") {
  const fs::path out = scratch("series");
  RunConfig c = small(out);
  c.n_max = 1;
  const ResultManifest first = cmd_series(c);
  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(rep["w0"].get<double>() == doctest::Approx(3.14159).epsilon(1e-5));
  CHECK(rep["Gamma"].get<double>() == doctest::Approx(-6.28319).epsilon(1e-5));
  CHECK_FALSE(fs::exists(out / "coefficients_h_plus.csv"));
  CHECK_FALSE(fs::exists(out / "coefficients_a_plus_end.csv"));
  CHECK(fs::exists(out / "coefficients_U.csv"));
  bool noted = false;
  for (const auto& n : first.notes) noted = noted || n.find("h_plus identically zero") != std::string::npos;
  CHECK(noted);

  const std::string data = slurp(out / "residuals.csv");
  const ResultManifest second = cmd_series(c);
  CHECK(second.notes.front().rfind("cache hit", 0) == 0);
  CHECK(first.notes.front().rfind("cache miss", 0) == 0);
  CHECK(second.config_hash == first.config_hash);
  CHECK(second.data_hash() == first.data_hash());
  CHECK(slurp(out / "residuals.csv") == data);

  c.coupling.epsilon = 0.0;
  CHECK_THROWS_AS(cmd_series(c), ConfigError);
}

TEST_CASE("trees: lemma report, counts and rendering") {
  const fs::path out = scratch("trees");
  RunConfig c = small(out);
  c.trees_n_max = 5;
  c.render = true;
  c.verify_trees = true;
  const ResultManifest m = cmd_trees(c);
  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(rep["lemma"] == "all pass; saturation at n in {2,5}");
  CHECK(rep["saturating_n11_internal_U"] == 7);
  CHECK(rep["tree_check_max_abs_diff"].get<double>() < 1e-10);
  const std::string counts = slurp(out / "counts.csv");
  CHECK(std::count(counts.begin(), counts.end(), '\n') == 1 + 5 * 4);
  CHECK(counts.find("\n1,xi,1,1\n1,U,1,1\n1,a,1,1\n1,h,1,1\n") != std::string::npos);
  CHECK(fs::exists(out / "trees" / "saturating_n11.dot"));
  CHECK(fs::exists(out / "trees" / "K01_n2_3.dot"));
  c.trees_n_max = 7;
  CHECK_THROWS_AS(cmd_trees(c), SizeLimit);
}

TEST_CASE("spectrum: single runs, both methods, and sweeps") {
  const fs::path out = scratch("spectrum");
  RunConfig c = small(out);
  c.coupling.epsilon = 0.0;
  cmd_spectrum(c);
  auto j = nlohmann::json::parse(slurp(out / "spectrum.json"));
  CHECK(j["qr_direct"]["Lambda_plus"].get<double>() == doctest::Approx(0.9624236501).epsilon(1e-9));
  CHECK(j["qr_direct"]["D_L"].get<double>() == doctest::Approx(3.0));

  c.coupling.epsilon = 0.02;
  c.method = "both";
  cmd_spectrum(c);
  j = nlohmann::json::parse(slurp(out / "spectrum.json"));
  CHECK(j.contains("perturbative"));
  CHECK(j["agreement"]["max_abs_diff"].get<double>() < 0.01);

  c.method = "perturbative";
  c.n_phi = 16;
  c.n_max = 3;
  c.sweep = {0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
  c.tol = 1e-3;
  cmd_spectrum(c);
  j = nlohmann::json::parse(slurp(out / "sweep.json"));
  CHECK(j["epsilon_c"].get<double>() == doctest::Approx(0.153).epsilon(0.1));
  CHECK(j["closed_form"].get<double>() == doctest::Approx(0.15317).epsilon(1e-4));
  const std::string csv = slurp(out / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("reruns give byte-identical data files") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  RunConfig c = small(a);
  const ResultManifest ma = cmd_simulate(c);
  c.output_dir = b.string();
  const ResultManifest mb = cmd_simulate(c);
  CHECK(ma.data_hash() == mb.data_hash());
  CHECK(slurp(a / "attractor.csv") == slurp(b / "attractor.csv"));
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(SizeLimit("x")) == 2);
  CHECK(exit_code_for(HypothesisError(HypothesisError::Kind::NoRoot, "x")) == 3);
  CHECK(exit_code_for(NumericalError(NumericalError::Kind::NonPositive, "x")) == 4);

  const fs::path dir = scratch("exit");
  fs::create_directories(dir);
  const std::string cli = CATSYNC_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int s = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(run("trees --config " + (dir / "missing.yaml").string()) == 2);
  {
    std::ofstream os(dir / "noroot.yaml");
    os << "coupling:\n  epsilon: 0.1\n  g:\n    - [cos, 1, 0, 0, 0, 1]\n";
  }
  CHECK(run("series --config " + (dir / "noroot.yaml").string() + " --out " + (dir / "o").string()) == 3);
  {
    std::ofstream os(dir / "ok.yaml");
    os << kLocking << "dynamics:\n  n_points: 5\n  n_transient: 5\n";
  }
  CHECK(run("simulate --config " + (dir / "ok.yaml").string() + " --out " + (dir / "s").string() +
            " --jobs 1 --seed 4") == 0);
  CHECK(slurp(dir / "s" / "config.yaml").find("seed: 4") != std::string::npos);
  CHECK(run("simulate") == 2);
}
