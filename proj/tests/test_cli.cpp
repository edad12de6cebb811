#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("HYK_CLI");
  return p ? p : "hyk";
}

// Fresh working directory per call site.
fs::path scratch(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("hyk_cli_test_" + std::to_string(::getpid()) + "_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const fs::path& dir, const std::string& args, const std::string& env = {}) {
  std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + cli() + "' " + args + " >out.txt 2>err.txt";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("hy writes the three terms and a manifest") {
  auto d = scratch("hy");
  REQUIRE(run(d, "hy --rho 1e-3 --a 0.2384 --emit json -o hy.json -q") == 0);
  auto j = nlohmann::json::parse(slurp(d / "hy.json"));
  CHECK(j["kinetic"].get<double>() == doctest::Approx(5.7424680003763836319e-05).epsilon(1e-13));
  CHECK(j["third_order"].get<double>() == doctest::Approx(5.7954904018329038339e-08).epsilon(1e-12));
  auto m = nlohmann::json::parse(slurp(d / "hy.json.manifest.json"));
  CHECK(m["subcommand"] == "hy");
  CHECK(m["config"]["rho"].get<double>() == 1e-3);
  CHECK(m.contains("versions"));
  CHECK(m.contains("wall_time_s"));
}

TEST_CASE("fcurve csv layout") {
  auto d = scratch("fcurve");
  REQUIRE(run(d, "fcurve --xmin 0 --xmax 2 --n 3 -q") == 0);
  std::string csv = slurp(d / "fcurve.csv");
  CHECK(csv.rfind("x,F\r\n0.0,0.0\r\n", 0) == 0);
  CHECK(fs::exists(d / "fcurve.csv.plot.py"));
}

TEST_CASE("fock-verify passes on a small preset") {
  auto d = scratch("fock");
  CHECK(run(d, "fock-verify --preset rr-2x2 -q") == 0);
}

TEST_CASE("bad input exits with 2") {
  auto d = scratch("bad");
  CHECK(run(d, "tscaling --gamma 0.2 -q") == 2);
  CHECK(run(d, "hy --no-such-flag 1") == 2);
  CHECK(run(d, "hy -o /nonexistent-dir/x.csv -q") == 2);
  CHECK(run(d, "fock-verify --preset nope -q") == 2);
  CHECK(run(d, "nosuchcommand") == 2);
  std::ofstream(d / "cfg.json") << R"({"rho": 1e-3, "bogus": 1})";
  CHECK(run(d, "hy --config cfg.json -q") == 2);
}

TEST_CASE("rerunning a manifest reproduces the output") {
  auto d = scratch("rerun");
  REQUIRE(run(d, "pauli-mc --samples 4096 --strata 4 -o a.csv -q") == 0);
  REQUIRE(run(d, "pauli-mc --config a.csv.manifest.json -o b.csv -q") == 0);
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
}

TEST_CASE("thread count does not change results") {
  auto d = scratch("threads");
  REQUIRE(run(d, "pauli-mc --samples 4096 --strata 4 -o t1.csv -q", "HYK_THREADS=1") == 0);
  REQUIRE(run(d, "pauli-mc --samples 4096 --strata 4 -o t4.csv -q", "HYK_THREADS=4") == 0);
  REQUIRE(run(d, "pauli-mc --samples 4096 --strata 4 -o t2.csv -q --threads 2") == 0);
  CHECK(slurp(d / "t1.csv") == slurp(d / "t4.csv"));
  CHECK(slurp(d / "t1.csv") == slurp(d / "t2.csv"));
}
