// Drives the histarch executable through the shell and checks exit codes and files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + HISTARCH_CLI + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("histarch_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::string kSmall = "run --suite 2d --algos hr,cmaes --problems sphere,rastrigin --budget 400 --runs 3";

}  // namespace

TEST_CASE("config errors exit with 2") {
  CHECK(run("run --suite 4d --out /tmp/x") == 2);
  CHECK(run("run --runs 1") == 2);
  CHECK(run("run --algos hr,ipop") == 2);
  CHECK(run("run --alpha 1.5") == 2);
  CHECK(run("run --suite 2d --problems nothing") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("run --budget many") == 2);
  const auto dir = scratch("badcfg");
  fs::create_directories(dir);
  { std::ofstream(dir / "c.json") << "{ broken"; }
  CHECK(run("run --config " + (dir / "c.json").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("i/o errors exit with 3") {
  const auto dir = scratch("io");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  CHECK(run("stats --in " + (dir / "missing").string()) == 3);
  CHECK(run(kSmall + " --out " + (dir / "file" / "out").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("run then stats reproduces the tables") {
  const auto dir = scratch("ok");
  REQUIRE(run(kSmall + " --out " + dir.string() + " --trace --gnuplot") == 0);
  const auto results = slurp(dir / "results.csv");
  const auto ranks = slurp(dir / "ranks.csv");
  CHECK(results.rfind("problem,algorithm,best,worst,median,mean,std,runs,failed\n", 0) == 0);
  CHECK(fs::exists(dir / "traces" / "rastrigin__cmaes__run2.dat"));
  fs::remove(dir / "results.csv");
  fs::remove(dir / "ranks.csv");
  REQUIRE(run("stats --in " + dir.string()) == 0);
  CHECK(slurp(dir / "results.csv") == results);
  CHECK(slurp(dir / "ranks.csv") == ranks);
  fs::remove_all(dir);
}

TEST_CASE("config file with flag overrides and the workers variable") {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  { std::ofstream(dir / "c.json") << R"({"suite": "2d", "algos": ["cmaes", "cnrga_lru"], "problems": ["sphere"],
                                        "budget": 300, "runs": 2, "reference": "cmaes"})"; }
  REQUIRE(run("run --config " + (dir / "c.json").string() + " --runs 4 --out " + (dir / "a").string(),
              "HISTARCH_WORKERS=2") == 0);
  const auto cfg = slurp(dir / "a" / "config.json");
  CHECK(cfg.find("\"runs\": 4") != std::string::npos);
  CHECK(cfg.find("\"budget\": 300") != std::string::npos);
  CHECK(cfg.find("\"reference\": \"cmaes\"") != std::string::npos);
  CHECK(slurp(dir / "a" / "results.csv").find("sphere,cnrga_lru,") != std::string::npos);
  fs::remove_all(dir);
}
