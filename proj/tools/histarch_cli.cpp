// histarch: run benchmark experiments and rebuild their tables.
//
//   histarch run --suite 10d --algos hr,cmaes,cnrga_lru --budget 100000 --runs 30 --out results/
//   histarch stats --in results/

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "histarch/histarch.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRunError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int exit_code(ha_status st) {
  switch (st) {
    case HA_OK: return kExitOk;
    case HA_ERR_CONFIG:
    case HA_ERR_PARAMETER: return kExitConfig;
    case HA_ERR_IO: return kExitIo;
    default: return kExitRunError;
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ha_string_free(s);
  return out;
}

std::string cell(const json& v) {
  if (v.is_null()) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v.get<double>());
  return buf;
}

void print_tables(const json& summary) {
  std::printf("%-16s %-10s %11s %11s %11s %11s %11s %5s  %s\n", "problem", "algorithm", "best", "worst", "median",
              "mean", "std", "rank", "mark");
  for (const auto& p : summary["problems"]) {
    for (const auto& r : p["rows"]) {
      std::printf("%-16s %-10s %11s %11s %11s %11s %11s %5g  %s", p["name"].get<std::string>().c_str(),
                  r["algorithm"].get<std::string>().c_str(), cell(r["best"]).c_str(), cell(r["worst"]).c_str(),
                  cell(r["median"]).c_str(), cell(r["mean"]).c_str(), cell(r["std"]).c_str(),
                  r["rank"].get<double>(), r["mark"].get<std::string>().c_str());
      if (r["failed"].get<int>() > 0) std::printf("  (%d failed)", r["failed"].get<int>());
      std::printf("\n");
    }
  }
  std::printf("\n%s", summary["rank_summary_csv"].get<std::string>().c_str());
}

int default_workers() {
  if (const char* env = std::getenv("HISTARCH_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"History-driven hybrid optimizer benchmarks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment");
  std::string config_file, suite = "10d", algos, out, problems;
  std::uint64_t budget = 100000, seed = 1, suite_seed = 2019;
  int runs = 30, workers = default_workers();
  double alpha = 0.05;
  bool trace = false, gnuplot = false, dump_tree = false;
  run->add_option("--config", config_file, "JSON file with the experiment settings; flags override it")
      ->check(CLI::ExistingFile);
  run->add_option("--suite", suite, "2d, 10d or 30d");
  run->add_option("--algos", algos, "comma separated: hr,cmaes,cnrga_lru,cnrga");
  run->add_option("--problems", problems, "comma separated subset of the suite");
  run->add_option("--budget", budget, "evaluations per run");
  run->add_option("--runs", runs, "runs per (algorithm, problem)");
  run->add_option("--alpha", alpha, "significance level");
  run->add_option("--seed", seed, "run r uses seed + r");
  run->add_option("--suite-seed", suite_seed, "seed of the shifts and rotations");
  run->add_option("--out", out, "output directory");
  run->add_option("--workers", workers, "parallel runs (default $HISTARCH_WORKERS or 1)");
  run->add_flag("--trace", trace, "store best-so-far traces and phases in runs.json");
  run->add_flag("--gnuplot", gnuplot, "write traces/*.dat");
  run->add_flag("--dump-tree", dump_tree, "write the final archive of every run to trees/");

  auto* stats = app.add_subcommand("stats", "rebuild tables from a finished experiment");
  std::string in_dir;
  stats->add_option("--in", in_dir, "experiment directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  char* summary = nullptr;
  char* log = nullptr;
  ha_status st = HA_OK;

  if (*run) {
    json cfg = json::object();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        cfg = json::parse(ss.str());
      } catch (const json::exception& e) {
        std::cerr << "error: " << config_file << ": " << e.what() << '\n';
        return kExitConfig;
      }
    }
    auto set = [&](const char* flag, const char* key, json value) {
      if (run->count(flag) > 0 || !cfg.contains(key)) cfg[key] = std::move(value);
    };
    set("--suite", "suite", suite);
    if (run->count("--algos") > 0) cfg["algos"] = algos;
    if (run->count("--problems") > 0) cfg["problems"] = problems;
    set("--budget", "budget", budget);
    set("--runs", "runs", runs);
    set("--alpha", "alpha", alpha);
    set("--seed", "seed", seed);
    set("--suite-seed", "suite_seed", suite_seed);
    set("--workers", "workers", workers);
    if (run->count("--out") > 0) cfg["out"] = out;
    if (trace) cfg["trace"] = true;
    if (gnuplot) cfg["gnuplot"] = true;
    if (dump_tree) cfg["dump_tree"] = true;
    st = ha_experiment_run(cfg.dump().c_str(), &summary, &log);
  } else {
    st = ha_experiment_stats(in_dir.c_str(), &summary);
  }

  const std::string log_text = take(log);
  if (!log_text.empty()) std::cerr << log_text;
  if (st != HA_OK) {
    take(summary);
    std::cerr << "error: " << ha_last_error() << '\n';
    return exit_code(st);
  }
  print_tables(json::parse(take(summary)));
  return kExitOk;
}
