#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "histarch/hr_restart.hpp"
#include "histarch/stats.hpp"
#include "json.hpp"

namespace histarch {

struct ExperimentConfig {
  std::vector<std::string> algorithms{"hr", "cmaes", "cnrga_lru"};
  std::size_t suite_dim = 10;
  std::uint64_t suite_seed = 2019;
  std::vector<std::string> problems;  // empty: the whole suite
  std::uint64_t budget = 100000;
  int runs = 30;
  double alpha = 0.05;
  std::uint64_t base_seed = 1;
  std::string reference = "hr";
  /// Final errors below this are reported as 0.
  double error_floor = 1e-8;
  /// Median/mean differences up to this share a rank.
  double tie_tolerance = 1e-8;
  std::string out_dir;
  bool trace = false;
  bool gnuplot = false;
  bool dump_tree = false;
  int workers = 1;
  GaConfig ga;

  /// Throws Error(ErrorKind::Config).
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

/// Settings used for every algorithm run of an experiment.
AlgorithmSettings algorithm_settings(const ExperimentConfig& c);

struct CellResult {
  std::string algorithm;
  std::string problem;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_error = 0.0;
  RunRecord record;
};

struct StatsTable {
  std::vector<std::string> algorithms;
  std::vector<std::string> problems;
  std::string reference;
  std::vector<std::vector<Summary>> summary;     // [problem][algorithm]
  std::vector<std::vector<double>> ranks;        // [problem][algorithm]
  std::vector<std::vector<Mark>> marks;          // [problem][algorithm], None for the reference
  std::vector<std::vector<std::size_t>> failed;  // [problem][algorithm]
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  StatsTable table;
};

double final_error(const Problem& p, double best_fitness, double floor);

StatsTable build_stats(const ExperimentConfig& config, const std::vector<CellResult>& cells);

/// Executes every (algorithm, problem, run) cell. Run r uses seed
/// base_seed + r; results do not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

std::string results_csv(const StatsTable& t);
std::string ranks_csv(const StatsTable& t);
std::string rank_summary_csv(const StatsTable& t);

/// Writes config.json, suite.json, runs.json, results.csv, ranks.csv,
/// rank_summary.csv and the optional traces/ and trees/ directories.
void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir);

/// Reloads config.json and runs.json from a previous run and rebuilds the tables.
ExperimentResult load_results(const std::filesystem::path& dir);
void write_tables(const StatsTable& t, const std::filesystem::path& dir);

}  // namespace histarch
