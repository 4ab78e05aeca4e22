#include "histarch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace histarch {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (algorithms.empty()) fail("no algorithms selected");
  std::set<std::string> seen;
  for (const auto& a : algorithms) {
    if (!is_known_algorithm(a) || a == "cmaes_restart") fail("unknown algorithm '" + a + "' (use hr, cmaes, cnrga_lru, cnrga)");
    if (!seen.insert(a).second) fail("algorithm '" + a + "' listed twice");
  }
  if (!seen.count(reference)) fail("reference algorithm '" + reference + "' is not among the selected algorithms");
  if (suite_dim != 2 && suite_dim != 10 && suite_dim != 30) fail("suite must be 2d, 10d or 30d");
  if (runs < 2) fail("runs must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (budget < 2) fail("budget must be >= 2");
  if (seen.count("hr") && budget < static_cast<std::uint64_t>(ga.pop_size))
    fail("budget must cover at least one GA population for hr");
  if (workers < 1) fail("workers must be >= 1");
  if (!(error_floor >= 0.0) || !(tie_tolerance >= 0.0)) fail("error_floor and tie_tolerance must be >= 0");
  try {
    ga.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::string> string_list(const json& j) {
  if (j.is_string()) return split_list(j.get<std::string>());
  return j.get<std::vector<std::string>>();
}

std::size_t parse_suite(const json& j) {
  if (j.is_number_integer()) return j.get<std::size_t>();
  const auto s = j.get<std::string>();
  if (s == "2d") return 2;
  if (s == "10d") return 10;
  if (s == "30d") return 30;
  throw Error(ErrorKind::Config, "suite must be 2d, 10d or 30d, got '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorKind::Config, "configuration must be a JSON object");
    if (j.contains("algos")) c.algorithms = string_list(j["algos"]);
    if (j.contains("suite")) c.suite_dim = parse_suite(j["suite"]);
    c.suite_seed = j.value("suite_seed", c.suite_seed);
    if (j.contains("problems")) c.problems = string_list(j["problems"]);
    c.budget = j.value("budget", c.budget);
    c.runs = j.value("runs", c.runs);
    c.alpha = j.value("alpha", c.alpha);
    c.base_seed = j.value("seed", c.base_seed);
    c.reference = j.value("reference", std::string{});
    if (c.reference.empty()) {
      const bool has_hr = std::find(c.algorithms.begin(), c.algorithms.end(), "hr") != c.algorithms.end();
      c.reference = has_hr || c.algorithms.empty() ? "hr" : c.algorithms.front();
    }
    c.error_floor = j.value("error_floor", c.error_floor);
    c.tie_tolerance = j.value("tie_tolerance", c.tie_tolerance);
    c.out_dir = j.value("out", c.out_dir);
    c.trace = j.value("trace", c.trace);
    c.gnuplot = j.value("gnuplot", c.gnuplot);
    c.dump_tree = j.value("dump_tree", c.dump_tree);
    c.workers = j.value("workers", c.workers);
    if (j.contains("ga")) {
      const json& g = j["ga"];
      c.ga.pop_size = g.value("pop_size", c.ga.pop_size);
      c.ga.crossover_rate = g.value("crossover_rate", c.ga.crossover_rate);
      c.ga.tournament_size = g.value("tournament_size", c.ga.tournament_size);
      c.ga.lru_fraction = g.value("lru_fraction", c.ga.lru_fraction);
      c.ga.lru_capacity = g.value("lru_capacity", c.ga.lru_capacity);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad configuration value: ") + e.what());
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{{"algos", c.algorithms},
              {"suite", std::to_string(c.suite_dim) + "d"},
              {"suite_seed", c.suite_seed},
              {"problems", c.problems},
              {"budget", c.budget},
              {"runs", c.runs},
              {"alpha", c.alpha},
              {"seed", c.base_seed},
              {"reference", c.reference},
              {"error_floor", c.error_floor},
              {"tie_tolerance", c.tie_tolerance},
              {"trace", c.trace},
              {"gnuplot", c.gnuplot},
              {"dump_tree", c.dump_tree},
              {"ga",
               {{"pop_size", c.ga.pop_size},
                {"crossover_rate", c.ga.crossover_rate},
                {"tournament_size", c.ga.tournament_size},
                {"lru_fraction", c.ga.lru_fraction},
                {"lru_capacity", c.ga.lru_capacity}}}};
}

AlgorithmSettings algorithm_settings(const ExperimentConfig& c) {
  AlgorithmSettings s;
  s.budget = c.budget;
  s.ga = c.ga;
  return s;
}

double final_error(const Problem& p, double best_fitness, double floor) {
  // raw objective values may be legitimately negative, so the floor only applies to true errors
  if (!p.f_opt) return best_fitness;
  const double e = best_fitness - *p.f_opt;
  return e < floor ? 0.0 : e;
}

namespace {

std::vector<Problem> selected_problems(const ExperimentConfig& c) {
  auto suite = make_suite(c.suite_dim, c.suite_seed);
  if (c.problems.empty()) return suite;
  std::vector<Problem> out;
  for (const auto& name : c.problems) {
    auto it = std::find_if(suite.begin(), suite.end(), [&](const Problem& p) { return p.name == name; });
    if (it == suite.end()) throw Error(ErrorKind::Config, "unknown problem '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

std::string cell_stem(const CellResult& c) {
  return c.problem + "__" + c.algorithm + "__run" + std::to_string(c.run);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string fmt_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fmt_rank(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

}  // namespace

StatsTable build_stats(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  StatsTable t;
  t.algorithms = config.algorithms;
  t.reference = config.reference;
  for (const auto& c : cells)
    if (std::find(t.problems.begin(), t.problems.end(), c.problem) == t.problems.end()) t.problems.push_back(c.problem);

  const std::size_t na = t.algorithms.size();
  const auto ref = static_cast<std::size_t>(
      std::find(t.algorithms.begin(), t.algorithms.end(), t.reference) - t.algorithms.begin());

  for (const auto& prob : t.problems) {
    std::vector<std::vector<double>> errors(na);
    std::vector<std::size_t> failed(na, 0);
    for (const auto& c : cells) {
      if (c.problem != prob) continue;
      const auto a = static_cast<std::size_t>(
          std::find(t.algorithms.begin(), t.algorithms.end(), c.algorithm) - t.algorithms.begin());
      if (a >= na) continue;
      if (c.ok) errors[a].push_back(c.final_error);
      else ++failed[a];
    }
    std::vector<Summary> rows(na);
    for (std::size_t a = 0; a < na; ++a) rows[a] = summarize(errors[a]);
    std::vector<Mark> marks(na, Mark::None);
    if (ref < na)
      for (std::size_t a = 0; a < na; ++a)
        if (a != ref) marks[a] = significance_mark(errors[ref], errors[a], config.alpha);
    t.ranks.push_back(shared_ranks(rows, config.tie_tolerance));
    t.summary.push_back(std::move(rows));
    t.marks.push_back(std::move(marks));
    t.failed.push_back(std::move(failed));
  }
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto problems = selected_problems(config);
  const AlgorithmSettings settings = algorithm_settings(config);

  ExperimentResult result;
  result.config = config;
  for (const auto& p : problems)
    for (const auto& a : config.algorithms)
      for (int r = 0; r < config.runs; ++r) {
        CellResult c;
        c.algorithm = a;
        c.problem = p.name;
        c.run = r;
        c.seed = config.base_seed + static_cast<std::uint64_t>(r);
        result.cells.push_back(std::move(c));
      }

  const bool trees_to_disk = config.dump_tree && !config.out_dir.empty();
  if (trees_to_disk) ensure_dir(fs::path(config.out_dir) / "trees");

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  const std::size_t per_problem = config.algorithms.size() * static_cast<std::size_t>(config.runs);
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      CellResult& c = result.cells[i];
      const Problem& p = problems[i / per_problem];
      try {
        Rng rng(c.seed);
        RunHooks hooks;
        hooks.dump_tree = config.dump_tree;
        c.record = run_algorithm(p, c.algorithm, settings, rng, hooks);
        c.final_error = final_error(p, c.record.final_best.fitness, config.error_floor);
        c.ok = std::isfinite(c.final_error);
        if (!c.ok) c.error = "no finite objective value recorded";
        if (trees_to_disk && !c.record.tree_dump.empty()) {
          write_file(fs::path(config.out_dir) / "trees" / (cell_stem(c) + ".txt"), c.record.tree_dump);
          c.record.tree_dump.clear();
        }
      } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
      }
      if (!c.ok && log) {
        std::lock_guard lock(log_mutex);
        *log << "WARNING: run failed and is excluded from the tables: " << cell_stem(c) << ": " << c.error << '\n';
      }
    }
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), result.cells.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  result.table = build_stats(config, result.cells);
  return result;
}

std::string results_csv(const StatsTable& t) {
  std::ostringstream out;
  out << "problem,algorithm,best,worst,median,mean,std,runs,failed\n";
  for (std::size_t p = 0; p < t.problems.size(); ++p)
    for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
      const Summary& s = t.summary[p][a];
      out << t.problems[p] << ',' << t.algorithms[a] << ',' << fmt_value(s.best) << ',' << fmt_value(s.worst) << ','
          << fmt_value(s.median) << ',' << fmt_value(s.mean) << ',' << fmt_value(s.std) << ',' << s.n << ','
          << t.failed[p][a] << '\n';
    }
  return out.str();
}

std::string ranks_csv(const StatsTable& t) {
  std::ostringstream out;
  out << "problem";
  for (const auto& a : t.algorithms) out << ',' << a << "_rank";
  for (const auto& a : t.algorithms)
    if (a != t.reference) out << ',' << a << "_mark";
  out << '\n';
  for (std::size_t p = 0; p < t.problems.size(); ++p) {
    out << t.problems[p];
    for (std::size_t a = 0; a < t.algorithms.size(); ++a) out << ',' << fmt_rank(t.ranks[p][a]);
    for (std::size_t a = 0; a < t.algorithms.size(); ++a)
      if (t.algorithms[a] != t.reference) out << ',' << to_string(t.marks[p][a]);
    out << '\n';
  }
  return out.str();
}

std::string rank_summary_csv(const StatsTable& t) {
  std::ostringstream out;
  out << "algorithm,avg_rank,better,worse\n";
  for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
    double sum = 0.0;
    int better = 0, worse = 0;
    for (std::size_t p = 0; p < t.problems.size(); ++p) {
      sum += t.ranks[p][a];
      better += t.marks[p][a] == Mark::Better;
      worse += t.marks[p][a] == Mark::Worse;
    }
    const double avg = t.problems.empty() ? 0.0 : sum / static_cast<double>(t.problems.size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", avg);
    out << t.algorithms[a] << ',' << buf << ',' << better << ',' << worse << '\n';
  }
  return out.str();
}

void write_tables(const StatsTable& t, const fs::path& dir) {
  ensure_dir(dir);
  write_file(dir / "results.csv", results_csv(t));
  write_file(dir / "ranks.csv", ranks_csv(t));
  write_file(dir / "rank_summary.csv", rank_summary_csv(t));
}

void write_outputs(const ExperimentResult& r, const fs::path& dir) {
  ensure_dir(dir);
  write_file(dir / "config.json", to_json(r.config).dump(2) + "\n");
  write_file(dir / "suite.json", suite_manifest(selected_problems(r.config)).dump(2) + "\n");

  json cells = json::array();
  for (const auto& c : r.cells) {
    json cj{{"algorithm", c.algorithm}, {"problem", c.problem}, {"run", c.run},
            {"seed", c.seed},           {"ok", c.ok},           {"error", c.error}};
    cj["final_error"] = c.ok ? json(c.final_error) : json(nullptr);
    if (c.ok) cj["record"] = to_json(c.record, r.config.trace);
    cells.push_back(std::move(cj));
  }
  write_file(dir / "runs.json", json{{"cells", std::move(cells)}}.dump() + "\n");
  write_tables(r.table, dir);

  if (r.config.gnuplot) {
    ensure_dir(dir / "traces");
    for (const auto& c : r.cells) {
      if (!c.ok) continue;
      std::ostringstream out;
      out << "# evaluation best_fitness\n";
      char buf[64];
      for (const auto& [idx, f] : c.record.trace) {
        std::snprintf(buf, sizeof buf, "%llu %.17g\n", static_cast<unsigned long long>(idx), f);
        out << buf;
      }
      write_file(dir / "traces" / (cell_stem(c) + ".dat"), out.str());
    }
  }
  if (r.config.dump_tree) {
    ensure_dir(dir / "trees");
    for (const auto& c : r.cells)
      if (c.ok && !c.record.tree_dump.empty())
        write_file(dir / "trees" / (cell_stem(c) + ".txt"), c.record.tree_dump);
  }
}

ExperimentResult load_results(const fs::path& dir) {
  ExperimentResult r;
  json cfg, runs;
  try {
    cfg = json::parse(read_file(dir / "config.json"));
    runs = json::parse(read_file(dir / "runs.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "malformed results in " + dir.string() + ": " + e.what());
  }
  r.config = config_from_json(cfg);
  r.config.out_dir = dir.string();
  const auto problems = selected_problems(r.config);
  try {
    for (const auto& cj : runs.at("cells")) {
      CellResult c;
      c.algorithm = cj.at("algorithm").get<std::string>();
      c.problem = cj.at("problem").get<std::string>();
      c.run = cj.at("run").get<int>();
      c.seed = cj.at("seed").get<std::uint64_t>();
      c.ok = cj.at("ok").get<bool>();
      c.error = cj.value("error", std::string{});
      if (c.ok) {
        c.record = run_record_from_json(cj.at("record"));
        auto it = std::find_if(problems.begin(), problems.end(), [&](const Problem& p) { return p.name == c.problem; });
        if (it == problems.end()) throw Error(ErrorKind::Io, "runs.json names unknown problem " + c.problem);
        c.final_error = final_error(*it, c.record.final_best.fitness, r.config.error_floor);
      }
      r.cells.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "malformed runs.json in " + dir.string() + ": " + e.what());
  }
  r.table = build_stats(r.config, r.cells);
  return r;
}

}  // namespace histarch
