#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histarch/benchmarks.hpp"
#include "histarch/bsp_archive.hpp"
#include "histarch/cmaes.hpp"
#include "histarch/cnrga.hpp"
#include "json.hpp"

namespace histarch {

struct DepthParams {
  int lv = 0;
  int k = 0;
  friend bool operator==(const DepthParams&, const DepthParams&) = default;
};

/// lv = ceil(log2 budget), k = ceil(log2 lambda).
DepthParams derive_depth_params(std::uint64_t budget, int lambda);

/// Mean of the seeds, sigma0 = sigma_factor * longest side of the ROI cell, C = I.
CmaState seed_cma_from_roi(const RoiSuggestion& roi, int lambda, const Region& domain,
                           double sigma_factor = 0.3);

enum class PhaseKind { Explore, Exploit };

const char* to_string(PhaseKind k);

struct Phase {
  PhaseKind kind = PhaseKind::Explore;
  std::uint64_t start = 0;  // first evaluation index, 1-based
  std::uint64_t end = 0;    // last evaluation index, inclusive
  std::optional<Region> region;
  std::optional<StopReason> stop;
  std::size_t seeds = 0;
};

struct RunRecord {
  std::string algorithm;
  std::string problem;
  std::uint64_t budget = 0;
  std::uint64_t evals_used = 0;
  bool search_space_exhausted = false;
  /// (evaluation index, best-so-far), one entry per improvement.
  std::vector<std::pair<std::uint64_t, double>> trace;
  std::vector<Phase> phases;
  SearchPoint final_best;
  std::string tree_dump;
};

nlohmann::json to_json(const RunRecord& r, bool include_trace = true);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Everything an algorithm run needs besides the problem and the generator.
struct AlgorithmSettings {
  std::uint64_t budget = 0;
  GaConfig ga;
  CmaOptions cma;
  double sigma_factor = 0.3;  // ROI restarts
  double restart_sigma_factor = 0.3;  // plain restarts, relative to the longest domain side
  int lambda = 0;  // 0: 4 + floor(3 ln D)
  double revisit_epsilon = 0.0;
};

struct RunHooks {
  std::function<void(PhaseKind, std::span<const double>, double fitness, std::uint64_t eval_index)> on_evaluation;
  bool dump_tree = false;
};

/// cNrGA explores; each ROI trigger suspends it for a CMA-ES run seeded from
/// the ROI, after which the ROI is blocked to cNrGA.
RunRecord hr_run(const Problem& problem, const AlgorithmSettings& settings, Rng& rng, const RunHooks& hooks = {});

/// algo: "cmaes" (alias "cmaes_restart"), "cnrga_lru" or "cnrga".
RunRecord run_baseline(const Problem& problem, std::string_view algo, const AlgorithmSettings& settings, Rng& rng,
                       const RunHooks& hooks = {});

/// Dispatches "hr" to hr_run and everything else to run_baseline.
RunRecord run_algorithm(const Problem& problem, std::string_view algo, const AlgorithmSettings& settings, Rng& rng,
                        const RunHooks& hooks = {});

bool is_known_algorithm(std::string_view algo);

}  // namespace histarch
