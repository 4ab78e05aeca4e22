#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "histarch/benchmarks.hpp"
#include "histarch/bsp_archive.hpp"
#include "histarch/types.hpp"

namespace histarch {

struct GaConfig {
  int pop_size = 100;
  double crossover_rate = 0.5;
  int tournament_size = 2;
  bool lru_enabled = false;
  double lru_fraction = 0.5;
  std::size_t lru_capacity = 10000;
  /// Consecutive revisits of one offspring before falling back to a uniform domain sample.
  int max_revisit_retries = 100;
  /// Consecutive blocked samples tolerated = reject_factor * pop_size.
  int reject_factor = 10;

  void validate() const;
};

struct GaPopulation {
  std::vector<SearchPoint> individuals;
  int generation = 0;
};

/// An evaluation that went through the archive, with the leaf it created.
struct ArchivedEvaluation {
  SearchPoint point;
  NodeId leaf = kNoNode;
  int depth = 0;
};

/// Insert-or-mutate loop: revisits are replaced by a uniform sample in the
/// revisited leaf's cell, blocked points by a uniform sample outside every
/// blocked region. Consumes exactly one objective evaluation.
///
/// Throws BudgetExhausted before touching the archive when no budget is left,
/// SearchSpaceExhausted when no unblocked sample can be found.
ArchivedEvaluation evaluate_via_archive(std::span<const double> coords, BspArchive& archive,
                                        BudgetedEvaluator& ev, Rng& rng, const GaConfig& config = {});

/// Per-coordinate gene exchange: each position is swapped with probability `rate`.
std::pair<std::vector<double>, std::vector<double>> uniform_crossover(std::span<const double> a,
                                                                      std::span<const double> b,
                                                                      double rate, Rng& rng);

/// Index of the fittest (lowest) of `size` uniformly drawn individuals.
std::size_t tournament_select(std::span<const SearchPoint> pop, int size, Rng& rng);

/// Prunes the least recently used half (lru_fraction) once the archive holds
/// lru_capacity points. Returns true when it pruned.
bool maybe_prune(BspArchive& archive, const GaConfig& config);

/// Continuous non-revisiting GA driven one evaluation at a time, so a caller
/// can suspend it between any two evaluations.
class CnrGa {
 public:
  CnrGa(GaConfig config, BspArchive& archive, BudgetedEvaluator& ev);
  CnrGa(GaConfig config, BspArchive& archive, BudgetedEvaluator& ev, GaPopulation start);

  /// Evaluates one individual: part of the initial population while it is
  /// incomplete, the next offspring afterwards. Survivor selection runs when
  /// the last offspring of a generation is in.
  ArchivedEvaluation next(Rng& rng);

  /// Runs next() until the generation counter advances.
  void step(Rng& rng);

  const GaPopulation& population() const { return pop_; }
  bool initialized() const { return pop_.individuals.size() >= static_cast<std::size_t>(config_.pop_size); }
  const GaConfig& config() const { return config_; }

 private:
  void finish_generation();

  GaConfig config_;
  BspArchive& archive_;
  BudgetedEvaluator& ev_;
  GaPopulation pop_;
  std::vector<SearchPoint> offspring_;
  std::deque<std::vector<double>> pending_;
};

/// One full generation on a complete population.
GaPopulation ga_step(GaPopulation pop, const GaConfig& config, BspArchive& archive, BudgetedEvaluator& ev,
                     Rng& rng);

}  // namespace histarch
