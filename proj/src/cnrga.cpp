#include "histarch/cnrga.hpp"

#include <algorithm>

namespace histarch {

void GaConfig::validate() const {
  if (pop_size < 2) throw Error(ErrorKind::Parameter, "pop_size must be >= 2");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw Error(ErrorKind::Parameter, "crossover_rate must lie in [0, 1]");
  if (tournament_size < 1) throw Error(ErrorKind::Parameter, "tournament_size must be >= 1");
  if (!(lru_fraction > 0.0 && lru_fraction < 1.0))
    throw Error(ErrorKind::Parameter, "lru_fraction must lie in (0, 1)");
  if (lru_enabled && lru_capacity < 2) throw Error(ErrorKind::Parameter, "lru_capacity must be >= 2");
  if (max_revisit_retries < 1 || reject_factor < 1)
    throw Error(ErrorKind::Parameter, "retry limits must be positive");
}

namespace {

std::vector<double> sample_unblocked(const BspArchive& archive, Rng& rng, std::size_t max_reject) {
  for (std::size_t i = 0; i < max_reject; ++i) {
    auto x = archive.domain().sample_uniform(rng);
    if (!archive.is_blocked(x)) return x;
  }
  throw SearchSpaceExhausted();
}

}  // namespace

ArchivedEvaluation evaluate_via_archive(std::span<const double> coords, BspArchive& archive,
                                        BudgetedEvaluator& ev, Rng& rng, const GaConfig& config) {
  const std::size_t max_reject =
      static_cast<std::size_t>(config.reject_factor) * static_cast<std::size_t>(config.pop_size);
  std::vector<double> candidate(coords.begin(), coords.end());
  int revisits = 0;
  for (;;) {
    if (ev.exhausted()) throw BudgetExhausted();
    const InsertOutcome out = archive.insert(candidate, ev.used() + 1);
    switch (out.kind) {
      case InsertOutcome::Kind::NewLeaf: {
        const double f = ev.evaluate(candidate);
        archive.set_fitness(out.node, f);
        return {SearchPoint{std::move(candidate), f, ev.used()}, out.node, out.depth};
      }
      case InsertOutcome::Kind::Revisit:
        if (++revisits >= config.max_revisit_retries) {
          revisits = 0;
          candidate = archive.domain().sample_uniform(rng);
        } else {
          candidate = archive.mutation_region(out.node).sample_uniform(rng);
        }
        break;
      case InsertOutcome::Kind::Blocked:
        candidate = sample_unblocked(archive, rng, max_reject);
        break;
    }
  }
}

std::pair<std::vector<double>, std::vector<double>> uniform_crossover(std::span<const double> a,
                                                                      std::span<const double> b,
                                                                      double rate, Rng& rng) {
  if (a.size() != b.size()) throw Error(ErrorKind::Input, "parents differ in dimension");
  std::vector<double> c(a.begin(), a.end());
  std::vector<double> d(b.begin(), b.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (u(rng) < rate) std::swap(c[i], d[i]);
  return {std::move(c), std::move(d)};
}

std::size_t tournament_select(std::span<const SearchPoint> pop, int size, Rng& rng) {
  if (pop.empty()) throw Error(ErrorKind::Input, "tournament on an empty population");
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < size; ++i) {
    const std::size_t c = pick(rng);
    if (pop[c].fitness < pop[best].fitness) best = c;
  }
  return best;
}

bool maybe_prune(BspArchive& archive, const GaConfig& config) {
  if (!config.lru_enabled || archive.n_points() < config.lru_capacity) return false;
  archive.prune_lru(config.lru_fraction);
  return true;
}

CnrGa::CnrGa(GaConfig config, BspArchive& archive, BudgetedEvaluator& ev)
    : config_(config), archive_(archive), ev_(ev) {
  config_.validate();
}

CnrGa::CnrGa(GaConfig config, BspArchive& archive, BudgetedEvaluator& ev, GaPopulation start)
    : CnrGa(config, archive, ev) {
  pop_ = std::move(start);
}

ArchivedEvaluation CnrGa::next(Rng& rng) {
  ArchivedEvaluation result;
  if (!initialized()) {
    const auto x = archive_.domain().sample_uniform(rng);
    result = evaluate_via_archive(x, archive_, ev_, rng, config_);
    pop_.individuals.push_back(result.point);
  } else {
    if (pending_.empty()) {
      const auto& ind = pop_.individuals;
      const auto& a = ind[tournament_select(ind, config_.tournament_size, rng)];
      const auto& b = ind[tournament_select(ind, config_.tournament_size, rng)];
      auto [c, d] = uniform_crossover(a.coords, b.coords, config_.crossover_rate, rng);
      pending_.push_back(std::move(c));
      pending_.push_back(std::move(d));
    }
    result = evaluate_via_archive(pending_.front(), archive_, ev_, rng, config_);
    pending_.pop_front();
    offspring_.push_back(result.point);
    if (offspring_.size() >= static_cast<std::size_t>(config_.pop_size)) finish_generation();
  }
  maybe_prune(archive_, config_);
  return result;
}

void CnrGa::finish_generation() {
  auto by_fitness = [](const SearchPoint& a, const SearchPoint& b) { return a.fitness < b.fitness; };
  const SearchPoint elite = *std::min_element(pop_.individuals.begin(), pop_.individuals.end(), by_fitness);
  auto worst = std::max_element(offspring_.begin(), offspring_.end(), by_fitness);
  *worst = elite;
  pop_.individuals = std::move(offspring_);
  offspring_.clear();
  pending_.clear();
  ++pop_.generation;
}

void CnrGa::step(Rng& rng) {
  const int start = pop_.generation;
  const bool was_initialized = initialized();
  while (pop_.generation == start) {
    next(rng);
    if (!was_initialized && initialized()) return;
  }
}

GaPopulation ga_step(GaPopulation pop, const GaConfig& config, BspArchive& archive, BudgetedEvaluator& ev,
                     Rng& rng) {
  if (pop.individuals.size() < static_cast<std::size_t>(config.pop_size))
    throw Error(ErrorKind::Input, "ga_step needs a complete, evaluated population");
  CnrGa ga(config, archive, ev, std::move(pop));
  ga.step(rng);
  return ga.population();
}

}  // namespace histarch
