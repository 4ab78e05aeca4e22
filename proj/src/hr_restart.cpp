#include "histarch/hr_restart.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace histarch {

DepthParams derive_depth_params(std::uint64_t budget, int lambda) {
  if (budget < 2 || lambda < 2) throw Error(ErrorKind::Parameter, "budget and lambda must be >= 2");
  // ceil(log2 n) == bit width of n - 1, exact for integers
  const auto ceil_log2 = [](std::uint64_t n) { return static_cast<int>(std::bit_width(n - 1)); };
  return {ceil_log2(budget), ceil_log2(static_cast<std::uint64_t>(lambda))};
}

CmaState seed_cma_from_roi(const RoiSuggestion& roi, int lambda, const Region& domain, double sigma_factor) {
  if (roi.seeds.empty()) throw Error(ErrorKind::Structure, "ROI has no seeds");
  if (!(sigma_factor > 0.0)) throw Error(ErrorKind::Parameter, "sigma_factor must be positive");
  std::vector<double> mean(roi.seeds.front().coords.size(), 0.0);
  for (const SearchPoint& s : roi.seeds)
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += s.coords[d];
  for (double& m : mean) m /= static_cast<double>(roi.seeds.size());
  return cma_init(mean, sigma_factor * roi.region.max_side(), lambda, domain);
}

const char* to_string(PhaseKind k) { return k == PhaseKind::Explore ? "explore" : "exploit"; }

namespace {

/// Observes every evaluation; keeps best-so-far, the trace and phase bounds.
class Recorder {
 public:
  Recorder(RunRecord& rec, BudgetedEvaluator& ev, const RunHooks& hooks) : rec_(rec), ev_(ev), hooks_(hooks) {
    rec_.budget = ev.budget();
    rec_.final_best.fitness = std::numeric_limits<double>::infinity();
    ev_.set_observer([this](std::span<const double> x, double f, std::uint64_t idx) {
      if (f < rec_.final_best.fitness) {
        rec_.final_best = SearchPoint{{x.begin(), x.end()}, f, idx};
        rec_.trace.emplace_back(idx, f);
      }
      if (hooks_.on_evaluation) hooks_.on_evaluation(kind_, x, f, idx);
    });
  }
  ~Recorder() { ev_.set_observer({}); }
  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  void begin(PhaseKind kind) {
    kind_ = kind;
    start_ = ev_.used() + 1;
  }

  void end(std::optional<Region> region = std::nullopt, std::optional<StopReason> stop = std::nullopt,
           std::size_t seeds = 0) {
    if (ev_.used() < start_) return;
    rec_.phases.push_back(Phase{kind_, start_, ev_.used(), std::move(region), stop, seeds});
    start_ = ev_.used() + 1;
  }

  void finish() { rec_.evals_used = ev_.used(); }

 private:
  RunRecord& rec_;
  BudgetedEvaluator& ev_;
  const RunHooks& hooks_;
  PhaseKind kind_ = PhaseKind::Explore;
  std::uint64_t start_ = 1;
};

int resolve_lambda(const Problem& p, const AlgorithmSettings& s) {
  return s.lambda > 0 ? s.lambda : default_lambda(static_cast<int>(p.dim));
}

std::string dump_string(const BspArchive& archive) {
  std::ostringstream os;
  archive.dump(os);
  return os.str();
}

RunRecord run_cnrga(const Problem& problem, const AlgorithmSettings& settings, bool lru, Rng& rng,
                    const RunHooks& hooks) {
  RunRecord rec;
  rec.algorithm = lru ? "cnrga_lru" : "cnrga";
  rec.problem = problem.name;
  BudgetedEvaluator ev(problem, settings.budget);
  Recorder recorder(rec, ev, hooks);

  const int lambda = resolve_lambda(problem, settings);
  const DepthParams depth = derive_depth_params(std::max<std::uint64_t>(settings.budget, 2), lambda);
  BspArchive archive(problem.domain, depth.lv, depth.k, settings.revisit_epsilon);
  GaConfig ga = settings.ga;
  ga.lru_enabled = lru;
  CnrGa engine(ga, archive, ev);

  recorder.begin(PhaseKind::Explore);
  try {
    for (;;) engine.next(rng);
  } catch (const BudgetExhausted&) {
  } catch (const SearchSpaceExhausted&) {
    rec.search_space_exhausted = true;
  }
  recorder.end();
  recorder.finish();
  if (hooks.dump_tree) rec.tree_dump = dump_string(archive);
  return rec;
}

RunRecord run_cmaes_restart(const Problem& problem, const AlgorithmSettings& settings, Rng& rng,
                            const RunHooks& hooks) {
  RunRecord rec;
  rec.algorithm = "cmaes";
  rec.problem = problem.name;
  BudgetedEvaluator ev(problem, settings.budget);
  Recorder recorder(rec, ev, hooks);
  const int lambda = resolve_lambda(problem, settings);
  const double sigma0 = settings.restart_sigma_factor * problem.domain.max_side();

  while (!ev.exhausted()) {
    recorder.begin(PhaseKind::Exploit);
    const auto mean0 = problem.domain.sample_uniform(rng);
    CmaState state = cma_init(mean0, sigma0, lambda, problem.domain);
    const StopReason stop = run_cma(state, ev, rng, settings.cma);
    recorder.end(problem.domain, stop);
    if (stop == StopReason::BudgetExhausted) break;
  }
  recorder.finish();
  return rec;
}

}  // namespace

RunRecord hr_run(const Problem& problem, const AlgorithmSettings& settings, Rng& rng, const RunHooks& hooks) {
  if (settings.budget < static_cast<std::uint64_t>(settings.ga.pop_size))
    throw Error(ErrorKind::Parameter, "budget must cover at least one GA population");

  RunRecord rec;
  rec.algorithm = "hr";
  rec.problem = problem.name;
  BudgetedEvaluator ev(problem, settings.budget);
  Recorder recorder(rec, ev, hooks);

  const int lambda = resolve_lambda(problem, settings);
  const DepthParams depth = derive_depth_params(settings.budget, lambda);
  BspArchive archive(problem.domain, depth.lv, depth.k, settings.revisit_epsilon);
  GaConfig ga = settings.ga;
  ga.lru_enabled = false;
  CnrGa engine(ga, archive, ev);

  recorder.begin(PhaseKind::Explore);
  try {
    for (;;) {
      const ArchivedEvaluation e = engine.next(rng);
      const auto roi = archive.roi_trigger(e.leaf);
      if (!roi) continue;

      recorder.end();
      recorder.begin(PhaseKind::Exploit);
      CmaState state = seed_cma_from_roi(*roi, lambda, problem.domain, settings.sigma_factor);
      const StopReason stop = run_cma(state, ev, rng, settings.cma);
      archive.block(roi->subroot);
      recorder.end(roi->region, stop, roi->seeds.size());
      if (stop == StopReason::BudgetExhausted) break;
      recorder.begin(PhaseKind::Explore);
    }
  } catch (const BudgetExhausted&) {
  } catch (const SearchSpaceExhausted&) {
    rec.search_space_exhausted = true;
  }
  recorder.end();
  recorder.finish();
  if (hooks.dump_tree) rec.tree_dump = dump_string(archive);
  return rec;
}

bool is_known_algorithm(std::string_view algo) {
  return algo == "hr" || algo == "cmaes" || algo == "cmaes_restart" || algo == "cnrga_lru" || algo == "cnrga";
}

RunRecord run_baseline(const Problem& problem, std::string_view algo, const AlgorithmSettings& settings, Rng& rng,
                       const RunHooks& hooks) {
  if (algo == "cmaes" || algo == "cmaes_restart") return run_cmaes_restart(problem, settings, rng, hooks);
  if (algo == "cnrga_lru") return run_cnrga(problem, settings, true, rng, hooks);
  if (algo == "cnrga") return run_cnrga(problem, settings, false, rng, hooks);
  throw Error(ErrorKind::Parameter, "unknown algorithm '" + std::string(algo) + "'");
}

RunRecord run_algorithm(const Problem& problem, std::string_view algo, const AlgorithmSettings& settings, Rng& rng,
                        const RunHooks& hooks) {
  if (algo == "hr") return hr_run(problem, settings, rng, hooks);
  return run_baseline(problem, algo, settings, rng, hooks);
}

nlohmann::json to_json(const RunRecord& r, bool include_trace) {
  using nlohmann::json;
  json j;
  j["algorithm"] = r.algorithm;
  j["problem"] = r.problem;
  j["budget"] = r.budget;
  j["evals_used"] = r.evals_used;
  j["search_space_exhausted"] = r.search_space_exhausted;
  j["final_best"] = {{"coords", r.final_best.coords},
                     {"fitness", r.final_best.fitness},
                     {"eval_index", r.final_best.eval_index}};
  if (include_trace) {
    json trace = json::array();
    for (const auto& [idx, f] : r.trace) trace.push_back(json::array({idx, f}));
    j["best_fitness_trace"] = std::move(trace);
    json phases = json::array();
    for (const Phase& p : r.phases) {
      json pj{{"kind", to_string(p.kind)}, {"start", p.start}, {"end", p.end}};
      if (p.region) pj["region"] = {{"lower", p.region->lower()}, {"upper", p.region->upper()}};
      if (p.stop) pj["stop"] = to_string(*p.stop);
      if (p.kind == PhaseKind::Exploit) pj["seeds"] = p.seeds;
      phases.push_back(std::move(pj));
    }
    j["phases"] = std::move(phases);
  }
  return j;
}

namespace {

StopReason stop_from_string(const std::string& s) {
  for (auto r : {StopReason::BudgetExhausted, StopReason::CovCondition, StopReason::Stagnation, StopReason::TolFun,
                 StopReason::TolX, StopReason::NumericalError})
    if (s == to_string(r)) return r;
  throw Error(ErrorKind::Input, "unknown stop reason '" + s + "'");
}

}  // namespace

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.budget = j.at("budget").get<std::uint64_t>();
    r.evals_used = j.at("evals_used").get<std::uint64_t>();
    r.search_space_exhausted = j.value("search_space_exhausted", false);
    const auto& fb = j.at("final_best");
    r.final_best.coords = fb.at("coords").get<std::vector<double>>();
    // json has no inf; a run that never evaluated stores null
    r.final_best.fitness =
        fb.at("fitness").is_null() ? std::numeric_limits<double>::infinity() : fb.at("fitness").get<double>();
    r.final_best.eval_index = fb.at("eval_index").get<std::uint64_t>();
    if (j.contains("best_fitness_trace"))
      for (const auto& e : j["best_fitness_trace"]) r.trace.emplace_back(e.at(0).get<std::uint64_t>(), e.at(1).get<double>());
    if (j.contains("phases")) {
      for (const auto& pj : j["phases"]) {
        Phase p;
        p.kind = pj.at("kind").get<std::string>() == "exploit" ? PhaseKind::Exploit : PhaseKind::Explore;
        p.start = pj.at("start").get<std::uint64_t>();
        p.end = pj.at("end").get<std::uint64_t>();
        if (pj.contains("region"))
          p.region = Region(pj["region"].at("lower").get<std::vector<double>>(),
                            pj["region"].at("upper").get<std::vector<double>>());
        if (pj.contains("stop")) p.stop = stop_from_string(pj["stop"].get<std::string>());
        p.seeds = pj.value("seeds", std::size_t{0});
        r.phases.push_back(std::move(p));
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Input, std::string("malformed run record: ") + e.what());
  }
}

}  // namespace histarch
