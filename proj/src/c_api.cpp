#include "histarch/histarch.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "histarch/harness.hpp"

struct ha_archive {
  histarch::BspArchive impl;
};

struct ha_suite {
  std::vector<histarch::Problem> problems;
  std::size_t dim;
};

namespace {

thread_local std::string g_last_error;

ha_status status_of(histarch::ErrorKind k) {
  using histarch::ErrorKind;
  switch (k) {
    case ErrorKind::Parameter: return HA_ERR_PARAMETER;
    case ErrorKind::Domain: return HA_ERR_DOMAIN;
    case ErrorKind::Input: return HA_ERR_INPUT;
    case ErrorKind::Structure: return HA_ERR_STRUCTURE;
    case ErrorKind::Numeric: return HA_ERR_NUMERIC;
    case ErrorKind::Io: return HA_ERR_IO;
    case ErrorKind::Config: return HA_ERR_CONFIG;
    case ErrorKind::BudgetExhausted: return HA_ERR_BUDGET;
    case ErrorKind::SearchSpaceExhausted: return HA_ERR_EXHAUSTED;
  }
  return HA_ERR_INTERNAL;
}

template <class F>
ha_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return HA_OK;
  } catch (const histarch::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return HA_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw histarch::Error(histarch::ErrorKind::Parameter, std::string(what) + " is NULL");
}

std::span<const double> point(const double* x, std::size_t dim, std::size_t expected) {
  need(x, "x");
  if (dim != expected)
    throw histarch::Error(histarch::ErrorKind::Input,
                          "expected " + std::to_string(expected) + " coordinates, got " + std::to_string(dim));
  return {x, dim};
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json stats_json(const histarch::StatsTable& t) {
  using nlohmann::json;
  json problems = json::array();
  for (std::size_t p = 0; p < t.problems.size(); ++p) {
    json rows = json::array();
    for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
      const auto& s = t.summary[p][a];
      rows.push_back({{"algorithm", t.algorithms[a]},
                      {"best", number_or_null(s.best)},
                      {"worst", number_or_null(s.worst)},
                      {"median", number_or_null(s.median)},
                      {"mean", number_or_null(s.mean)},
                      {"std", number_or_null(s.std)},
                      {"runs", s.n},
                      {"failed", t.failed[p][a]},
                      {"rank", t.ranks[p][a]},
                      {"mark", t.algorithms[a] == t.reference ? "" : to_string(t.marks[p][a])}});
    }
    problems.push_back({{"name", t.problems[p]}, {"rows", std::move(rows)}});
  }
  return {{"algorithms", t.algorithms},
          {"reference", t.reference},
          {"problems", std::move(problems)},
          {"results_csv", histarch::results_csv(t)},
          {"ranks_csv", histarch::ranks_csv(t)},
          {"rank_summary_csv", histarch::rank_summary_csv(t)}};
}

nlohmann::json parse_json(const char* text, histarch::ErrorKind kind) {
  need(text, "json text");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw histarch::Error(kind, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* ha_last_error(void) { return g_last_error.c_str(); }

void ha_string_free(char* s) { std::free(s); }

const char* ha_version(void) { return "0.1.0"; }

ha_status ha_archive_create(const double* lower, const double* upper, size_t dim, int lv, int k, double revisit_eps,
                            ha_archive** out) {
  return guarded([&] {
    need(lower, "lower");
    need(upper, "upper");
    need(out, "out");
    histarch::Region domain({lower, lower + dim}, {upper, upper + dim});
    *out = new ha_archive{histarch::BspArchive(std::move(domain), lv, k, revisit_eps)};
  });
}

void ha_archive_destroy(ha_archive* a) { delete a; }

ha_status ha_archive_insert(ha_archive* a, const double* x, size_t dim, ha_insert_kind* kind, int* depth) {
  return guarded([&] {
    need(a, "archive");
    need(kind, "kind");
    const auto r = a->impl.insert(point(x, dim, a->impl.dim()));
    using K = histarch::InsertOutcome::Kind;
    *kind = r.kind == K::NewLeaf ? HA_NEW_LEAF : r.kind == K::Revisit ? HA_REVISIT : HA_BLOCKED;
    if (depth) *depth = r.depth;
  });
}

ha_status ha_archive_region(const ha_archive* a, const double* x, size_t dim, double* lower, double* upper) {
  return guarded([&] {
    need(a, "archive");
    need(lower, "lower");
    need(upper, "upper");
    const auto leaf = a->impl.locate(point(x, dim, a->impl.dim()));
    if (leaf == histarch::kNoNode) throw histarch::Error(histarch::ErrorKind::Structure, "archive is empty");
    const auto r = a->impl.region_of(leaf);
    std::copy(r.lower().begin(), r.lower().end(), lower);
    std::copy(r.upper().begin(), r.upper().end(), upper);
  });
}

ha_status ha_archive_block_at(ha_archive* a, const double* x, size_t dim) {
  return guarded([&] {
    need(a, "archive");
    const auto leaf = a->impl.locate(point(x, dim, a->impl.dim()));
    if (leaf == histarch::kNoNode) throw histarch::Error(histarch::ErrorKind::Structure, "archive is empty");
    a->impl.block(leaf);
  });
}

ha_status ha_archive_is_blocked(const ha_archive* a, const double* x, size_t dim, int* blocked) {
  return guarded([&] {
    need(a, "archive");
    need(blocked, "blocked");
    *blocked = a->impl.is_blocked(point(x, dim, a->impl.dim())) ? 1 : 0;
  });
}

ha_status ha_archive_prune(ha_archive* a, double fraction, size_t* removed) {
  return guarded([&] {
    need(a, "archive");
    const auto n = a->impl.prune_lru(fraction);
    if (removed) *removed = n;
  });
}

size_t ha_archive_size(const ha_archive* a) { return a ? a->impl.n_points() : 0; }

int ha_archive_max_depth(const ha_archive* a) { return a ? a->impl.max_depth() : 0; }

ha_status ha_archive_dump(const ha_archive* a, char** out) {
  return guarded([&] {
    need(a, "archive");
    need(out, "out");
    std::ostringstream os;
    a->impl.dump(os);
    *out = dup_string(os.str());
  });
}

ha_status ha_suite_create(size_t dim, uint64_t seed, ha_suite** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ha_suite{histarch::make_suite(dim, seed), dim};
  });
}

void ha_suite_destroy(ha_suite* s) { delete s; }

size_t ha_suite_size(const ha_suite* s) { return s ? s->problems.size() : 0; }

size_t ha_suite_dim(const ha_suite* s) { return s ? s->dim : 0; }

const char* ha_suite_name(const ha_suite* s, size_t index) {
  if (!s || index >= s->problems.size()) return nullptr;
  return s->problems[index].name.c_str();
}

namespace {

const histarch::Problem& problem_at(const ha_suite* s, size_t index) {
  need(s, "suite");
  if (index >= s->problems.size())
    throw histarch::Error(histarch::ErrorKind::Parameter, "problem index " + std::to_string(index) + " out of range");
  return s->problems[index];
}

}  // namespace

ha_status ha_suite_evaluate(const ha_suite* s, size_t index, const double* x, size_t dim, double* f) {
  return guarded([&] {
    const auto& p = problem_at(s, index);
    need(f, "f");
    const auto xs = point(x, dim, p.dim);
    histarch::require_finite(xs, "x");
    if (!p.domain.contains(xs)) throw histarch::Error(histarch::ErrorKind::Domain, "point outside the domain");
    *f = p.f(xs);
  });
}

ha_status ha_suite_manifest(const ha_suite* s, char** json_out) {
  return guarded([&] {
    need(s, "suite");
    need(json_out, "json_out");
    *json_out = dup_string(histarch::suite_manifest(s->problems).dump(2));
  });
}

int ha_default_lambda(int dim) { return dim >= 1 ? histarch::default_lambda(dim) : 0; }

int ha_stagnation_window(int dim, int lambda) {
  return dim >= 1 && lambda >= 1 ? histarch::stagnation_window(dim, lambda) : 0;
}

ha_status ha_derive_depth_params(uint64_t budget, int lambda, int* lv, int* k) {
  return guarded([&] {
    need(lv, "lv");
    need(k, "k");
    const auto d = histarch::derive_depth_params(budget, lambda);
    *lv = d.lv;
    *k = d.k;
  });
}

ha_status ha_run_algorithm(const ha_suite* s, size_t index, const char* algo, uint64_t budget, uint64_t seed,
                           int include_trace, char** json_out) {
  return guarded([&] {
    const auto& p = problem_at(s, index);
    need(algo, "algo");
    need(json_out, "json_out");
    if (!histarch::is_known_algorithm(algo))
      throw histarch::Error(histarch::ErrorKind::Parameter, std::string("unknown algorithm '") + algo + "'");
    histarch::AlgorithmSettings settings;
    settings.budget = budget;
    histarch::Rng rng(seed);
    const auto rec = histarch::run_algorithm(p, algo, settings, rng);
    *json_out = dup_string(histarch::to_json(rec, include_trace != 0).dump());
  });
}

ha_status ha_experiment_run(const char* config_json, char** summary_out, char** log_out) {
  if (log_out) *log_out = nullptr;
  std::ostringstream log;
  const ha_status st = guarded([&] {
    need(summary_out, "summary_out");
    const auto cfg = histarch::config_from_json(parse_json(config_json, histarch::ErrorKind::Config));
    const auto result = histarch::run_experiment(cfg, &log);
    if (!cfg.out_dir.empty()) histarch::write_outputs(result, cfg.out_dir);
    *summary_out = dup_string(stats_json(result.table).dump());
  });
  if (log_out && !log.str().empty()) *log_out = dup_string(log.str());
  return st;
}

ha_status ha_experiment_stats(const char* dir, char** summary_out) {
  return guarded([&] {
    need(dir, "dir");
    need(summary_out, "summary_out");
    const auto result = histarch::load_results(dir);
    histarch::write_tables(result.table, dir);
    *summary_out = dup_string(stats_json(result.table).dump());
  });
}

ha_status ha_kruskal_wallis(const double* values, const size_t* sizes, size_t groups, double* h, double* p) {
  return guarded([&] {
    need(values, "values");
    need(sizes, "sizes");
    need(h, "h");
    need(p, "p");
    std::vector<std::vector<double>> g(groups);
    std::size_t off = 0;
    for (std::size_t i = 0; i < groups; ++i) {
      g[i].assign(values + off, values + off + sizes[i]);
      off += sizes[i];
    }
    const auto kw = histarch::kruskal_wallis(g);
    *h = kw.h;
    *p = kw.p;
  });
}

}  // extern "C"
