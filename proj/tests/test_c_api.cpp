// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "histarch/histarch.h"
#include "json.hpp"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ha_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("archive handle") {
  const double lo[2] = {0, 0}, hi[2] = {10, 10};
  ha_archive* a = nullptr;
  REQUIRE(ha_archive_create(lo, hi, 2, 17, 4, 0.0, &a) == HA_OK);

  ha_insert_kind kind;
  int depth = -1;
  const double pa[2] = {2, 5}, pb[2] = {8, 6};
  CHECK(ha_archive_insert(a, pa, 2, &kind, &depth) == HA_OK);
  CHECK(kind == HA_NEW_LEAF);
  CHECK(depth == 1);
  CHECK(ha_archive_insert(a, pb, 2, &kind, &depth) == HA_OK);
  CHECK(kind == HA_NEW_LEAF);
  CHECK(ha_archive_insert(a, pa, 2, &kind, nullptr) == HA_OK);
  CHECK(kind == HA_REVISIT);
  CHECK(ha_archive_size(a) == 2);
  CHECK(ha_archive_max_depth(a) == 1);

  double rl[2], ru[2];
  CHECK(ha_archive_region(a, pa, 2, rl, ru) == HA_OK);
  CHECK(rl[0] == 0);
  CHECK(ru[0] == 5);
  CHECK(ru[1] == 10);

  const double outside[2] = {11, 0};
  CHECK(ha_archive_insert(a, outside, 2, &kind, nullptr) == HA_ERR_DOMAIN);
  CHECK(std::strlen(ha_last_error()) > 0);
  const double bad[2] = {NAN, 1};
  CHECK(ha_archive_insert(a, bad, 2, &kind, nullptr) == HA_ERR_INPUT);
  CHECK(ha_archive_insert(a, pa, 3, &kind, nullptr) == HA_ERR_INPUT);
  CHECK(ha_archive_insert(nullptr, pa, 2, &kind, nullptr) == HA_ERR_PARAMETER);

  CHECK(ha_archive_block_at(a, pa, 2) == HA_OK);
  int blocked = 0;
  const double inside[2] = {1, 1};
  CHECK(ha_archive_is_blocked(a, inside, 2, &blocked) == HA_OK);
  CHECK(blocked == 1);
  CHECK(ha_archive_insert(a, inside, 2, &kind, nullptr) == HA_OK);
  CHECK(kind == HA_BLOCKED);
  CHECK(ha_last_error()[0] == '\0');

  char* dump = nullptr;
  CHECK(ha_archive_dump(a, &dump) == HA_OK);
  CHECK(take(dump).rfind("0 internal 0 5 0", 0) == 0);

  size_t removed = 9;
  CHECK(ha_archive_prune(a, 1.5, &removed) == HA_ERR_PARAMETER);
  CHECK(ha_archive_prune(a, 0.5, &removed) == HA_OK);
  CHECK(removed == 1);
  CHECK(ha_archive_size(a) == 1);
  ha_archive_destroy(a);

  CHECK(ha_archive_create(hi, lo, 2, 17, 4, 0.0, &a) != HA_OK);
}

TEST_CASE("suite handle") {
  ha_suite* s = nullptr;
  CHECK(ha_suite_create(7, 1, &s) == HA_ERR_PARAMETER);
  REQUIRE(ha_suite_create(10, 2019, &s) == HA_OK);
  CHECK(ha_suite_size(s) == 10);
  CHECK(ha_suite_dim(s) == 10);
  CHECK(std::string(ha_suite_name(s, 0)) == "sphere");
  CHECK(ha_suite_name(s, 10) == nullptr);

  double x[10] = {0}, f = -1;
  CHECK(ha_suite_evaluate(s, 3, x, 10, &f) == HA_OK);  // rastrigin
  CHECK(f == 0.0);
  x[0] = 1.0;
  CHECK(ha_suite_evaluate(s, 3, x, 10, &f) == HA_OK);
  CHECK(f == doctest::Approx(1.0));
  x[0] = 1000;
  CHECK(ha_suite_evaluate(s, 0, x, 10, &f) == HA_ERR_DOMAIN);
  CHECK(ha_suite_evaluate(s, 99, x, 10, &f) == HA_ERR_PARAMETER);

  char* manifest = nullptr;
  CHECK(ha_suite_manifest(s, &manifest) == HA_OK);
  const auto m = nlohmann::json::parse(take(manifest));
  CHECK(m.size() == 10);

  char* rec = nullptr;
  CHECK(ha_run_algorithm(s, 0, "hr", 2000, 5, 1, &rec) == HA_OK);
  const auto r = nlohmann::json::parse(take(rec));
  CHECK(r["evals_used"] == 2000);
  CHECK(r["algorithm"] == "hr");
  CHECK(r.contains("phases"));
  CHECK(ha_run_algorithm(s, 0, "nope", 2000, 5, 1, &rec) == HA_ERR_PARAMETER);
  ha_suite_destroy(s);
}

TEST_CASE("parameters and statistics") {
  CHECK(ha_default_lambda(10) == 10);
  CHECK(ha_default_lambda(30) == 14);
  CHECK(ha_default_lambda(0) == 0);
  CHECK(ha_stagnation_window(10, 10) == 40);
  int lv = 0, k = 0;
  CHECK(ha_derive_depth_params(100000, 10, &lv, &k) == HA_OK);
  CHECK(lv == 17);
  CHECK(k == 4);
  CHECK(ha_derive_depth_params(1, 10, &lv, &k) == HA_ERR_PARAMETER);

  const double v[10] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const size_t sizes[2] = {5, 5};
  double h = 0, p = 0;
  CHECK(ha_kruskal_wallis(v, sizes, 2, &h, &p) == HA_OK);
  CHECK(h == doctest::Approx(6.8181818).epsilon(1e-7));
  CHECK(p < 0.01);
  CHECK(ha_kruskal_wallis(v, sizes, 1, &h, &p) == HA_ERR_PARAMETER);
}

TEST_CASE("experiments") {
  const auto dir = std::filesystem::temp_directory_path() / "histarch_capi_exp";
  std::filesystem::remove_all(dir);
  nlohmann::json cfg{{"suite", "2d"}, {"algos", "hr,cmaes"}, {"problems", "sphere"}, {"budget", 500},
                     {"runs", 3},     {"out", dir.string()}};
  char* summary = nullptr;
  char* log = nullptr;
  REQUIRE(ha_experiment_run(cfg.dump().c_str(), &summary, &log) == HA_OK);
  const auto j = nlohmann::json::parse(take(summary));
  take(log);
  CHECK(j["algorithms"].size() == 2);
  CHECK(j["problems"][0]["name"] == "sphere");
  CHECK(std::filesystem::exists(dir / "results.csv"));

  REQUIRE(ha_experiment_stats(dir.string().c_str(), &summary) == HA_OK);
  CHECK(nlohmann::json::parse(take(summary))["results_csv"] == j["results_csv"]);

  CHECK(ha_experiment_run("{not json", &summary, nullptr) == HA_ERR_CONFIG);
  CHECK(ha_experiment_run(R"({"runs": 1})", &summary, nullptr) == HA_ERR_CONFIG);
  CHECK(ha_experiment_stats((dir / "nowhere").string().c_str(), &summary) == HA_ERR_IO);
  std::filesystem::remove_all(dir);
}
