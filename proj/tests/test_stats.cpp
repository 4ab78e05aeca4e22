#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "histarch/stats.hpp"
#include "histarch/types.hpp"
#include "oracles.hpp"

using namespace histarch;

namespace {

using Groups = std::vector<std::vector<double>>;

// Mann-Whitney U with the tie-corrected normal approximation, no continuity
// correction; z^2 equals the two-group H.
struct MannWhitney {
  double z2;
  double p;
};

MannWhitney mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size()), n = n1 + n2;
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (var <= 0.0) return {0.0, 1.0};
  const double z = (u - n1 * n2 / 2.0) / std::sqrt(var);
  return {z * z, std::erfc(std::abs(z) / std::sqrt(2.0))};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> random_sample(Rng& rng, std::size_t n, int levels, double shift) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  std::vector<double> v(n);
  for (double& x : v) x = pick(rng) + shift;
  return v;
}

}  // namespace

TEST_CASE("average ranks") {
  const std::vector<double> v{3, 1, 4, 1, 5};
  CHECK(average_ranks(v) == std::vector<double>{3, 1.5, 4, 1.5, 5});
  const std::vector<double> same{2, 2, 2};
  CHECK(average_ranks(same) == std::vector<double>{2, 2, 2});
}

TEST_CASE("kruskal-wallis examples") {
  SUBCASE("identical groups") {
    const Groups g{{1, 2, 3}, {1, 2, 3}};
    const auto kw = kruskal_wallis(g);
    CHECK(kw.h == doctest::Approx(0.0));
    CHECK(kw.p == doctest::Approx(1.0));
  }
  SUBCASE("separated groups") {
    const Groups g{{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}};
    // ranks are the values: R1 = 15, R2 = 40, N = 10
    const double expect = 12.0 / (10.0 * 11.0) * (15.0 * 15.0 / 5.0 + 40.0 * 40.0 / 5.0) - 3.0 * 11.0;
    const auto kw = kruskal_wallis(g);
    CHECK(std::abs(kw.h - expect) < 1e-12);
    CHECK(std::abs(kw.h - 6.818182) < 1e-5);
    CHECK(kw.p < 0.01);
    CHECK(kw.p == doctest::Approx(std::erfc(std::sqrt(expect / 2.0))).epsilon(1e-10));
    CHECK(kw.p == doctest::Approx(0.009).epsilon(0.05));
  }
  SUBCASE("ties") {
    const Groups g{{1, 1, 2}, {2, 3, 3}};
    const auto kw = kruskal_wallis(g);
    CHECK(std::abs(kw.h - oracle::kruskal_h(g)) < 1e-12);
    // by hand: ranks 1.5 1.5 3.5 | 3.5 5.5 5.5, C = 1 - 18/210
    const double raw = 12.0 / 42.0 * (6.5 * 6.5 / 3.0 + 14.5 * 14.5 / 3.0) - 21.0;
    CHECK(kw.h == doctest::Approx(raw / (1.0 - 18.0 / 210.0)).epsilon(1e-12));
  }
  SUBCASE("all equal") {
    const Groups g{{4, 4}, {4, 4}, {4, 4, 4}};
    const auto kw = kruskal_wallis(g);
    CHECK(kw.h == 0.0);
    CHECK(kw.p == 1.0);
  }
  SUBCASE("bad input") {
    const Groups one{{1, 2, 3}};
    const Groups tiny{{1, 2}, {3}};
    const Groups nan{{1, std::nan("")}, {3, 4}};
    for (const auto* g : {&one, &tiny}) {
      try {
        kruskal_wallis(*g);
        FAIL("no throw");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
      }
    }
    CHECK_THROWS_AS(kruskal_wallis(nan), Error);
  }
}

TEST_CASE("kruskal-wallis against the rank-dispersion oracle") {
  Rng rng(17);
  std::uniform_int_distribution<int> groups_n(2, 4), size_n(2, 12), levels_n(2, 8);
  for (int t = 0; t < 100; ++t) {
    Groups g(static_cast<std::size_t>(groups_n(rng)));
    const int levels = levels_n(rng);
    for (auto& v : g) v = random_sample(rng, static_cast<std::size_t>(size_n(rng)), levels, 0.0);
    const auto kw = kruskal_wallis(g);
    CHECK(std::abs(kw.h - oracle::kruskal_h(g)) < 1e-9);
    CHECK(kw.h >= 0.0);
    CHECK(kw.p >= 0.0);
    CHECK(kw.p <= 1.0);
  }
}

TEST_CASE("H depends only on ranks") {
  Rng rng(21);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    Groups g(3);
    for (auto& v : g) {
      v.resize(8);
      for (double& x : v) x = normal(rng);
    }
    Groups h = g;
    for (auto& v : h)
      for (double& x : v) x = std::exp(3.0 * x) + x * x * x;
    CHECK(kruskal_wallis(g).h == doctest::Approx(kruskal_wallis(h).h).epsilon(1e-12));
  }
}

TEST_CASE("chi-square tail") {
  for (double x : {0.1, 1.0, 3.84, 6.8181818, 20.0}) {
    CHECK(chi_square_upper_tail(x, 1) == doctest::Approx(std::erfc(std::sqrt(x / 2.0))).epsilon(1e-12));
    CHECK(chi_square_upper_tail(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-12));
    // dof 3: erfc(sqrt(x/2)) + sqrt(2x/pi) e^{-x/2}
    const double d3 = std::erfc(std::sqrt(x / 2.0)) + std::sqrt(2.0 * x / M_PI) * std::exp(-x / 2.0);
    CHECK(chi_square_upper_tail(x, 3) == doctest::Approx(d3).epsilon(1e-12));
  }
  CHECK(chi_square_upper_tail(0.0, 2) == 1.0);
  CHECK(chi_square_upper_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK_THROWS_AS(chi_square_upper_tail(1.0, 0), Error);
}

TEST_CASE("summaries") {
  const std::vector<double> v{1, 2, 3};
  const Summary s = summarize(v);
  CHECK(s.best == 1);
  CHECK(s.worst == 3);
  CHECK(s.median == 2);
  CHECK(s.mean == 2);
  CHECK(s.std == 1);
  CHECK(s.n == 3);
  const std::vector<double> even{4, 1, 3, 2};
  CHECK(summarize(even).median == 2.5);
  CHECK(std::isnan(summarize(std::vector<double>{}).median));
  CHECK(summarize(std::vector<double>{5}).std == 0.0);
}

TEST_CASE("significance marks") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> worse{11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  CHECK(significance_mark(a, a, 0.05) == Mark::None);
  CHECK(significance_mark(a, worse, 0.05) == Mark::Worse);
  CHECK(significance_mark(worse, a, 0.05) == Mark::Better);
  CHECK(std::string(to_string(Mark::Better)) == "+");
  CHECK(std::string(to_string(Mark::Worse)) == "-");
  CHECK(std::string(to_string(Mark::None)) == "=");

  // equal medians, shifted tails: mean rank decides
  const std::vector<double> lo{0, 0, 0, 0, 0, 5, 5, 5, 5, 5, 5};
  const std::vector<double> hi{5, 5, 5, 5, 5, 5, 9, 9, 9, 9, 9};
  CHECK(median(std::vector<double>(lo)) == median(std::vector<double>(hi)));
  const auto m = significance_mark(lo, hi, 0.05);
  if (kruskal_wallis(Groups{lo, hi}).p < 0.05) CHECK(m == Mark::Worse);
}

TEST_CASE("marks agree with Mann-Whitney and flip when swapped") {
  Rng rng(33);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  int marked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto a = random_sample(rng, 15, 6, 0.0);
    const auto b = random_sample(rng, 15, 6, std::round(shift(rng)));
    const auto mw = mann_whitney(a, b);
    const auto kw = kruskal_wallis(Groups{a, b});
    CHECK(kw.h == doctest::Approx(mw.z2).epsilon(1e-9));
    CHECK(kw.p == doctest::Approx(mw.p).epsilon(1e-9));

    Mark expect = Mark::None;
    if (mw.p < 0.05) {
      const double ma = median(a), mb = median(b);
      if (mb != ma) expect = mb < ma ? Mark::Better : Mark::Worse;
      else {
        // mean rank of b against a
        double ra = 0, rb = 0;
        for (double x : a)
          for (double y : b) {
            if (x < y) rb += 1;
            else if (x > y) ra += 1;
          }
        expect = rb < ra ? Mark::Better : (rb > ra ? Mark::Worse : Mark::None);
      }
    }
    const Mark m = significance_mark(a, b, 0.05);
    CHECK(m == expect);
    const Mark swapped = significance_mark(b, a, 0.05);
    CHECK(swapped == (m == Mark::Better ? Mark::Worse : m == Mark::Worse ? Mark::Better : Mark::None));
    marked += m != Mark::None;
  }
  CHECK(marked > 10);
}

TEST_CASE("shared ranks") {
  auto row = [](double med, double mean) {
    Summary s;
    s.median = med;
    s.mean = mean;
    s.n = 2;
    return s;
  };
  SUBCASE("ties share") {
    const std::vector<Summary> rows{row(1, 1), row(1, 1)};
    CHECK(shared_ranks(rows, 1e-8) == std::vector<double>{1.5, 1.5});
  }
  SUBCASE("mean breaks a median tie") {
    const std::vector<Summary> rows{row(1, 2), row(1, 1.5), row(0, 9)};
    CHECK(shared_ranks(rows, 1e-8) == std::vector<double>{3, 2, 1});
  }
  SUBCASE("single algorithm") {
    const std::vector<Summary> rows{row(5, 5)};
    CHECK(shared_ranks(rows, 1e-8) == std::vector<double>{1});
  }
  SUBCASE("rank sums are conserved") {
    Rng rng(3);
    std::uniform_int_distribution<int> v(0, 3), count(1, 7);
    for (int t = 0; t < 200; ++t) {
      std::vector<Summary> rows(static_cast<std::size_t>(count(rng)));
      for (auto& r : rows) r = row(v(rng), v(rng));
      if (t % 7 == 0) rows[0].median = std::nan("");
      const auto ranks = shared_ranks(rows, 1e-8);
      const double a = static_cast<double>(rows.size());
      CHECK(std::accumulate(ranks.begin(), ranks.end(), 0.0) == a * (a + 1) / 2);
    }
  }
}
