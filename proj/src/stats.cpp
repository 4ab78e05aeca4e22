#include "histarch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "histarch/types.hpp"

namespace histarch {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

double chi_square_upper_tail(double x, int dof) {
  if (dof < 1) throw Error(ErrorKind::Parameter, "chi-square needs dof >= 1");
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

KruskalWallis kruskal_wallis(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::Parameter, "Kruskal-Wallis needs at least two groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::Parameter, "each group needs at least two observations");
    for (double v : g) {
      if (std::isnan(v)) throw Error(ErrorKind::Input, "NaN observation");
      pooled.push_back(v);
    }
  }
  const double n = static_cast<double>(pooled.size());
  const auto ranks = average_ranks(pooled);

  double sum_term = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    sum_term += r * r / static_cast<double>(g.size());
    offset += g.size();
  }

  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double correction = 1.0 - tie_sum / (n * n * n - n);
  if (correction <= 0.0) return {0.0, 1.0};

  double h = (12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0)) / correction;
  h = std::max(h, 0.0);
  return {h, chi_square_upper_tail(h, static_cast<int>(groups.size()) - 1)};
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.best = s.worst = s.median = s.mean = s.std = nan;
    return s;
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  s.best = v.front();
  s.worst = v.back();
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

const char* to_string(Mark m) {
  switch (m) {
    case Mark::Better: return "+";
    case Mark::Worse: return "-";
    case Mark::None: return "=";
  }
  return "?";
}

Mark significance_mark(std::span<const double> reference, std::span<const double> other, double alpha) {
  if (reference.size() < 2 || other.size() < 2) return Mark::None;
  const std::vector<std::vector<double>> groups{{reference.begin(), reference.end()}, {other.begin(), other.end()}};
  const auto kw = kruskal_wallis(groups);
  if (!(kw.p < alpha)) return Mark::None;

  const double med_ref = summarize(reference).median;
  const double med_other = summarize(other).median;
  if (med_other < med_ref) return Mark::Better;
  if (med_other > med_ref) return Mark::Worse;

  std::vector<double> pooled(groups[0]);
  pooled.insert(pooled.end(), groups[1].begin(), groups[1].end());
  const auto ranks = average_ranks(pooled);
  double r_ref = 0.0, r_other = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) r_ref += ranks[i];
  for (std::size_t i = 0; i < other.size(); ++i) r_other += ranks[reference.size() + i];
  r_ref /= static_cast<double>(reference.size());
  r_other /= static_cast<double>(other.size());
  if (r_other < r_ref) return Mark::Better;
  if (r_other > r_ref) return Mark::Worse;
  return Mark::None;
}

std::vector<double> shared_ranks(std::span<const Summary> rows, double tolerance) {
  // -1: a better, 0: tie, 1: b better. Missing statistics (NaN) rank last.
  auto compare = [tolerance](const Summary& a, const Summary& b) {
    const bool a_bad = std::isnan(a.median), b_bad = std::isnan(b.median);
    if (a_bad || b_bad) return a_bad == b_bad ? 0 : (a_bad ? 1 : -1);
    if (std::abs(a.median - b.median) > tolerance) return a.median < b.median ? -1 : 1;
    if (std::abs(a.mean - b.mean) > tolerance) return a.mean < b.mean ? -1 : 1;
    return 0;
  };
  std::vector<double> ranks(rows.size(), 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      const int c = compare(rows[j], rows[i]);
      if (c < 0) ranks[i] += 1.0;
      else if (c == 0) ranks[i] += 0.5;
    }
  return ranks;
}

}  // namespace histarch
