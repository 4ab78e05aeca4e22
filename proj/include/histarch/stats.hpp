#pragma once

#include <span>
#include <string>
#include <vector>

namespace histarch {

struct KruskalWallis {
  double h = 0.0;
  double p = 1.0;
};

/// Average ranks (1-based) of the pooled values; ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Tie-corrected H statistic with a chi-square(groups - 1) upper-tail p-value.
/// Every observation identical gives H = 0, p = 1.
KruskalWallis kruskal_wallis(std::span<const std::vector<double>> groups);

/// P(X > x) for X ~ chi-square(dof).
double chi_square_upper_tail(double x, int dof);

struct Summary {
  double best = 0.0;
  double worst = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

enum class Mark { Better, Worse, None };

/// "+", "-" or "=", seen from the comparator's side.
const char* to_string(Mark m);

/// Two-group Kruskal-Wallis between `reference` and `other` (minimization).
/// Better when the test rejects at alpha and `other` has the lower median
/// (mean rank breaks equal medians).
Mark significance_mark(std::span<const double> reference, std::span<const double> other, double alpha);

/// Ranks per entry, lower (median, mean) is better; entries whose medians and
/// means both differ by at most `tolerance` share the averaged rank.
std::vector<double> shared_ranks(std::span<const Summary> rows, double tolerance);

}  // namespace histarch
