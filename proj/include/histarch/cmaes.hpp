#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "histarch/benchmarks.hpp"
#include "histarch/types.hpp"

namespace histarch {

enum class StopReason { BudgetExhausted, CovCondition, Stagnation, TolFun, TolX, NumericalError };

const char* to_string(StopReason r);

struct CmaOptions {
  double max_condition = 1e14;
  double tol_fun_hist = 1e-12;  // stagnation: range of per-generation bests over the window
  double tol_fun = 1e-12;
  double tol_x_factor = 1e-12;  // TolX threshold is tol_x_factor * sigma0
  bool use_stagnation = true;
  bool use_tol_fun = true;
  bool use_tol_x = true;
  int max_resample = 100;
};

/// 4 + floor(3 ln D).
int default_lambda(int dim);
/// 10 + ceil(30 D / lambda), in generations.
int stagnation_window(int dim, int lambda);

struct CmaCandidate {
  Eigen::VectorXd x;
  double fitness = 0.0;
};

/// Complete state of one CMA-ES instance.
struct CmaState {
  Eigen::VectorXd mean;
  double sigma = 1.0;
  double sigma0 = 1.0;
  Eigen::MatrixXd cov;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  int generation = 0;

  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;

  // cov = basis * diag(scale^2) * basis^T, refreshed every eig_period generations
  Eigen::MatrixXd eig_basis;
  Eigen::VectorXd eig_scale;
  int eig_age = 0;
  int eig_period = 1;

  // ring buffer of the best fitness of each generation
  std::vector<double> best_history;
  std::size_t history_head = 0;
  std::size_t history_size = 0;
  double last_generation_range = 0.0;
  double best_ever = 0.0;

  int dim() const { return static_cast<int>(mean.size()); }
  std::size_t window() const { return best_history.size(); }
  /// i = 0 is the most recent generation.
  double history_back(std::size_t i) const;
};

CmaState cma_init(std::span<const double> mean0, double sigma0, int lambda, const Region& domain);

/// lambda candidates m + sigma * B diag(d) z. Out-of-domain candidates are
/// redrawn up to `max_resample` times, then clamped to the box.
std::vector<Eigen::VectorXd> cma_sample(const CmaState& state, Rng& rng, const Region& domain,
                                        int max_resample = 100);

/// `ranked` must hold exactly lambda candidates sorted by fitness, best first.
void cma_update(CmaState& state, std::span<const CmaCandidate> ranked);

std::optional<StopReason> cma_check_stop(const CmaState& state, std::uint64_t evals_used,
                                         std::uint64_t budget, const CmaOptions& opts = {});

double condition_number(const CmaState& state);
/// Replaces C and refreshes the eigen cache (tests, warm starts).
void set_covariance(CmaState& state, const Eigen::MatrixXd& cov);
void refresh_eigensystem(CmaState& state);

/// Runs sample/evaluate/update until a stop criterion fires. Numerical
/// failures end the run with StopReason::NumericalError.
StopReason run_cma(CmaState& state, BudgetedEvaluator& ev, Rng& rng, const CmaOptions& opts = {});

}  // namespace histarch
