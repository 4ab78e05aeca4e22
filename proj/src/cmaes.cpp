#include "histarch/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace histarch {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::BudgetExhausted: return "BudgetExhausted";
    case StopReason::CovCondition: return "CovCondition";
    case StopReason::Stagnation: return "Stagnation";
    case StopReason::TolFun: return "TolFun";
    case StopReason::TolX: return "TolX";
    case StopReason::NumericalError: return "NumericalError";
  }
  return "Unknown";
}

int default_lambda(int dim) {
  if (dim < 1) throw Error(ErrorKind::Parameter, "dimension must be >= 1");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

int stagnation_window(int dim, int lambda) {
  if (dim < 1 || lambda < 1) throw Error(ErrorKind::Parameter, "dimension and lambda must be >= 1");
  return 10 + (30 * dim + lambda - 1) / lambda;
}

double CmaState::history_back(std::size_t i) const {
  const std::size_t n = best_history.size();
  return best_history[(history_head + n - 1 - i) % n];
}

CmaState cma_init(std::span<const double> mean0, double sigma0, int lambda, const Region& domain) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw Error(ErrorKind::Parameter, "sigma0 must be positive");
  if (lambda < 2) throw Error(ErrorKind::Parameter, "lambda must be >= 2");
  if (mean0.size() != domain.dim()) throw Error(ErrorKind::Input, "mean0 has wrong dimension");
  require_finite(mean0, "initial mean");
  if (!domain.contains(mean0)) throw Error(ErrorKind::Domain, "initial mean lies outside the domain");

  const auto n = static_cast<Eigen::Index>(mean0.size());
  const double d = static_cast<double>(n);

  CmaState s;
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean0.data(), n);
  s.sigma = sigma0;
  s.sigma0 = sigma0;
  s.cov = Eigen::MatrixXd::Identity(n, n);
  s.path_sigma = Eigen::VectorXd::Zero(n);
  s.path_c = Eigen::VectorXd::Zero(n);
  s.lambda = lambda;
  s.mu = lambda / 2;

  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i) s.weights[i] = std::log(s.mu + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  const double me = s.mu_eff;
  s.c_sigma = (me + 2.0) / (d + me + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (d + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + me / d) / (d + 4.0 + 2.0 * me / d);
  s.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + me);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (me - 2.0 + 1.0 / me) / ((d + 2.0) * (d + 2.0) + me));
  s.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

  s.eig_basis = Eigen::MatrixXd::Identity(n, n);
  s.eig_scale = Eigen::VectorXd::Ones(n);
  s.eig_period = std::max(1, static_cast<int>(std::floor(1.0 / (10.0 * d * (s.c_1 + s.c_mu)))));

  s.best_history.assign(static_cast<std::size_t>(stagnation_window(static_cast<int>(n), lambda)), 0.0);
  s.best_ever = std::numeric_limits<double>::infinity();
  return s;
}

void refresh_eigensystem(CmaState& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.cov);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite())
    throw Error(ErrorKind::Numeric, "eigendecomposition of the covariance failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorKind::Numeric, "covariance lost positive definiteness");
  s.eig_basis = es.eigenvectors();
  s.eig_scale = es.eigenvalues().cwiseSqrt();
  s.eig_age = 0;
}

void set_covariance(CmaState& s, const Eigen::MatrixXd& cov) {
  if (cov.rows() != s.mean.size() || cov.cols() != s.mean.size())
    throw Error(ErrorKind::Input, "covariance has wrong shape");
  s.cov = 0.5 * (cov + cov.transpose());
  refresh_eigensystem(s);
}

double condition_number(const CmaState& s) {
  const double lo = s.eig_scale.minCoeff();
  const double hi = s.eig_scale.maxCoeff();
  return (hi * hi) / (lo * lo);
}

std::vector<Eigen::VectorXd> cma_sample(const CmaState& s, Rng& rng, const Region& domain, int max_resample) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = s.mean.size();
  const Eigen::MatrixXd transform = s.eig_basis * s.eig_scale.asDiagonal();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(s.lambda));
  Eigen::VectorXd z(n);
  for (int i = 0; i < s.lambda; ++i) {
    Eigen::VectorXd x;
    bool inside = false;
    for (int attempt = 0; attempt <= max_resample && !inside; ++attempt) {
      for (Eigen::Index j = 0; j < n; ++j) z[j] = normal(rng);
      x = s.mean + s.sigma * (transform * z);
      if (!x.allFinite()) throw Error(ErrorKind::Numeric, "non-finite CMA-ES sample");
      inside = domain.contains({x.data(), static_cast<std::size_t>(n)});
    }
    if (!inside) {
      for (Eigen::Index j = 0; j < n; ++j)
        x[j] = std::clamp(x[j], domain.lower(static_cast<std::size_t>(j)), domain.upper(static_cast<std::size_t>(j)));
    }
    out.push_back(std::move(x));
  }
  return out;
}

void cma_update(CmaState& s, std::span<const CmaCandidate> ranked) {
  if (ranked.size() != static_cast<std::size_t>(s.lambda))
    throw Error(ErrorKind::Input, "cma_update needs exactly lambda candidates");
  for (const auto& c : ranked)
    if (!std::isfinite(c.fitness)) throw Error(ErrorKind::Input, "candidate fitness is not finite");

  const Eigen::Index n = s.mean.size();
  const double d = static_cast<double>(n);

  Eigen::MatrixXd steps(n, s.mu);
  for (int i = 0; i < s.mu; ++i) steps.col(i) = (ranked[static_cast<std::size_t>(i)].x - s.mean) / s.sigma;
  const Eigen::VectorXd step_w = steps * s.weights;

  s.mean += s.sigma * step_w;

  const Eigen::MatrixXd inv_sqrt =
      s.eig_basis * s.eig_scale.cwiseInverse().asDiagonal() * s.eig_basis.transpose();
  s.path_sigma = (1.0 - s.c_sigma) * s.path_sigma +
                 std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * (inv_sqrt * step_w);

  const double ps_norm = s.path_sigma.norm();
  const double damp = std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * (s.generation + 1)));
  const bool h_sigma = ps_norm / damp < (1.4 + 2.0 / (d + 1.0)) * s.chi_n;

  s.path_c = (1.0 - s.c_c) * s.path_c;
  if (h_sigma) s.path_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * step_w;

  const double stall = h_sigma ? 0.0 : s.c_1 * s.c_c * (2.0 - s.c_c);
  const Eigen::MatrixXd rank_mu = steps * s.weights.asDiagonal() * steps.transpose();
  s.cov = (1.0 - s.c_1 - s.c_mu + stall) * s.cov + s.c_1 * (s.path_c * s.path_c.transpose()) + s.c_mu * rank_mu;
  s.cov = 0.5 * (s.cov + s.cov.transpose());

  s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  if (!std::isfinite(s.sigma) || !(s.sigma > 0.0) || !s.cov.allFinite())
    throw Error(ErrorKind::Numeric, "CMA-ES state diverged");

  ++s.generation;

  const double gen_best = ranked.front().fitness;
  s.best_history[s.history_head] = gen_best;
  s.history_head = (s.history_head + 1) % s.best_history.size();
  s.history_size = std::min(s.history_size + 1, s.best_history.size());
  s.last_generation_range = ranked.back().fitness - ranked.front().fitness;
  s.best_ever = std::min(s.best_ever, gen_best);

  if (++s.eig_age >= s.eig_period) refresh_eigensystem(s);
}

namespace {

double history_range(const CmaState& s, std::size_t count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = s.history_back(i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

constexpr std::size_t kTolFunRecent = 10;

}  // namespace

std::optional<StopReason> cma_check_stop(const CmaState& s, std::uint64_t evals_used, std::uint64_t budget,
                                         const CmaOptions& opts) {
  if (evals_used >= budget) return StopReason::BudgetExhausted;
  if (condition_number(s) > opts.max_condition) return StopReason::CovCondition;

  const bool window_full = s.history_size == s.window();
  if (opts.use_stagnation && window_full && history_range(s, s.window()) <= opts.tol_fun_hist)
    return StopReason::Stagnation;

  // Shorter look-back than Stagnation, plus the spread of the current generation.
  if (opts.use_tol_fun && window_full && s.last_generation_range <= opts.tol_fun &&
      history_range(s, std::min(kTolFunRecent, s.window())) <= opts.tol_fun)
    return StopReason::TolFun;

  if (opts.use_tol_x) {
    const double tol = opts.tol_x_factor * s.sigma0;
    const double spread = s.sigma * s.cov.diagonal().cwiseSqrt().maxCoeff();
    const double path = s.sigma * s.path_c.cwiseAbs().maxCoeff();
    if (spread < tol && path < tol) return StopReason::TolX;
  }
  return std::nullopt;
}

StopReason run_cma(CmaState& state, BudgetedEvaluator& ev, Rng& rng, const CmaOptions& opts) {
  const Region& domain = ev.problem().domain;
  std::vector<CmaCandidate> ranked(static_cast<std::size_t>(state.lambda));
  try {
    for (;;) {
      if (auto stop = cma_check_stop(state, ev.used(), ev.budget(), opts)) return *stop;
      auto xs = cma_sample(state, rng, domain, opts.max_resample);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        ranked[i].fitness = ev.evaluate({xs[i].data(), static_cast<std::size_t>(xs[i].size())});
        ranked[i].x = std::move(xs[i]);
      }
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const CmaCandidate& a, const CmaCandidate& b) { return a.fitness < b.fitness; });
      cma_update(state, ranked);
    }
  } catch (const BudgetExhausted&) {
    return StopReason::BudgetExhausted;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Numeric) return StopReason::NumericalError;
    throw;
  }
}

}  // namespace histarch
