#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "histarch/types.hpp"
#include "json.hpp"

namespace histarch {

enum class Category { Unimodal, Multimodal, Hybrid, Composition };

const char* to_string(Category c);

using Objective = std::function<double(std::span<const double>)>;

/// Immutable test problem over a box domain. Copies share the captured data.
struct Problem {
  std::string name;
  std::size_t dim = 0;
  Region domain;
  Objective f;
  std::optional<double> f_opt;
  std::optional<std::vector<double>> x_opt;
  Category category = Category::Unimodal;

  double operator()(std::span<const double> x) const { return f(x); }
};

namespace fn {

double sphere(std::span<const double> x);
/// sum_i ratio^(2i/(D-1)) x_i^2; `axis_ratio` is the ratio of the longest to
/// the shortest principal axis of the level sets.
double ellipsoid(std::span<const double> x, double axis_ratio);
double rosenbrock(std::span<const double> x);
double rastrigin(std::span<const double> x);
double ackley(std::span<const double> x);
double griewank(std::span<const double> x);
double schwefel(std::span<const double> x);
/// Shifted variant with the optimum moved to z = 0 and the quadratic penalty
/// outside [-500, 500], as used inside hybrid functions.
double schwefel_modified(std::span<const double> z);

inline constexpr double kSchwefelOptimum = 420.9687462275036;

}  // namespace fn

/// Orthonormal matrix from the QR factorization of a Gaussian matrix.
Eigen::MatrixXd random_rotation(std::size_t dim, Rng& rng);

Problem make_sphere(std::size_t dim);
Problem make_ellipsoid(std::size_t dim, double axis_ratio, bool rotated, std::uint64_t seed);
Problem make_rastrigin(std::size_t dim);
Problem make_shifted_rotated_rastrigin(std::size_t dim, std::uint64_t seed);

/// Desk-scale suite: sphere, ellipsoid, rosenbrock, rastrigin, sr_rastrigin,
/// ackley, griewank, schwefel, hybrid, composition. D must be 2, 10 or 30.
std::vector<Problem> make_suite(std::size_t dim, std::uint64_t seed);

nlohmann::json suite_manifest(const std::vector<Problem>& suite);

/// Counts objective calls against a fixed budget. Single owner.
class BudgetedEvaluator {
 public:
  using Observer = std::function<void(std::span<const double> x, double fitness, std::uint64_t eval_index)>;

  BudgetedEvaluator(Problem problem, std::uint64_t budget);

  /// Throws BudgetExhausted when the budget is spent, Error(Domain) for
  /// points outside the problem domain.
  double evaluate(std::span<const double> x);

  std::uint64_t used() const { return used_; }
  std::uint64_t budget() const { return budget_; }
  std::uint64_t remaining() const { return budget_ - used_; }
  bool exhausted() const { return used_ >= budget_; }
  const Problem& problem() const { return problem_; }

  void set_observer(Observer obs) { observer_ = std::move(obs); }

 private:
  Problem problem_;
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
  Observer observer_;
};

}  // namespace histarch
