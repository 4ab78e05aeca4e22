#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace histarch {

using Rng = std::mt19937_64;

enum class ErrorKind {
  Parameter,
  Domain,
  Input,
  Structure,
  Numeric,
  Io,
  Config,
  BudgetExhausted,
  SearchSpaceExhausted,
};

const char* to_string(ErrorKind kind);

/// Base exception for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Terminal signals. Drivers catch these to end a run; they are not failures.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error(ErrorKind::BudgetExhausted, "evaluation budget exhausted") {}
};

class SearchSpaceExhausted : public Error {
 public:
  SearchSpaceExhausted()
      : Error(ErrorKind::SearchSpaceExhausted, "blocked regions cover the search space") {}
};

/// Axis-aligned box. Every dimension has strictly positive extent.
class Region {
 public:
  Region() = default;
  Region(std::vector<double> lower, std::vector<double> upper);

  static Region cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double lower(std::size_t d) const { return lower_[d]; }
  double upper(std::size_t d) const { return upper_[d]; }
  double side(std::size_t d) const { return upper_[d] - lower_[d]; }
  double max_side() const;

  /// Inclusive on both faces.
  bool contains(std::span<const double> x) const;
  /// Sum of log side lengths; stays finite for tiny cells in 30-D.
  double log_volume() const;

  std::vector<double> sample_uniform(Rng& rng) const;

  void clip_upper(std::size_t d, double v) { upper_[d] = v; }
  void clip_lower(std::size_t d, double v) { lower_[d] = v; }

  friend bool operator==(const Region&, const Region&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// One evaluated solution.
struct SearchPoint {
  std::vector<double> coords;
  double fitness = 0.0;
  std::uint64_t eval_index = 0;
};

void require_finite(std::span<const double> x, const char* what);

}  // namespace histarch
