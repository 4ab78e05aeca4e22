#include "histarch/types.hpp"

#include <algorithm>
#include <cmath>

namespace histarch {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Domain: return "domain violation";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Structure: return "structural error";
    case ErrorKind::Numeric: return "numerical error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::BudgetExhausted: return "budget exhausted";
    case ErrorKind::SearchSpaceExhausted: return "search space exhausted";
  }
  return "unknown error";
}

Region::Region(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty())
    throw Error(ErrorKind::Parameter, "region bounds must be non-empty and of equal length");
  for (std::size_t d = 0; d < lower_.size(); ++d) {
    if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]) || !(lower_[d] < upper_[d]))
      throw Error(ErrorKind::Parameter,
                  "region needs finite lower < upper in dimension " + std::to_string(d));
  }
}

Region Region::cube(std::size_t dim, double lo, double hi) {
  return Region(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

double Region::max_side() const {
  double m = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) m = std::max(m, side(d));
  return m;
}

bool Region::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d)
    if (!(x[d] >= lower_[d] && x[d] <= upper_[d])) return false;
  return true;
}

double Region::log_volume() const {
  double s = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) s += std::log(side(d));
  return s;
}

std::vector<double> Region::sample_uniform(Rng& rng) const {
  std::vector<double> x(dim());
  for (std::size_t d = 0; d < dim(); ++d) {
    std::uniform_real_distribution<double> u(lower_[d], upper_[d]);
    x[d] = u(rng);
  }
  return x;
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorKind::Input, std::string(what) + " has a non-finite coordinate");
}

}  // namespace histarch
