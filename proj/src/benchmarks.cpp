#include "histarch/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

namespace histarch {

const char* to_string(Category c) {
  switch (c) {
    case Category::Unimodal: return "unimodal";
    case Category::Multimodal: return "multimodal";
    case Category::Hybrid: return "hybrid";
    case Category::Composition: return "composition";
  }
  return "unknown";
}

namespace fn {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double ellipsoid(std::span<const double> x, double axis_ratio) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = n > 1 ? 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    s += std::pow(axis_ratio, e) * x[i] * x[i];
  }
  return s;
}

double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = x[i] - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return s;
}

double ackley(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double sq = 0.0, cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(2.0 * std::numbers::pi * v);
  }
  return 20.0 + std::numbers::e - 20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n);
}

double griewank(std::span<const double> x) {
  double s = 0.0, p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += x[i] * x[i] / 4000.0;
    p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return 1.0 + s - p;
}

namespace {
constexpr double kSchwefelPerDim = 418.9828872724338;
}

double schwefel(std::span<const double> x) {
  double s = kSchwefelPerDim * static_cast<double>(x.size());
  for (double v : x) s -= v * std::sin(std::sqrt(std::abs(v)));
  return s;
}

double schwefel_modified(std::span<const double> z) {
  const double n = static_cast<double>(z.size());
  double s = kSchwefelPerDim * n;
  for (double zi : z) {
    const double v = zi + kSchwefelOptimum;
    double g;
    if (v > 500.0) {
      const double m = 500.0 - std::fmod(v, 500.0);
      g = m * std::sin(std::sqrt(std::abs(m))) - (v - 500.0) * (v - 500.0) / (10000.0 * n);
    } else if (v < -500.0) {
      const double m = std::fmod(std::abs(v), 500.0) - 500.0;
      g = m * std::sin(std::sqrt(std::abs(m))) - (v + 500.0) * (v + 500.0) / (10000.0 * n);
    } else {
      g = v * std::sin(std::sqrt(std::abs(v)));
    }
    s -= g;
  }
  return s;
}

}  // namespace fn

Eigen::MatrixXd random_rotation(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
}

namespace {

Rng problem_rng(std::uint64_t seed, std::uint64_t problem_tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(problem_tag)};
  return Rng(seq);
}

// Optima stay in the central 80% of [-100, 100].
std::vector<double> random_shift(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> u(-80.0, 80.0);
  std::vector<double> o(dim);
  for (double& v : o) v = u(rng);
  return o;
}

// z = R (x - o)
struct Transform {
  std::vector<double> shift;
  Eigen::MatrixXd rotation;

  std::vector<double> apply(std::span<const double> x) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) y[static_cast<Eigen::Index>(i)] = x[i] - shift[i];
    if (rotation.size() > 0) y = rotation * y;
    return {y.data(), y.data() + y.size()};
  }
};

Problem base(std::string name, std::size_t dim, double half_width, Category cat) {
  Problem p;
  p.name = std::move(name);
  p.dim = dim;
  p.domain = Region::cube(dim, -half_width, half_width);
  p.category = cat;
  return p;
}

Problem make_rosenbrock(std::size_t dim) {
  Problem p = base("rosenbrock", dim, 100.0, Category::Multimodal);
  p.f = [](std::span<const double> x) { return fn::rosenbrock(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, 1.0);
  return p;
}

Problem make_ackley(std::size_t dim) {
  Problem p = base("ackley", dim, 100.0, Category::Multimodal);
  p.f = [](std::span<const double> x) { return fn::ackley(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, 0.0);
  return p;
}

Problem make_griewank(std::size_t dim) {
  Problem p = base("griewank", dim, 100.0, Category::Multimodal);
  p.f = [](std::span<const double> x) { return fn::griewank(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, 0.0);
  return p;
}

Problem make_schwefel(std::size_t dim) {
  Problem p = base("schwefel", dim, 500.0, Category::Multimodal);
  p.f = [](std::span<const double> x) { return fn::schwefel(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, fn::kSchwefelOptimum);
  return p;
}

Problem make_hybrid(std::size_t dim, std::uint64_t seed) {
  Rng rng = problem_rng(seed, 8);
  auto shift = random_shift(dim, rng);
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto n1 = static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(dim)));
  const auto n2 = std::min(dim - n1, n1);

  struct Data {
    std::vector<double> shift;
    std::vector<std::size_t> perm;
    std::size_t n1, n2;
  };
  auto data = std::make_shared<const Data>(Data{shift, perm, n1, n2});

  Problem p = base("hybrid", dim, 100.0, Category::Hybrid);
  p.f = [data](std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[data->perm[i]] - data->shift[data->perm[i]];
    const std::span<const double> all(y);
    return fn::rastrigin(all.subspan(0, data->n1)) +
           fn::ellipsoid(all.subspan(data->n1, data->n2), 1e3) +
           fn::schwefel_modified(all.subspan(data->n1 + data->n2));
  };
  p.f_opt = 0.0;
  p.x_opt = shift;
  return p;
}

Problem make_composition(std::size_t dim, std::uint64_t seed) {
  Rng rng = problem_rng(seed, 9);
  auto data = std::make_shared<std::vector<Transform>>();
  for (int i = 0; i < 3; ++i) {
    Transform t;
    t.shift = random_shift(dim, rng);
    t.rotation = random_rotation(dim, rng);
    data->push_back(std::move(t));
  }
  const std::vector<double> opt = (*data)[0].shift;
  std::shared_ptr<const std::vector<Transform>> parts = std::move(data);

  Problem p = base("composition", dim, 100.0, Category::Composition);
  p.f = [parts](std::span<const double> x) {
    const double a = fn::rastrigin((*parts)[0].apply(x));
    const double b = 1e-6 * fn::ellipsoid((*parts)[1].apply(x), 1e3) + 100.0;
    const double c = 10.0 * fn::griewank((*parts)[2].apply(x)) + 200.0;
    return std::min({a, b, c});
  };
  p.f_opt = 0.0;
  p.x_opt = opt;
  return p;
}

}  // namespace

Problem make_sphere(std::size_t dim) {
  Problem p = base("sphere", dim, 100.0, Category::Unimodal);
  p.f = [](std::span<const double> x) { return fn::sphere(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, 0.0);
  return p;
}

Problem make_ellipsoid(std::size_t dim, double axis_ratio, bool rotated, std::uint64_t seed) {
  auto t = std::make_shared<Transform>();
  if (rotated) {
    Rng rng = problem_rng(seed, 2);
    t->shift = random_shift(dim, rng);
    t->rotation = random_rotation(dim, rng);
  } else {
    t->shift.assign(dim, 0.0);
  }
  std::shared_ptr<const Transform> tc = t;
  Problem p = base("ellipsoid", dim, 100.0, Category::Unimodal);
  p.f = [tc, axis_ratio](std::span<const double> x) { return fn::ellipsoid(tc->apply(x), axis_ratio); };
  p.f_opt = 0.0;
  p.x_opt = tc->shift;
  return p;
}

Problem make_rastrigin(std::size_t dim) {
  Problem p = base("rastrigin", dim, 100.0, Category::Multimodal);
  p.f = [](std::span<const double> x) { return fn::rastrigin(x); };
  p.f_opt = 0.0;
  p.x_opt = std::vector<double>(dim, 0.0);
  return p;
}

Problem make_shifted_rotated_rastrigin(std::size_t dim, std::uint64_t seed) {
  Rng rng = problem_rng(seed, 5);
  auto t = std::make_shared<Transform>();
  t->shift = random_shift(dim, rng);
  t->rotation = random_rotation(dim, rng);
  std::shared_ptr<const Transform> tc = t;
  Problem p = base("sr_rastrigin", dim, 100.0, Category::Multimodal);
  p.f = [tc](std::span<const double> x) { return fn::rastrigin(tc->apply(x)); };
  p.f_opt = 0.0;
  p.x_opt = tc->shift;
  return p;
}

std::vector<Problem> make_suite(std::size_t dim, std::uint64_t seed) {
  if (dim != 2 && dim != 10 && dim != 30)
    throw Error(ErrorKind::Parameter, "suite dimension must be 2, 10 or 30, got " + std::to_string(dim));
  std::vector<Problem> suite;
  suite.push_back(make_sphere(dim));
  suite.push_back(make_ellipsoid(dim, 1e6, true, seed));
  suite.push_back(make_rosenbrock(dim));
  suite.push_back(make_rastrigin(dim));
  suite.push_back(make_shifted_rotated_rastrigin(dim, seed));
  suite.push_back(make_ackley(dim));
  suite.push_back(make_griewank(dim));
  suite.push_back(make_schwefel(dim));
  suite.push_back(make_hybrid(dim, seed));
  suite.push_back(make_composition(dim, seed));
  return suite;
}

nlohmann::json suite_manifest(const std::vector<Problem>& suite) {
  nlohmann::json out = nlohmann::json::array();
  for (const Problem& p : suite) {
    nlohmann::json e;
    e["name"] = p.name;
    e["dim"] = p.dim;
    e["domain"] = {{"lower", p.domain.lower()}, {"upper", p.domain.upper()}};
    e["f_opt"] = p.f_opt ? nlohmann::json(*p.f_opt) : nlohmann::json(nullptr);
    e["category"] = to_string(p.category);
    out.push_back(std::move(e));
  }
  return out;
}

BudgetedEvaluator::BudgetedEvaluator(Problem problem, std::uint64_t budget)
    : problem_(std::move(problem)), budget_(budget) {}

double BudgetedEvaluator::evaluate(std::span<const double> x) {
  if (used_ >= budget_) throw BudgetExhausted();
  if (x.size() != problem_.dim) throw Error(ErrorKind::Input, "evaluated point has wrong dimension");
  if (!problem_.domain.contains(x))
    throw Error(ErrorKind::Domain, "evaluated point lies outside the domain of " + problem_.name);
  ++used_;
  const double f = problem_(x);
  if (observer_) observer_(x, f, used_);
  return f;
}

}  // namespace histarch
