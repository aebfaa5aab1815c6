#include "stabilab/convex.hpp"

#include <cmath>
#include <stdexcept>

#include "stabilab/io_util.hpp"

namespace stabilab {

namespace {

constexpr double kLog1PlusE = 1.3132616875182228;  // log(1 + e)

void check_point(const ConvexProblem& problem, const Point& z) {
  if (z.kind() != problem.point_kind() || z.dim() != problem.dim())
    throw std::invalid_argument("point kind/dimension mismatch for " + problem.name());
}

double signed_margin(const Eigen::VectorXd& w, const Point& z) {
  return (2.0 * z.y() - 1.0) * w.dot(z.x());
}

}  // namespace

Eigen::VectorXd project_ball(Eigen::VectorXd w) {
  const double norm = w.norm();
  if (norm > 1.0) w *= 1.0 / norm;
  return w;
}

double ConvexProblem::empirical_objective(const Eigen::VectorXd& w,
                                          const Dataset& s) const {
  CompensatedSum acc;
  for (std::size_t i = 0; i < s.size(); ++i) acc.add(loss(w, s[i]));
  return acc.value() / static_cast<double>(s.size());
}

Eigen::VectorXd ConvexProblem::empirical_gradient(const Eigen::VectorXd& w,
                                                  const Dataset& s) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (std::size_t i = 0; i < s.size(); ++i) g += loss_grad(w, s[i]);
  return g / static_cast<double>(s.size());
}

double ConvexProblem::population_objective(const Eigen::VectorXd& w,
                                           const FiniteDistribution& dist) const {
  CompensatedSum acc;
  for (std::size_t j = 0; j < dist.support_size(); ++j)
    acc.add(dist.weight(j) * loss(w, dist.support()[j]));
  return acc.value();
}

Eigen::VectorXd ConvexProblem::population_gradient(
    const Eigen::VectorXd& w, const FiniteDistribution& dist) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (std::size_t j = 0; j < dist.support_size(); ++j)
    g += dist.weight(j) * loss_grad(w, dist.support()[j]);
  return g;
}

QuadraticFamily::QuadraticFamily(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
}

double QuadraticFamily::loss(const Eigen::VectorXd& w, const Point& z) const {
  check_point(*this, z);
  return 0.25 * (w - z.x()).squaredNorm();
}

Eigen::VectorXd QuadraticFamily::loss_grad(const Eigen::VectorXd& w,
                                           const Point& z) const {
  check_point(*this, z);
  return 0.5 * (w - z.x());
}

std::optional<Eigen::VectorXd> QuadraticFamily::regularized_minimizer(
    const Dataset& s, double lambda) const {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < s.size(); ++i) mean += s[i].x();
  mean /= static_cast<double>(s.size());
  // Unconstrained optimum; always interior since |mean| <= 1 < 1 + 2 lambda.
  return mean / (1.0 + 2.0 * lambda);
}

std::optional<Eigen::VectorXd> QuadraticFamily::population_minimizer(
    const FiniteDistribution& dist) const {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t j = 0; j < dist.support_size(); ++j)
    mean += dist.weight(j) * dist.support()[j].x();
  return mean;
}

ScaledLogisticFamily::ScaledLogisticFamily(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
}

double ScaledLogisticFamily::loss(const Eigen::VectorXd& w, const Point& z) const {
  check_point(*this, z);
  const double u = signed_margin(w, z);
  // log(1 + e^{-u}) evaluated stably on both tails.
  const double raw = u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
  return raw / kLog1PlusE;
}

Eigen::VectorXd ScaledLogisticFamily::loss_grad(const Eigen::VectorXd& w,
                                                const Point& z) const {
  check_point(*this, z);
  const double u = signed_margin(w, z);
  const double sigma_neg = 1.0 / (1.0 + std::exp(u));  // sigmoid(-u)
  return (-(2.0 * z.y() - 1.0) * sigma_neg / kLog1PlusE) * z.x();
}

std::optional<double> ScaledLogisticFamily::smoothness() const {
  return 0.25 / kLog1PlusE;
}

std::shared_ptr<const ConvexProblem> make_problem(const std::string& id,
                                                  std::size_t dim) {
  if (id == "quadratic") return std::make_shared<QuadraticFamily>(dim);
  if (id == "logistic") return std::make_shared<ScaledLogisticFamily>(dim);
  throw std::invalid_argument("unknown problem id: " + id);
}

void to_json(nlohmann::json& j, const LearnerOutput& out) {
  std::vector<double> w(out.weights.data(), out.weights.data() + out.weights.size());
  j = nlohmann::json{{"weights", w},
                     {"iterations", out.iterations},
                     {"objective", out.objective},
                     {"gamma", out.gamma}};
}

namespace {

double erm_certificate(double lambda, std::size_t n) {
  return 4.0 / (lambda * static_cast<double>(n));
}

}  // namespace

LearnerOutput regularized_erm_iterative(const ConvexProblem& problem,
                                        const Dataset& s, double lambda,
                                        double tol) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (!problem.smoothness())
    throw std::invalid_argument("iterative solver needs a smoothness constant");
  const double sigma = *problem.smoothness();
  const double step = 1.0 / (sigma + lambda);
  const auto cap = static_cast<std::size_t>(
      10.0 * std::ceil((sigma / lambda + 1.0) * std::log(2.0 / tol)) + 10.0);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.dim()));
  for (std::size_t it = 1; it <= cap; ++it) {
    const Eigen::VectorXd grad = problem.empirical_gradient(w, s) + lambda * w;
    const Eigen::VectorXd next = project_ball(w - step * grad);
    const double mapping_norm = (w - next).norm() / step;
    w = next;
    if (mapping_norm <= tol) {
      LearnerOutput out;
      out.weights = w;
      out.iterations = it;
      out.objective = problem.empirical_objective(w, s) +
                      0.5 * lambda * w.squaredNorm();
      out.gamma = erm_certificate(lambda, s.size());
      return out;
    }
  }
  throw std::runtime_error("regularized_erm did not reach tolerance " +
                           std::to_string(tol) + " within " + std::to_string(cap) +
                           " iterations");
}

LearnerOutput regularized_erm(const ConvexProblem& problem, const Dataset& s,
                              double lambda, double tol) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (auto w = problem.regularized_minimizer(s, lambda)) {
    LearnerOutput out;
    out.weights = *w;
    out.iterations = 0;
    out.objective =
        problem.empirical_objective(*w, s) + 0.5 * lambda * w->squaredNorm();
    out.gamma = erm_certificate(lambda, s.size());
    return out;
  }
  return regularized_erm_iterative(problem, s, lambda, tol);
}

LearnerOutput pgd(const ConvexProblem& problem, const Dataset& s,
                  std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("pgd step count must be positive");
  const double root_t = std::sqrt(static_cast<double>(steps));
  if (!problem.smoothness())
    throw std::invalid_argument("pgd needs a smoothness constant");
  if (*problem.smoothness() > 2.0 * root_t)
    throw std::invalid_argument("pgd requires smoothness <= 2 sqrt(T)");

  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.dim()));
  for (std::size_t t = 0; t < steps; ++t)
    w = project_ball(w - problem.empirical_gradient(w, s) / root_t);

  LearnerOutput out;
  out.weights = w;
  out.iterations = steps;
  out.objective = problem.empirical_objective(w, s);
  out.gamma = root_t / static_cast<double>(s.size());
  return out;
}

StableStatistic make_erm_statistic(std::shared_ptr<const ConvexProblem> problem,
                                   double lambda) {
  if (!problem) throw std::invalid_argument("null problem");
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  auto eval = [problem, lambda](const Dataset& s, const Point& z) {
    const double tol = erm_certificate(lambda, s.size()) / 100.0;
    return problem->loss(regularized_erm(*problem, s, lambda, tol).weights, z);
  };
  auto gamma = [lambda](std::size_t n) { return erm_certificate(lambda, n); };
  return StableStatistic(
      "erm(" + problem->name() + ",lambda=" + format_double(lambda) + ")",
      std::move(eval), std::move(gamma));
}

StableStatistic make_pgd_statistic(std::shared_ptr<const ConvexProblem> problem,
                                   std::size_t steps) {
  if (!problem) throw std::invalid_argument("null problem");
  if (steps == 0) throw std::invalid_argument("pgd step count must be positive");
  if (problem->smoothness() &&
      *problem->smoothness() > 2.0 * std::sqrt(static_cast<double>(steps)))
    throw std::invalid_argument("pgd requires smoothness <= 2 sqrt(T)");
  const double root_t = std::sqrt(static_cast<double>(steps));
  auto eval = [problem, steps](const Dataset& s, const Point& z) {
    return problem->loss(pgd(*problem, s, steps).weights, z);
  };
  auto gamma = [root_t](std::size_t n) { return root_t / static_cast<double>(n); };
  return StableStatistic(
      "pgd(" + problem->name() + ",T=" + std::to_string(steps) + ")",
      std::move(eval), std::move(gamma));
}

double hyperparam_schedule(const std::string& kind, std::size_t n, double delta,
                           double c) {
  if (n < 1) throw std::invalid_argument("schedule requires n >= 1");
  const auto nd = static_cast<double>(n);
  if (kind == "expected_risk_T") return std::ceil(nd / std::sqrt(2.0));
  if (kind == "ssss_lambda") {
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("schedule requires delta in (0,1)");
    return 4.0 / std::sqrt(delta * nd);
  }
  if (kind == "secondmoment_lambda") {
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("schedule requires delta in (0,1)");
    if (c <= 0.0) throw std::invalid_argument("schedule requires c > 0");
    return c / std::sqrt(std::sqrt(delta) * nd);
  }
  if (kind == "highprob_lambda") {
    if (c <= 0.0) throw std::invalid_argument("schedule requires c > 0");
    return c / std::pow(nd, 2.0 / 3.0);
  }
  throw std::invalid_argument("unknown schedule kind: " + kind);
}

Eigen::VectorXd population_minimizer_reference(const ConvexProblem& problem,
                                               const FiniteDistribution& dist,
                                               double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (auto w = problem.population_minimizer(dist)) return project_ball(*w);
  if (!problem.smoothness())
    throw std::invalid_argument("reference solver needs a smoothness constant");

  // FISTA over the ball. A gradient-mapping norm of g at the extrapolated
  // point y certifies an objective gap of at most g * |y - w*| <= 4g, since
  // |y| <= 3 after momentum.
  const double sigma = *problem.smoothness();
  const double step = 1.0 / sigma;
  const double mapping_tol = tol / 4.0;
  const auto dim = static_cast<Eigen::Index>(problem.dim());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd y = x;
  Eigen::VectorXd best = x;
  double best_value = problem.population_objective(x, dist);
  double momentum = 1.0;
  const std::size_t cap = 1000000;
  for (std::size_t it = 0; it < cap; ++it) {
    const Eigen::VectorXd grad = problem.population_gradient(y, dist);
    const Eigen::VectorXd next = project_ball(y - step * grad);
    const double mapping_norm = (y - next).norm() / step;
    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / next_momentum) * (next - x);
    x = next;
    momentum = next_momentum;
    const double value = problem.population_objective(x, dist);
    if (value < best_value) {
      best_value = value;
      best = x;
    }
    if (mapping_norm <= mapping_tol) return best;
  }
  throw std::runtime_error("population reference solve did not converge");
}

double excess_risk(const ConvexProblem& problem, const FiniteDistribution& dist,
                   const Eigen::VectorXd& w) {
  const Eigen::VectorXd minimizer =
      population_minimizer_reference(problem, dist, 1e-10);
  return problem.population_objective(w, dist) -
         problem.population_objective(minimizer, dist);
}

}  // namespace stabilab
