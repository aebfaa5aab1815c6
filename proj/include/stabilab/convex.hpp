#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "stabilab/statistic.hpp"

namespace stabilab {

// Euclidean projection onto the unit ball.
Eigen::VectorXd project_ball(Eigen::VectorXd w);

// A family of convex losses over the unit ball, one loss per domain point.
// Constants are promised on the ball and spot-checked by tests.
class ConvexProblem {
 public:
  virtual ~ConvexProblem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual PointKind point_kind() const = 0;
  virtual double loss(const Eigen::VectorXd& w, const Point& z) const = 0;
  virtual Eigen::VectorXd loss_grad(const Eigen::VectorXd& w, const Point& z) const = 0;
  virtual double lipschitz() const = 0;
  virtual std::optional<double> smoothness() const = 0;
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }

  // Closed-form minimizer of F_s(w) + (lambda/2)|w|^2 over the ball, when the
  // family admits one.
  virtual std::optional<Eigen::VectorXd> regularized_minimizer(
      const Dataset& s, double lambda) const {
    (void)s;
    (void)lambda;
    return std::nullopt;
  }
  // Closed-form minimizer of F_P over the ball, when the family admits one.
  virtual std::optional<Eigen::VectorXd> population_minimizer(
      const FiniteDistribution& dist) const {
    (void)dist;
    return std::nullopt;
  }

  double empirical_objective(const Eigen::VectorXd& w, const Dataset& s) const;
  Eigen::VectorXd empirical_gradient(const Eigen::VectorXd& w, const Dataset& s) const;
  double population_objective(const Eigen::VectorXd& w,
                              const FiniteDistribution& dist) const;
  Eigen::VectorXd population_gradient(const Eigen::VectorXd& w,
                                      const FiniteDistribution& dist) const;
};

// loss(w, z) = |w - z|^2 / 4 over vector points in the unit ball.
// 1-Lipschitz, 1/2-smooth, range [0,1]; regularized empirical minimizer is
// mean(s)/(1 + 2 lambda).
class QuadraticFamily : public ConvexProblem {
 public:
  explicit QuadraticFamily(std::size_t dim);

  std::string name() const override { return "quadratic"; }
  std::size_t dim() const override { return dim_; }
  PointKind point_kind() const override { return PointKind::vector; }
  double loss(const Eigen::VectorXd& w, const Point& z) const override;
  Eigen::VectorXd loss_grad(const Eigen::VectorXd& w, const Point& z) const override;
  double lipschitz() const override { return 1.0; }
  std::optional<double> smoothness() const override { return 0.5; }
  std::optional<Eigen::VectorXd> regularized_minimizer(const Dataset& s,
                                                       double lambda) const override;
  std::optional<Eigen::VectorXd> population_minimizer(
      const FiniteDistribution& dist) const override;

 private:
  std::size_t dim_;
};

// loss(w, (x,y)) = log(1 + exp(-(2y-1)<w,x>)) / log(1+e) over labeled points.
// Range [0,1] on the ball, Lipschitz < 1, smoothness <= 1/(4 log(1+e)).
class ScaledLogisticFamily : public ConvexProblem {
 public:
  explicit ScaledLogisticFamily(std::size_t dim);

  std::string name() const override { return "logistic"; }
  std::size_t dim() const override { return dim_; }
  PointKind point_kind() const override { return PointKind::labeled; }
  double loss(const Eigen::VectorXd& w, const Point& z) const override;
  Eigen::VectorXd loss_grad(const Eigen::VectorXd& w, const Point& z) const override;
  double lipschitz() const override { return 1.0; }
  std::optional<double> smoothness() const override;

 private:
  std::size_t dim_;
};

// Preset lookup by id ("quadratic", "logistic").
std::shared_ptr<const ConvexProblem> make_problem(const std::string& id,
                                                  std::size_t dim);

struct LearnerOutput {
  Eigen::VectorXd weights;
  std::size_t iterations = 0;
  double objective = 0.0;  // final value of the objective the learner ran on
  double gamma = 0.0;      // uniform-stability certificate
};

void to_json(nlohmann::json& j, const LearnerOutput& out);

// argmin over the ball of F_s(w) + (lambda/2)|w|^2. Uses the family's closed
// form when available, otherwise the projected-gradient solver below. The
// certificate is 4/(lambda n) with respect to the unregularized loss.
LearnerOutput regularized_erm(const ConvexProblem& problem, const Dataset& s,
                              double lambda, double tol);

// The iterative route, kept public so tests can cross-check it against the
// closed form: projected gradient on the regularized objective, step
// 1/(smoothness + lambda), until the gradient-mapping norm is <= tol.
LearnerOutput regularized_erm_iterative(const ConvexProblem& problem,
                                        const Dataset& s, double lambda,
                                        double tol);

// Projected gradient descent on F_s from the origin: T steps of
// w <- proj(w - (1/sqrt(T)) grad F_s(w)), returning the final iterate.
// Requires smoothness <= 2 sqrt(T); certificate sqrt(T)/n.
LearnerOutput pgd(const ConvexProblem& problem, const Dataset& s, std::size_t steps);

// M(s, z) = loss(erm weights, z); certificate 4/(lambda n) at eval time.
// Solver tolerance is certificate/100 so audits absorb solver error.
StableStatistic make_erm_statistic(std::shared_ptr<const ConvexProblem> problem,
                                   double lambda);

// M(s, z) = loss(pgd weights, z); certificate sqrt(T)/n at eval time.
StableStatistic make_pgd_statistic(std::shared_ptr<const ConvexProblem> problem,
                                   std::size_t steps);

// Hyperparameter schedules:
//   ssss_lambda        = 4/sqrt(delta n)
//   secondmoment_lambda = c/sqrt(sqrt(delta) n)
//   highprob_lambda    = c/n^{2/3}
//   expected_risk_T    = ceil(n/sqrt(2))
double hyperparam_schedule(const std::string& kind, std::size_t n, double delta,
                           double c);

// High-accuracy reference minimizer of F_P over the ball (closed form when
// available, accelerated projected gradient otherwise). tol bounds the
// objective suboptimality of the returned point.
Eigen::VectorXd population_minimizer_reference(const ConvexProblem& problem,
                                               const FiniteDistribution& dist,
                                               double tol = 1e-10);

// F_P(w) - min_ball F_P, the reference minimum computed at tolerance 1e-10.
double excess_risk(const ConvexProblem& problem, const FiniteDistribution& dist,
                   const Eigen::VectorXd& w);

}  // namespace stabilab
