#include "stabilab/dp_predict.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "stabilab/bounds.hpp"
#include "stabilab/io_util.hpp"
#include "stabilab/random.hpp"

namespace stabilab {

namespace {

int one_nn_predict(const Dataset& s, const Eigen::VectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  int label = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = (s[i].x() - x).squaredNorm();
    if (d < best) {
      best = d;
      label = s[i].y();
    }
  }
  return label;
}

int threshold_predict(const Dataset& s, const Eigen::VectorXd& x) {
  // Candidate cuts: below everything, then each sample's first coordinate.
  std::vector<double> cuts;
  cuts.reserve(s.size() + 1);
  double lowest = s[0].x0();
  for (std::size_t i = 0; i < s.size(); ++i) lowest = std::min(lowest, s[i].x0());
  cuts.push_back(lowest - 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) cuts.push_back(s[i].x0());

  double best_cut = cuts.front();
  std::size_t best_errors = s.size() + 1;
  for (double cut : cuts) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      errors += (s[i].x0() >= cut ? 1 : 0) != s[i].y();
    if (errors < best_errors || (errors == best_errors && cut < best_cut)) {
      best_errors = errors;
      best_cut = cut;
    }
  }
  return x[0] >= best_cut ? 1 : 0;
}

void check_labeled(const Dataset& s) {
  if (s.kind() != PointKind::labeled)
    throw std::invalid_argument("predictor requires a labeled dataset");
}

}  // namespace

BasePredictor make_base_predictor(const std::string& id) {
  if (id == "one_nn") {
    return BasePredictor("one_nn", [](const Dataset& s, const Eigen::VectorXd& x) {
      check_labeled(s);
      return one_nn_predict(s, x);
    });
  }
  if (id == "threshold") {
    return BasePredictor("threshold",
                         [](const Dataset& s, const Eigen::VectorXd& x) {
                           check_labeled(s);
                           return threshold_predict(s, x);
                         });
  }
  throw std::invalid_argument("unknown base predictor: " + id);
}

RRPredictor::RRPredictor(BasePredictor base_predictor, double eps_value)
    : base(std::move(base_predictor)),
      eps(eps_value),
      flip_probability(1.0 / (1.0 + std::exp(eps_value))) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
}

int rr_predict(const RRPredictor& p, const Dataset& s, const Eigen::VectorXd& x,
               std::uint64_t seed) {
  const int base = p.base(s, x);
  Rng rng(seed);
  return rng.uniform01() < p.flip_probability ? 1 - base : base;
}

StableStatistic rr_loss_statistic(const RRPredictor& p) {
  const double flip = p.flip_probability;
  const double gamma = (std::exp(p.eps) - 1.0) / (std::exp(p.eps) + 1.0);
  BasePredictor base = p.base;
  auto eval = [base, flip, gamma](const Dataset& s, const Point& z) {
    const double mismatch = base(s, z.x()) != z.y() ? 1.0 : 0.0;
    return flip + gamma * mismatch;
  };
  return StableStatistic(
      "rr(" + base.name() + ",eps=" + format_double(p.eps) + ")", std::move(eval),
      gamma);
}

StableStatistic base_loss_statistic(const BasePredictor& base) {
  BasePredictor copy = base;
  auto eval = [copy](const Dataset& s, const Point& z) {
    return copy(s, z.x()) != z.y() ? 1.0 : 0.0;
  };
  return StableStatistic("zero_one(" + base.name() + ")", std::move(eval), 1.0);
}

std::pair<double, double> thm5_report(double eps, std::size_t n, double delta) {
  BoundInputs in;
  in.eps = eps;
  in.n = n;
  in.delta = delta;
  return {evaluate_bound(BoundId::thm5_var, in),
          evaluate_bound(BoundId::thm5_hp, in)};
}

}  // namespace stabilab
