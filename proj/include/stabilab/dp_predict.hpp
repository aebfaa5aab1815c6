#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "stabilab/statistic.hpp"

namespace stabilab {

// A deterministic binary classifier trained on a labeled dataset. May be
// arbitrarily unstable; privacy is added on top by randomized response.
class BasePredictor {
 public:
  using PredictFn = std::function<int(const Dataset&, const Eigen::VectorXd&)>;

  BasePredictor(std::string name, PredictFn predict)
      : name_(std::move(name)), predict_(std::move(predict)) {}

  int operator()(const Dataset& s, const Eigen::VectorXd& x) const {
    return predict_(s, x);
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  PredictFn predict_;
};

// Presets: "one_nn" (nearest neighbor, ties to the lower index) and
// "threshold" (empirical-error-minimizing threshold on the first coordinate,
// predicting 1 iff x_0 >= t).
BasePredictor make_base_predictor(const std::string& id);

// Randomized response over a base classifier: answers base(s, x) with
// probability e^eps/(1+e^eps) and the flipped label otherwise, which makes
// every prediction eps-differentially private in s.
struct RRPredictor {
  RRPredictor(BasePredictor base_predictor, double eps);

  BasePredictor base;
  double eps;
  double flip_probability;  // 1/(1+e^eps)
};

int rr_predict(const RRPredictor& p, const Dataset& s, const Eigen::VectorXd& x,
               std::uint64_t seed);

// Expected 0/1 loss of the randomized prediction, in closed form:
//   eval(s,(x,y)) = 1/(1+e^eps) + ((e^eps-1)/(e^eps+1)) [base(s,x) != y].
// Certificate (e^eps-1)/(e^eps+1), which undercuts the generic e^eps-1.
StableStatistic rr_loss_statistic(const RRPredictor& p);

// Raw 0/1 loss of the base classifier; certificate 1 (no stability promised).
// Exists to show how unstable the underlying learner can be.
StableStatistic base_loss_statistic(const BasePredictor& base);

// The generalization-bound pair for private prediction, delegated to the
// bound catalog with gamma := e^eps - 1: (second moment, tail at delta).
std::pair<double, double> thm5_report(double eps, std::size_t n, double delta);

}  // namespace stabilab
