#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "stabilab/dataset.hpp"

namespace stabilab {

// Neumaier-compensated sum; keeps the exactness contracts (1e-12) honest for
// datasets up to ~1e6 points.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// A deterministic data-dependent function M(s, z) -> [0,1] bundled with its
// claimed uniform-stability certificate. The certificate is a function of the
// dataset size so learner statistics can declare n-dependent constants.
class StableStatistic {
 public:
  using EvalFn = std::function<double(const Dataset&, const Point&)>;
  using GammaFn = std::function<double(std::size_t)>;

  StableStatistic(std::string name, EvalFn eval, GammaFn gamma)
      : name_(std::move(name)), eval_(std::move(eval)), gamma_(std::move(gamma)) {}

  StableStatistic(std::string name, EvalFn eval, double gamma)
      : StableStatistic(std::move(name), std::move(eval),
                        [gamma](std::size_t) { return gamma; }) {
    if (gamma < 0.0) throw std::invalid_argument("negative stability certificate");
  }

  double operator()(const Dataset& s, const Point& z) const { return eval_(s, z); }
  double declared_gamma(std::size_t n) const { return gamma_(n); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  EvalFn eval_;
  GammaFn gamma_;
};

// (1/n) sum_i f(s, s_i)
template <class Fn>
double empirical_mean(const Fn& f, const Dataset& s) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < s.size(); ++i) acc.add(f(s, s[i]));
  return acc.value() / static_cast<double>(s.size());
}

// sum_z P(z) f(s, z), exact over the finite support.
template <class Fn>
double true_mean(const Fn& f, const Dataset& s, const FiniteDistribution& dist) {
  if (dist.kind() != s.kind() || dist.dim() != s.dim())
    throw std::invalid_argument("distribution/dataset kind mismatch");
  CompensatedSum acc;
  for (std::size_t j = 0; j < dist.support_size(); ++j)
    acc.add(dist.weight(j) * f(s, dist.support()[j]));
  return acc.value();
}

// True mean minus empirical mean.
template <class Fn>
double estimation_error(const Fn& f, const Dataset& s,
                        const FiniteDistribution& dist) {
  return true_mean(f, s, dist) - empirical_mean(f, s);
}

// The centered companion of a statistic: L(s,z) = M(s,z) - E_P[M(s,.)].
// Unbiased under P by construction; stability certificate doubles.
class CenteredStatistic {
 public:
  CenteredStatistic(StableStatistic base, FiniteDistribution dist)
      : base_(std::move(base)), dist_(std::move(dist)) {}

  double operator()(const Dataset& s, const Point& z) const {
    return base_(s, z) - true_mean(base_, s, dist_);
  }
  double declared_gamma(std::size_t n) const { return 2.0 * base_.declared_gamma(n); }
  const StableStatistic& base() const { return base_; }
  const FiniteDistribution& distribution() const { return dist_; }
  std::string name() const { return "centered(" + base_.name() + ")"; }

 private:
  StableStatistic base_;
  FiniteDistribution dist_;
};

inline CenteredStatistic center(const StableStatistic& m,
                                const FiniteDistribution& dist) {
  return CenteredStatistic(m, dist);
}

// Leave-one-out estimate sum_z P(z) (1/n) sum_i L(s^{i<-z}, s_i), exact over
// the finite support.
double loo_estimate(const CenteredStatistic& L, const Dataset& s);

}  // namespace stabilab
