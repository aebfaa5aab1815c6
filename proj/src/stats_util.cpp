#include "stabilab/stats_util.hpp"

#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <stdexcept>

#include "stabilab/statistic.hpp"

namespace stabilab {

SampleMoments sample_moments(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("sample_moments: empty sample");
  SampleMoments m;
  m.count = xs.size();
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  m.mean = sum.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - m.mean) * (x - m.mean));
    m.variance = sq.value() / static_cast<double>(xs.size() - 1);
    m.std_error = std::sqrt(m.variance / static_cast<double>(xs.size()));
  }
  return m;
}

BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials,
                                 double alpha) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson: zero trials");
  if (successes > trials)
    throw std::invalid_argument("clopper_pearson: successes > trials");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("clopper_pearson: alpha outside (0,1)");
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  BinomialInterval ci;
  if (successes > 0) {
    boost::math::beta_distribution<double> lo(k, n - k + 1.0);
    ci.low = boost::math::quantile(lo, alpha / 2.0);
  }
  if (successes < trials) {
    boost::math::beta_distribution<double> hi(k + 1.0, n - k);
    ci.high = boost::math::quantile(hi, 1.0 - alpha / 2.0);
  }
  return ci;
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("empirical_quantile: q outside [0,1]");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank == 0) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

}  // namespace stabilab
