#pragma once

#include <cstddef>
#include <span>

namespace stabilab {

struct SampleMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
};

SampleMoments sample_moments(std::span<const double> xs);

struct BinomialInterval {
  double low = 0.0;
  double high = 1.0;
};

// Exact Clopper-Pearson interval at confidence 1-alpha.
BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials,
                                 double alpha = 0.05);

// Nearest-rank empirical quantile: the ceil(q*n)-th smallest sample.
double empirical_quantile(std::span<const double> sorted, double q);

}  // namespace stabilab
