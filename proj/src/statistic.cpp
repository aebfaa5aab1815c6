#include "stabilab/statistic.hpp"

namespace stabilab {

double loo_estimate(const CenteredStatistic& L, const Dataset& s) {
  const FiniteDistribution& dist = L.distribution();
  if (dist.kind() != s.kind() || dist.dim() != s.dim())
    throw std::invalid_argument("distribution/dataset kind mismatch");
  const auto n = static_cast<double>(s.size());
  CompensatedSum outer;
  for (std::size_t j = 0; j < dist.support_size(); ++j) {
    CompensatedSum inner;
    for (std::size_t i = 0; i < s.size(); ++i)
      inner.add(L(s.replace(i, dist.support()[j]), s[i]));
    outer.add(dist.weight(j) * (inner.value() / n));
  }
  return outer.value();
}

}  // namespace stabilab
