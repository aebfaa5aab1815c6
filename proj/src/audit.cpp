#include "stabilab/audit.hpp"

#include <cmath>
#include <stdexcept>

namespace stabilab {

namespace {

// support^(n+2) * n, saturating at 2^64-1.
std::uint64_t enumeration_space(std::uint64_t support, std::uint64_t n) {
  constexpr std::uint64_t kMax = ~0ULL;
  std::uint64_t space = n;
  for (std::uint64_t e = 0; e < n + 2; ++e) {
    if (space > kMax / support) return kMax;
    space *= support;
  }
  return space;
}

bool advance_odometer(std::vector<std::size_t>& digits, std::size_t base) {
  for (std::size_t pos = 0; pos < digits.size(); ++pos) {
    if (++digits[pos] < base) return true;
    digits[pos] = 0;
  }
  return false;
}

}  // namespace

StabilityAuditReport audit_stability(const StableStatistic& m,
                                     const FiniteDistribution& domain,
                                     std::size_t n, const AuditOptions& opts) {
  if (n == 0) throw std::invalid_argument("audit requires n >= 1");
  if (opts.probes == 0) throw std::invalid_argument("audit requires probes >= 1");

  const auto& support = domain.support();
  const std::size_t k = support.size();

  StabilityAuditReport report;
  report.gamma_declared = m.declared_gamma(n);
  report.exhaustive = enumeration_space(k, n) <= opts.exhaustive_limit;

  auto consider = [&](const Dataset& s, std::size_t i, const Point& zi,
                      const Point& z, double diff) {
    if (diff > report.gamma_observed || !report.worst_witness) {
      report.gamma_observed = std::max(diff, report.gamma_observed);
      report.worst_witness = AuditWitness{s, i, zi, z};
    }
  };

  if (report.exhaustive) {
    std::vector<std::size_t> digits(n, 0);
    do {
      std::vector<Point> points;
      points.reserve(n);
      for (std::size_t i = 0; i < n; ++i) points.push_back(support[digits[i]]);
      const Dataset s(std::move(points));
      std::vector<double> at_s(k);
      for (std::size_t zj = 0; zj < k; ++zj) at_s[zj] = m(s, support[zj]);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t rj = 0; rj < k; ++rj) {
          const Dataset replaced = s.replace(i, support[rj]);
          for (std::size_t zj = 0; zj < k; ++zj) {
            const double diff = std::abs(at_s[zj] - m(replaced, support[zj]));
            consider(s, i, support[rj], support[zj], diff);
            ++report.probes;
          }
        }
      }
    } while (advance_odometer(digits, k));
    return report;
  }

  Rng rng(opts.seed);
  for (std::size_t p = 0; p < opts.probes; ++p) {
    std::vector<Point> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) points.push_back(support[rng.below(k)]);
    const Dataset s(std::move(points));
    const std::size_t i = rng.below(n);
    const Point& zi = support[rng.below(k)];
    const Point& z = support[rng.below(k)];
    const double diff = std::abs(m(s, z) - m(s.replace(i, zi), z));
    consider(s, i, zi, z, diff);
    ++report.probes;
  }
  return report;
}

void to_json(nlohmann::json& j, const StabilityAuditReport& r) {
  j = nlohmann::json{{"gamma_declared", r.gamma_declared},
                     {"gamma_observed", r.gamma_observed},
                     {"probes", r.probes},
                     {"exhaustive", r.exhaustive}};
  if (r.worst_witness) {
    const AuditWitness& w = *r.worst_witness;
    j["worst_witness"] = nlohmann::json{
        {"dataset", w.dataset},
        {"index", w.index},
        {"replacement", point_to_json(w.replacement)},
        {"test_point", point_to_json(w.test_point)}};
  }
}

}  // namespace stabilab
