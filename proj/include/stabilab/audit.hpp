#pragma once

#include <cstdint>
#include <optional>

#include "json.hpp"
#include "stabilab/statistic.hpp"

namespace stabilab {

// The (s, i, z_i, z) tuple realizing the observed worst perturbation.
struct AuditWitness {
  Dataset dataset;
  std::size_t index;
  Point replacement;
  Point test_point;
};

struct StabilityAuditReport {
  double gamma_declared = 0.0;
  double gamma_observed = 0.0;
  std::size_t probes = 0;
  bool exhaustive = false;
  std::optional<AuditWitness> worst_witness;
};

struct AuditOptions {
  std::size_t probes = 1000;
  std::uint64_t seed = 0;
  // Enumerate exhaustively when support^(n+2) * n fits under this limit.
  std::uint64_t exhaustive_limit = 100000;
};

// Brute-force audit of the uniform-stability certificate: maximizes
// |M(s,z) - M(s^{i<-z_i}, z)| over probed tuples. Datasets and points are
// drawn uniformly from the support (weights are irrelevant to stability).
// Tiny spaces are enumerated exhaustively, in which case gamma_observed is
// the true maximum over the domain.
StabilityAuditReport audit_stability(const StableStatistic& m,
                                     const FiniteDistribution& domain,
                                     std::size_t n, const AuditOptions& opts);

void to_json(nlohmann::json& j, const StabilityAuditReport& r);

}  // namespace stabilab
