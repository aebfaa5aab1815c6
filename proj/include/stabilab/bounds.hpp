#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace stabilab {

// Closed-form estimation-error and excess-risk bounds, evaluated from
// (gamma, n, delta, eps) plus free constants where a formula leaves them
// unnamed.
enum class BoundId {
  exp_e1,          // |E[Delta]| <= gamma
  var_e2,          // E[Delta^2] <= 1/(2n) + 6 gamma
  hp_e3,           // (4 gamma + 1/n) sqrt(n ln(1/delta)/2) + 2 gamma
  firstmoment_e4,  // c (gamma + 1/sqrt(n)), ERM first-moment bound
  var_e5,          // 16 gamma^2 + 2/n
  hp_e6,           // 8 sqrt((2 gamma + 1/n) ln(8/delta))
  hp_fv19,         // c (gamma ln(n) ln(n/delta) + sqrt(ln(1/delta)/n))
  thm5_var,        // var_e5 with gamma := e^eps - 1
  thm5_hp,         // hp_e6 with gamma := e^eps - 1
  cor3_a,          // c1 (gamma/(4 sqrt(delta)) + 1/sqrt(n)),  1/(lambda n) = gamma/4
  cor3_b,          // (c2/2) sqrt(gamma ln(1/delta))
  cor4_a,          // c1 / (delta^{1/4} sqrt(n))
  cor4_b,          // c2 sqrt(ln(1/delta)) / n^{1/3}
  cor5_a,          // c1 / (delta^{1/4} sqrt(n))
  cor5_b,          // c2 sqrt(ln(1/delta)) / n^{1/3}
  ssss_thm3,       // gamma/delta, excess-risk tail for strongly convex ERM
  cor2,            // (4/sqrt(delta n)) (1 + 8/(delta n))
};

struct BoundInputs {
  double gamma = 0.0;
  std::size_t n = 1;
  double delta = 0.5;
  double eps = 0.0;
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

enum class BoundKind { second_moment, tail };

double evaluate_bound(BoundId id, const BoundInputs& in);

std::string bound_id_to_string(BoundId id);
BoundId bound_id_from_string(const std::string& s);
std::string bound_formula(BoundId id);
// Unnamed-constant formulas; check reports label these non-falsifying.
bool bound_constant_parameterized(BoundId id);
const std::vector<BoundId>& all_bound_ids();

struct BoundCatalogEntry {
  BoundId id;
  std::string formula;
  BoundInputs inputs;
  double value;
  bool vacuous;  // value >= 1 while the statistic range is [0,1]
  bool constant_parameterized;
};

BoundCatalogEntry evaluate_catalog_entry(BoundId id, const BoundInputs& in);
std::vector<BoundCatalogEntry> evaluate_catalog(const BoundInputs& in);

// Minimum over the fixed-constant bounds of the given kind
// (second_moment: var_e2, var_e5; tail: hp_e3, hp_e6). Ties go to catalog
// order.
std::pair<BoundId, double> tightest_bound(BoundKind kind, const BoundInputs& in);

std::string catalog_csv(const std::vector<BoundCatalogEntry>& entries);

}  // namespace stabilab
