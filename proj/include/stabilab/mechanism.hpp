#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "stabilab/statistic.hpp"

namespace stabilab {

// Scores f_1..f_m of a dataset together with their common sensitivity bound.
struct ScoreVector {
  std::vector<double> values;
  double sensitivity = 0.0;
};

struct MechanismOutput {
  std::vector<double> probabilities;
  std::optional<std::size_t> sampled_index;
  double expected_score = 0.0;
};

// m sub-datasets of common size n.
class MultiDataset {
 public:
  explicit MultiDataset(std::vector<Dataset> subs);

  static MultiDataset sample(const FiniteDistribution& dist, std::size_t m,
                             std::size_t n, Rng& rng);

  std::size_t count() const { return subs_.size(); }
  std::size_t n() const { return subs_.front().size(); }
  const Dataset& operator[](std::size_t i) const { return subs_[i]; }

  // Copy with element i of sub-dataset k replaced by z.
  MultiDataset replace(std::size_t k, std::size_t i, Point z) const;

 private:
  std::vector<Dataset> subs_;
};

// Softmax-weighted average sum_i v_i e^{eps v_i} / sum_l e^{eps v_l},
// computed with max subtraction. Lies within [max - ln(m)/eps, max].
double stable_max(std::span<const double> values, double eps);

// Index selection with p_i proportional to exp(eps v_i / (2 sensitivity));
// eps = 0 selects uniformly. Sampling, when a seed is given, is inverse-CDF
// on the seeded generator: the smallest index i with u < cum_i, so boundary
// ties resolve to the lower index.
MechanismOutput exp_mechanism(const ScoreVector& scores, double eps,
                              std::optional<std::uint64_t> seed);

// Max over indices of |ln p_i - ln p_i'| for the two score vectors; the
// privacy contract keeps this at most eps. Requires the perturbation to be
// sensitivity-bounded coordinatewise.
double dp_ratio_check(const ScoreVector& a, const ScoreVector& b, double eps);

// f_l = estimation error of M on sub-dataset l; sensitivity 2 gamma + 1/n.
// include_null appends the constant-zero score used by tail arguments.
ScoreVector estimation_scores(const StableStatistic& m, const FiniteDistribution& dist,
                              const MultiDataset& s, bool include_null = false);

// Uniform serialized shape for the empirical checks: pass <=> ci_low <= bound.
struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double bound = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool pass = false;
  nlohmann::json details;
};

void to_json(nlohmann::json& j, const CheckReport& r);

// Monte-Carlo look at the max-to-tail lemma: estimates the probability that
// a fresh draw strictly exceeds twice the estimated mean of max{0, v_1..v_m}
// and compares the Clopper-Pearson lower bound with ln(2)/m. Exceedance is
// strict so point masses at the threshold do not spuriously fail.
CheckReport max_to_tail_check(const std::function<double(Rng&)>& sampler,
                              std::size_t m, std::size_t trials,
                              std::uint64_t seed);

struct SandwichReport {
  double v_s = 0.0;                 // E[empirical mean at the selected index]
  double true_mean_selected = 0.0;  // E[true mean at the selected index]
  CheckReport upper;                // E[true - e^eps emp] <= gamma
  CheckReport lower;                // E[e^-eps emp - true] <= gamma
  bool pass = false;
};

void to_json(nlohmann::json& j, const SandwichReport& r);

// Monte-Carlo check of the private-selection sandwich
// e^-eps V_S - gamma <= E[true mean at selected index] <= e^eps V_S + gamma,
// with selection by the exponential mechanism over estimation-error scores.
// Expectation over the selector is taken exactly via its probabilities;
// violations beyond 3 standard errors fail.
SandwichReport selector_sandwich_check(const StableStatistic& m,
                                       const FiniteDistribution& dist,
                                       std::size_t sub_count, std::size_t n,
                                       double eps, std::size_t trials,
                                       std::uint64_t seed);

}  // namespace stabilab
