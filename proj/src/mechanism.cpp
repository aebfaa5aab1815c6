#include "stabilab/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stabilab/stats_util.hpp"

namespace stabilab {

namespace {

// Normalized exponential weights of `exponents`, max-subtracted.
std::vector<double> softmax_weights(std::span<const double> exponents) {
  const double top = *std::max_element(exponents.begin(), exponents.end());
  std::vector<double> w(exponents.size());
  double total = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    w[i] = std::exp(exponents[i] - top);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> log_softmax(std::span<const double> exponents) {
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double total = 0.0;
  for (double e : exponents) total += std::exp(e - top);
  const double lse = top + std::log(total);
  std::vector<double> out(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) out[i] = exponents[i] - lse;
  return out;
}

}  // namespace

MultiDataset::MultiDataset(std::vector<Dataset> subs) : subs_(std::move(subs)) {
  if (subs_.empty()) throw std::invalid_argument("multi-dataset must be nonempty");
  const std::size_t n = subs_.front().size();
  for (const Dataset& s : subs_)
    if (s.size() != n)
      throw std::invalid_argument("multi-dataset requires uniform sub-dataset size");
}

MultiDataset MultiDataset::sample(const FiniteDistribution& dist, std::size_t m,
                                  std::size_t n, Rng& rng) {
  std::vector<Dataset> subs;
  subs.reserve(m);
  for (std::size_t l = 0; l < m; ++l) subs.push_back(dist.sample_dataset(n, rng));
  return MultiDataset(std::move(subs));
}

MultiDataset MultiDataset::replace(std::size_t k, std::size_t i, Point z) const {
  if (k >= subs_.size()) throw std::out_of_range("sub-dataset index out of range");
  std::vector<Dataset> copy = subs_;
  copy[k] = copy[k].replace(i, std::move(z));
  return MultiDataset(std::move(copy));
}

double stable_max(std::span<const double> values, double eps) {
  if (values.empty()) throw std::invalid_argument("stable_max of empty input");
  if (eps <= 0.0) throw std::invalid_argument("stable_max requires eps > 0");
  std::vector<double> exponents(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) exponents[i] = eps * values[i];
  const std::vector<double> w = softmax_weights(exponents);
  double out = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) out += values[i] * w[i];
  return out;
}

MechanismOutput exp_mechanism(const ScoreVector& scores, double eps,
                              std::optional<std::uint64_t> seed) {
  if (scores.values.empty()) throw std::invalid_argument("empty score vector");
  if (scores.sensitivity <= 0.0)
    throw std::invalid_argument("score sensitivity must be positive");
  // eps = 0 is legitimate: selection becomes uniform and 0-differentially
  // private
  if (eps < 0.0) throw std::invalid_argument("exp_mechanism requires eps >= 0");

  std::vector<double> exponents(scores.values.size());
  for (std::size_t i = 0; i < scores.values.size(); ++i)
    exponents[i] = eps * scores.values[i] / (2.0 * scores.sensitivity);

  MechanismOutput out;
  out.probabilities = softmax_weights(exponents);
  for (std::size_t i = 0; i < scores.values.size(); ++i)
    out.expected_score += out.probabilities[i] * scores.values[i];
  if (seed) {
    Rng rng(*seed);
    const double u = rng.uniform01();
    double cum = 0.0;
    std::size_t pick = out.probabilities.size() - 1;
    for (std::size_t i = 0; i < out.probabilities.size(); ++i) {
      cum += out.probabilities[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    out.sampled_index = pick;
  }
  return out;
}

double dp_ratio_check(const ScoreVector& a, const ScoreVector& b, double eps) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("score vectors differ in length");
  if (a.sensitivity != b.sensitivity)
    throw std::invalid_argument("score vectors differ in sensitivity");
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (std::abs(a.values[i] - b.values[i]) > a.sensitivity + 1e-12)
      throw std::invalid_argument("perturbation exceeds declared sensitivity");

  auto exponents = [eps](const ScoreVector& s) {
    std::vector<double> e(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i)
      e[i] = eps * s.values[i] / (2.0 * s.sensitivity);
    return e;
  };
  const std::vector<double> la = log_softmax(exponents(a));
  const std::vector<double> lb = log_softmax(exponents(b));
  double worst = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i)
    worst = std::max(worst, std::abs(la[i] - lb[i]));
  return worst;
}

ScoreVector estimation_scores(const StableStatistic& m,
                              const FiniteDistribution& dist,
                              const MultiDataset& s, bool include_null) {
  ScoreVector scores;
  scores.values.reserve(s.count() + (include_null ? 1 : 0));
  for (std::size_t l = 0; l < s.count(); ++l)
    scores.values.push_back(estimation_error(m, s[l], dist));
  if (include_null) scores.values.push_back(0.0);
  scores.sensitivity =
      2.0 * m.declared_gamma(s.n()) + 1.0 / static_cast<double>(s.n());
  return scores;
}

void to_json(nlohmann::json& j, const CheckReport& r) {
  j = nlohmann::json{{"name", r.name},       {"statistic", r.statistic},
                     {"bound", r.bound},     {"ci_low", r.ci_low},
                     {"ci_high", r.ci_high}, {"pass", r.pass}};
  for (auto it = r.details.begin(); it != r.details.end(); ++it)
    j[it.key()] = it.value();
}

CheckReport max_to_tail_check(const std::function<double(Rng&)>& sampler,
                              std::size_t m, std::size_t trials,
                              std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("max_to_tail_check requires m >= 1");
  if (trials < 100)
    throw std::invalid_argument("max_to_tail_check requires trials >= 100");

  Rng max_rng(mix64(seed, 0));
  CompensatedSum max_sum;
  for (std::size_t t = 0; t < trials; ++t) {
    double top = 0.0;
    for (std::size_t i = 0; i < m; ++i) top = std::max(top, sampler(max_rng));
    max_sum.add(top);
  }
  const double threshold = 2.0 * max_sum.value() / static_cast<double>(trials);

  Rng tail_rng(mix64(seed, 1));
  std::size_t exceed = 0;
  for (std::size_t t = 0; t < trials; ++t)
    if (sampler(tail_rng) > threshold) ++exceed;

  const double bound = std::log(2.0) / static_cast<double>(m);
  const BinomialInterval ci = clopper_pearson(exceed, trials);
  CheckReport report;
  report.name = "lemma1_max_to_tail";
  report.statistic = static_cast<double>(exceed) / static_cast<double>(trials);
  report.bound = bound;
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  report.pass = ci.low <= bound;
  report.details = nlohmann::json{
      {"m", m}, {"trials", trials}, {"threshold", threshold}, {"exceed", exceed}};
  return report;
}

void to_json(nlohmann::json& j, const SandwichReport& r) {
  j = nlohmann::json{{"v_s", r.v_s},
                     {"true_mean_selected", r.true_mean_selected},
                     {"upper", r.upper},
                     {"lower", r.lower},
                     {"pass", r.pass}};
}

SandwichReport selector_sandwich_check(const StableStatistic& m,
                                       const FiniteDistribution& dist,
                                       std::size_t sub_count, std::size_t n,
                                       double eps, std::size_t trials,
                                       std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("sandwich check requires trials >= 2");
  const double gamma = m.declared_gamma(n);

  std::vector<double> true_sel(trials), emp_sel(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(mix64(seed, t));
    const MultiDataset multi = MultiDataset::sample(dist, sub_count, n, rng);
    const ScoreVector scores = estimation_scores(m, dist, multi);
    const MechanismOutput mech = exp_mechanism(scores, eps, std::nullopt);
    double x = 0.0, y = 0.0;
    for (std::size_t l = 0; l < sub_count; ++l) {
      const double t_mean = true_mean(m, multi[l], dist);
      // score = true - empirical, so the empirical mean comes for free
      x += mech.probabilities[l] * t_mean;
      y += mech.probabilities[l] * (t_mean - scores.values[l]);
    }
    true_sel[t] = x;
    emp_sel[t] = y;
  }

  SandwichReport report;
  report.v_s = sample_moments(emp_sel).mean;
  report.true_mean_selected = sample_moments(true_sel).mean;

  auto one_side = [&](const std::string& name, double scale) {
    // diffs: true - scale * empirical (upper side), scale*emp - ... folded by sign
    std::vector<double> diffs(trials);
    for (std::size_t t = 0; t < trials; ++t)
      diffs[t] = scale > 0.0 ? true_sel[t] - scale * emp_sel[t]
                             : -scale * emp_sel[t] - true_sel[t];
    const SampleMoments mom = sample_moments(diffs);
    CheckReport side;
    side.name = name;
    side.statistic = mom.mean;
    side.bound = gamma;
    side.ci_low = mom.mean - 3.0 * mom.std_error;
    side.ci_high = mom.mean + 3.0 * mom.std_error;
    side.pass = side.ci_low <= gamma;
    side.details = nlohmann::json{{"trials", trials}, {"eps", eps}, {"gamma", gamma}};
    return side;
  };
  report.upper = one_side("lemma4_upper", std::exp(eps));
  report.lower = one_side("lemma4_lower", -std::exp(-eps));
  report.pass = report.upper.pass && report.lower.pass;
  return report;
}

}  // namespace stabilab
