#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stabilab/bounds.hpp"
#include "stabilab/statistic.hpp"

namespace stabilab {

// ---- distribution presets ---------------------------------------------------

// Scalar two-point distribution: weight p on z1, 1-p on z0.
struct TwoPointSpec {
  double p = 0.5;
  double z0 = 0.0;
  double z1 = 1.0;
};

// k^dim grid over [-1,1]^dim, scaled by 1/sqrt(dim) into the ball, uniform
// weights.
struct UniformGridSpec {
  std::size_t k = 2;
  std::size_t dim = 1;
};

// k scalar positions, true label [x >= 0], label flipped with probability
// `noise`; Bayes error equals noise.
struct LabeledThresholdSpec {
  std::size_t k = 4;
  double noise = 0.1;
};

using DistributionSpec =
    std::variant<TwoPointSpec, UniformGridSpec, LabeledThresholdSpec>;

FiniteDistribution make_distribution(const DistributionSpec& spec);
DistributionSpec parse_distribution_spec(const nlohmann::json& j);
nlohmann::json distribution_spec_to_json(const DistributionSpec& spec);

// ---- statistic presets ------------------------------------------------------

struct ConstStatSpec {
  double value = 0.5;
};
struct IdentityStatSpec {};  // clamp(z_0, 0, 1); gamma = 0
struct MeanStatSpec {};      // clamp(mean of first coordinates, 0, 1); gamma = 2/n
struct ErmStatSpec {
  std::string family = "quadratic";
  double lambda = 0.1;
};
struct PgdStatSpec {
  std::string family = "quadratic";
  std::size_t steps = 16;
};
struct RrStatSpec {
  std::string base = "one_nn";
  double eps = 0.5;
};

using StatisticSpec = std::variant<ConstStatSpec, IdentityStatSpec, MeanStatSpec,
                                   ErmStatSpec, PgdStatSpec, RrStatSpec>;

StableStatistic make_statistic(const StatisticSpec& spec,
                               const FiniteDistribution& dist);
StatisticSpec parse_statistic_spec(const nlohmann::json& j);
nlohmann::json statistic_spec_to_json(const StatisticSpec& spec);
// Epsilon of an rr statistic, needed by the thm5 bound entries.
std::optional<double> statistic_eps(const StatisticSpec& spec);

// ---- experiment configuration ----------------------------------------------

struct ExperimentConfig {
  DistributionSpec distribution;
  StatisticSpec statistic;
  std::size_t n = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::vector<double> delta_grid = {0.5, 0.2, 0.1};
  std::vector<BoundId> bounds = {BoundId::exp_e1, BoundId::var_e2, BoundId::var_e5,
                                 BoundId::hp_e3, BoundId::hp_e6};
  std::size_t beta_probes = 200;
  std::size_t workers = 1;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// ---- trials ------------------------------------------------------------------

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double empirical_mean = 0.0;
  double true_mean = 0.0;
  std::optional<std::string> error;
};

// Runs config.trials independent draws of s ~ P^n. Trial t is seeded with
// mix64(config.seed, t); records come back in trial order no matter how many
// workers ran them. A statistic failure marks that trial, not the sweep.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config);
std::vector<TrialRecord> run_trials(const StableStatistic& stat,
                                    const FiniteDistribution& dist, std::size_t n,
                                    std::size_t trials, std::uint64_t seed,
                                    std::size_t workers = 1);

// ---- report -------------------------------------------------------------------

struct SweepCheckEntry {
  std::string name;
  std::string kind;  // "moment" or "tail"
  double statistic = 0.0;
  double value = 0.0;  // evaluated bound formula
  std::optional<double> delta;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool vacuous = false;
  bool constant_parameterized = false;
  bool pass = false;
};

struct BetaAuditResult {
  double estimate = 0.0;
  double bound = 0.0;  // 2 gamma + 1/n
  std::size_t probes = 0;
  bool exhaustive = false;
  bool pass = false;
};

struct SweepReport {
  nlohmann::json config;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
  double gamma = 0.0;
  double mean_delta = 0.0;
  double se_delta = 0.0;
  double mean_delta_sq = 0.0;
  double se_delta_sq = 0.0;
  double mean_abs_delta = 0.0;
  std::vector<std::pair<double, double>> quantiles;  // (delta, (1-delta)-quantile)
  std::vector<SweepCheckEntry> checks;
  std::optional<BetaAuditResult> beta;
  std::vector<std::string> errors;
  bool all_pass = false;
};

void to_json(nlohmann::json& j, const SweepCheckEntry& e);
void to_json(nlohmann::json& j, const SweepReport& r);

// Aggregates trial records into moment and tail checks against the configured
// bound ids, with Clopper-Pearson 95% intervals on tail frequencies. Vacuous
// bounds (value >= 1) auto-pass but stay flagged; constant-parameterized
// bounds are reported as labels, never failed.
SweepReport moment_and_tail_report(const ExperimentConfig& config,
                                   std::span<const TrialRecord> records);

// Estimation-error sensitivity: max over probed single-element replacements of
// |Delta_s - Delta_s'|. Enumerates exhaustively when the space is tiny.
BetaAuditResult delta_sensitivity_audit(const ExperimentConfig& config,
                                        std::size_t probes);

struct SweepResult {
  std::vector<TrialRecord> records;
  SweepReport report;
};

SweepResult run_sweep(const ExperimentConfig& config);

// One row per trial: index,seed,delta,emp_mean,true_mean. Byte-stable.
std::string trials_csv(std::span<const TrialRecord> records);

}  // namespace stabilab
