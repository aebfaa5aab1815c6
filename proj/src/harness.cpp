#include "stabilab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "stabilab/convex.hpp"
#include "stabilab/dp_predict.hpp"
#include "stabilab/io_util.hpp"
#include "stabilab/stats_util.hpp"

namespace stabilab {

namespace {

constexpr std::uint64_t kBetaSeedOffset = 1ULL << 32;
constexpr std::uint64_t kExhaustiveLimit = 100000;
constexpr double kAuditSlack = 1e-9;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Bound ids that can be checked against estimation-error samples.
bool sweep_compatible(BoundId id) {
  switch (id) {
    case BoundId::exp_e1:
    case BoundId::var_e2:
    case BoundId::var_e5:
    case BoundId::firstmoment_e4:
    case BoundId::hp_e3:
    case BoundId::hp_e6:
    case BoundId::hp_fv19:
    case BoundId::thm5_var:
    case BoundId::thm5_hp:
      return true;
    default:
      return false;
  }
}

bool is_tail_bound(BoundId id) {
  return id == BoundId::hp_e3 || id == BoundId::hp_e6 || id == BoundId::hp_fv19 ||
         id == BoundId::thm5_hp;
}

}  // namespace

FiniteDistribution make_distribution(const DistributionSpec& spec) {
  if (const auto* two = std::get_if<TwoPointSpec>(&spec)) {
    if (!(two->p >= 0.0 && two->p <= 1.0))
      throw std::invalid_argument("two_point: p must lie in [0,1]");
    if (two->z0 == two->z1)
      throw std::invalid_argument("two_point: support points must differ");
    return FiniteDistribution({Point::scalar(two->z0), Point::scalar(two->z1)},
                              {1.0 - two->p, two->p});
  }
  if (const auto* grid = std::get_if<UniformGridSpec>(&spec)) {
    if (grid->k == 0 || grid->dim == 0)
      throw std::invalid_argument("uniform_grid: k and dim must be >= 1");
    double size = 1.0;
    for (std::size_t a = 0; a < grid->dim; ++a) size *= static_cast<double>(grid->k);
    if (size > 4096.0)
      throw std::invalid_argument("uniform_grid: support size k^dim exceeds 4096");
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid->dim));
    std::vector<Point> support;
    std::vector<std::size_t> digits(grid->dim, 0);
    while (true) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(grid->dim));
      for (std::size_t a = 0; a < grid->dim; ++a) {
        const double coord =
            grid->k == 1 ? 0.0
                         : -1.0 + 2.0 * static_cast<double>(digits[a]) /
                                      static_cast<double>(grid->k - 1);
        x[static_cast<Eigen::Index>(a)] = coord * scale;
      }
      support.push_back(Point::vector(std::move(x)));
      std::size_t pos = 0;
      for (; pos < grid->dim; ++pos) {
        if (++digits[pos] < grid->k) break;
        digits[pos] = 0;
      }
      if (pos == grid->dim) break;
    }
    return FiniteDistribution::uniform(std::move(support));
  }
  const auto& lt = std::get<LabeledThresholdSpec>(spec);
  if (lt.k == 0) throw std::invalid_argument("labeled_threshold: k must be >= 1");
  if (!(lt.noise >= 0.0 && lt.noise < 0.5))
    throw std::invalid_argument("labeled_threshold: noise must lie in [0, 0.5)");
  std::vector<Point> support;
  std::vector<double> weights;
  for (std::size_t i = 0; i < lt.k; ++i) {
    const double x = lt.k == 1 ? 0.0
                               : -1.0 + 2.0 * static_cast<double>(i) /
                                            static_cast<double>(lt.k - 1);
    const int truth = x >= 0.0 ? 1 : 0;
    Eigen::VectorXd coords(1);
    coords[0] = x;
    support.push_back(Point::labeled(coords, truth));
    weights.push_back((1.0 - lt.noise) / static_cast<double>(lt.k));
    support.push_back(Point::labeled(coords, 1 - truth));
    weights.push_back(lt.noise / static_cast<double>(lt.k));
  }
  return FiniteDistribution(std::move(support), std::move(weights));
}

DistributionSpec parse_distribution_spec(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "two_point") {
    TwoPointSpec spec;
    spec.p = j.at("p").get<double>();
    spec.z0 = j.at("z0").get<double>();
    spec.z1 = j.at("z1").get<double>();
    return spec;
  }
  if (kind == "uniform_grid") {
    UniformGridSpec spec;
    spec.k = j.at("k").get<std::size_t>();
    spec.dim = j.value("dim", std::size_t{1});
    return spec;
  }
  if (kind == "labeled_threshold") {
    LabeledThresholdSpec spec;
    spec.k = j.at("k").get<std::size_t>();
    spec.noise = j.at("noise").get<double>();
    return spec;
  }
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

nlohmann::json distribution_spec_to_json(const DistributionSpec& spec) {
  if (const auto* two = std::get_if<TwoPointSpec>(&spec))
    return {{"kind", "two_point"}, {"p", two->p}, {"z0", two->z0}, {"z1", two->z1}};
  if (const auto* grid = std::get_if<UniformGridSpec>(&spec))
    return {{"kind", "uniform_grid"}, {"k", grid->k}, {"dim", grid->dim}};
  const auto& lt = std::get<LabeledThresholdSpec>(spec);
  return {{"kind", "labeled_threshold"}, {"k", lt.k}, {"noise", lt.noise}};
}

StableStatistic make_statistic(const StatisticSpec& spec,
                               const FiniteDistribution& dist) {
  if (const auto* c = std::get_if<ConstStatSpec>(&spec)) {
    if (!(c->value >= 0.0 && c->value <= 1.0))
      throw std::invalid_argument("const statistic value must lie in [0,1]");
    const double v = c->value;
    return StableStatistic("const(" + format_double(v) + ")",
                           [v](const Dataset&, const Point&) { return v; }, 0.0);
  }
  if (std::get_if<IdentityStatSpec>(&spec)) {
    return StableStatistic(
        "identity",
        [](const Dataset&, const Point& z) { return clamp01(z.x0()); }, 0.0);
  }
  if (std::get_if<MeanStatSpec>(&spec)) {
    auto eval = [](const Dataset& s, const Point&) {
      CompensatedSum acc;
      for (std::size_t i = 0; i < s.size(); ++i) acc.add(s[i].x0());
      return clamp01(acc.value() / static_cast<double>(s.size()));
    };
    // first coordinates live in [-1,1], so one replacement moves the mean by
    // at most 2/n
    auto gamma = [](std::size_t n) { return 2.0 / static_cast<double>(n); };
    return StableStatistic("mean", std::move(eval), std::move(gamma));
  }
  if (const auto* erm = std::get_if<ErmStatSpec>(&spec)) {
    auto problem = make_problem(erm->family, dist.dim());
    if (problem->point_kind() != dist.kind())
      throw std::invalid_argument("statistic family and distribution kind differ");
    return make_erm_statistic(std::move(problem), erm->lambda);
  }
  if (const auto* pg = std::get_if<PgdStatSpec>(&spec)) {
    auto problem = make_problem(pg->family, dist.dim());
    if (problem->point_kind() != dist.kind())
      throw std::invalid_argument("statistic family and distribution kind differ");
    return make_pgd_statistic(std::move(problem), pg->steps);
  }
  const auto& rr = std::get<RrStatSpec>(spec);
  if (dist.kind() != PointKind::labeled)
    throw std::invalid_argument("rr statistic requires a labeled distribution");
  return rr_loss_statistic(RRPredictor(make_base_predictor(rr.base), rr.eps));
}

StatisticSpec parse_statistic_spec(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "const") return ConstStatSpec{j.value("value", 0.5)};
  if (kind == "identity") return IdentityStatSpec{};
  if (kind == "mean") return MeanStatSpec{};
  if (kind == "erm")
    return ErmStatSpec{j.value("family", std::string("quadratic")),
                       j.at("lambda").get<double>()};
  if (kind == "pgd")
    return PgdStatSpec{j.value("family", std::string("quadratic")),
                       j.at("T").get<std::size_t>()};
  if (kind == "rr")
    return RrStatSpec{j.value("base", std::string("one_nn")),
                      j.at("eps").get<double>()};
  throw std::invalid_argument("unknown statistic kind: " + kind);
}

nlohmann::json statistic_spec_to_json(const StatisticSpec& spec) {
  if (const auto* c = std::get_if<ConstStatSpec>(&spec))
    return {{"kind", "const"}, {"value", c->value}};
  if (std::get_if<IdentityStatSpec>(&spec)) return {{"kind", "identity"}};
  if (std::get_if<MeanStatSpec>(&spec)) return {{"kind", "mean"}};
  if (const auto* erm = std::get_if<ErmStatSpec>(&spec))
    return {{"kind", "erm"}, {"family", erm->family}, {"lambda", erm->lambda}};
  if (const auto* pg = std::get_if<PgdStatSpec>(&spec))
    return {{"kind", "pgd"}, {"family", pg->family}, {"T", pg->steps}};
  const auto& rr = std::get<RrStatSpec>(spec);
  return {{"kind", "rr"}, {"base", rr.base}, {"eps", rr.eps}};
}

std::optional<double> statistic_eps(const StatisticSpec& spec) {
  if (const auto* rr = std::get_if<RrStatSpec>(&spec)) return rr->eps;
  return std::nullopt;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  config.distribution = parse_distribution_spec(j.at("distribution"));
  config.statistic = parse_statistic_spec(j.at("statistic"));
  config.n = j.at("n").get<std::size_t>();
  config.trials = j.at("trials").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("delta_grid"))
    config.delta_grid = j.at("delta_grid").get<std::vector<double>>();
  if (j.contains("bounds")) {
    config.bounds.clear();
    for (const auto& name : j.at("bounds"))
      config.bounds.push_back(bound_id_from_string(name.get<std::string>()));
  }
  config.beta_probes = j.value("beta_probes", std::size_t{200});
  config.workers = j.value("workers", std::size_t{1});

  if (config.n == 0) throw std::invalid_argument("config: n must be >= 1");
  if (config.trials < 100)
    throw std::invalid_argument("config: trials must be >= 100");
  if (config.trials >= kBetaSeedOffset)
    throw std::invalid_argument("config: trials must be < 2^32");
  for (double d : config.delta_grid)
    if (!(d > 0.0 && d < 1.0))
      throw std::invalid_argument("config: delta grid must lie in (0,1)");
  for (BoundId id : config.bounds) {
    if (!sweep_compatible(id))
      throw std::invalid_argument("config: bound " + bound_id_to_string(id) +
                                  " is not an estimation-error bound");
    if ((id == BoundId::thm5_var || id == BoundId::thm5_hp) &&
        !statistic_eps(config.statistic))
      throw std::invalid_argument("config: thm5 bounds need an rr statistic");
  }
  return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  std::vector<std::string> bound_names;
  bound_names.reserve(config.bounds.size());
  for (BoundId id : config.bounds) bound_names.push_back(bound_id_to_string(id));
  return nlohmann::json{{"distribution", distribution_spec_to_json(config.distribution)},
                        {"statistic", statistic_spec_to_json(config.statistic)},
                        {"n", config.n},
                        {"trials", config.trials},
                        {"seed", config.seed},
                        {"delta_grid", config.delta_grid},
                        {"bounds", bound_names},
                        {"beta_probes", config.beta_probes},
                        {"workers", config.workers}};
}

std::vector<TrialRecord> run_trials(const StableStatistic& stat,
                                    const FiniteDistribution& dist, std::size_t n,
                                    std::size_t trials, std::uint64_t seed,
                                    std::size_t workers) {
  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= trials) return;
      TrialRecord& rec = records[t];
      rec.index = t;
      rec.seed = mix64(seed, t);
      try {
        Rng rng(rec.seed);
        const Dataset s = dist.sample_dataset(n, rng);
        rec.empirical_mean = empirical_mean(stat, s);
        rec.true_mean = true_mean(stat, s, dist);
        rec.delta = rec.true_mean - rec.empirical_mean;
      } catch (const std::exception& e) {
        rec.error = e.what();
        rec.delta = std::numeric_limits<double>::quiet_NaN();
        rec.empirical_mean = std::numeric_limits<double>::quiet_NaN();
        rec.true_mean = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  const std::size_t worker_count = std::max<std::size_t>(1, workers);
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return records;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config) {
  const FiniteDistribution dist = make_distribution(config.distribution);
  const StableStatistic stat = make_statistic(config.statistic, dist);
  return run_trials(stat, dist, config.n, config.trials, config.seed,
                    config.workers);
}

BetaAuditResult delta_sensitivity_audit(const ExperimentConfig& config,
                                        std::size_t probes) {
  if (probes == 0) throw std::invalid_argument("beta audit requires probes >= 1");
  const FiniteDistribution dist = make_distribution(config.distribution);
  const StableStatistic stat = make_statistic(config.statistic, dist);
  const auto& support = dist.support();
  const std::size_t k = support.size();
  const std::size_t n = config.n;

  BetaAuditResult result;
  result.bound = 2.0 * stat.declared_gamma(n) + 1.0 / static_cast<double>(n);

  auto delta_of = [&](const Dataset& s) { return estimation_error(stat, s, dist); };

  // k^(n+1) * n, saturating
  double space = static_cast<double>(n);
  for (std::size_t e = 0; e < n + 1; ++e) space *= static_cast<double>(k);
  result.exhaustive = space <= static_cast<double>(kExhaustiveLimit);

  if (result.exhaustive) {
    std::vector<std::size_t> digits(n, 0);
    while (true) {
      std::vector<Point> points;
      points.reserve(n);
      for (std::size_t i = 0; i < n; ++i) points.push_back(support[digits[i]]);
      const Dataset s(std::move(points));
      const double base = delta_of(s);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t rj = 0; rj < k; ++rj) {
          const double other = delta_of(s.replace(i, support[rj]));
          result.estimate = std::max(result.estimate, std::abs(base - other));
          ++result.probes;
        }
      }
      std::size_t pos = 0;
      for (; pos < n; ++pos) {
        if (++digits[pos] < k) break;
        digits[pos] = 0;
      }
      if (pos == n) break;
    }
  } else {
    for (std::size_t p = 0; p < probes; ++p) {
      Rng rng(mix64(config.seed, kBetaSeedOffset + p));
      std::vector<Point> points;
      points.reserve(n);
      for (std::size_t i = 0; i < n; ++i) points.push_back(support[rng.below(k)]);
      const Dataset s(std::move(points));
      const std::size_t i = rng.below(n);
      const Point& z = support[rng.below(k)];
      const double diff = std::abs(delta_of(s) - delta_of(s.replace(i, z)));
      result.estimate = std::max(result.estimate, diff);
      ++result.probes;
    }
  }
  result.pass = result.estimate <= result.bound + kAuditSlack;
  return result;
}

void to_json(nlohmann::json& j, const SweepCheckEntry& e) {
  j = nlohmann::json{{"name", e.name},
                     {"kind", e.kind},
                     {"statistic", e.statistic},
                     {"value", e.value},
                     {"ci_low", e.ci_low},
                     {"ci_high", e.ci_high},
                     {"vacuous", e.vacuous},
                     {"constant_parameterized", e.constant_parameterized},
                     {"pass", e.pass}};
  if (e.delta) j["delta"] = *e.delta;
}

void to_json(nlohmann::json& j, const SweepReport& r) {
  nlohmann::json quantiles = nlohmann::json::array();
  for (const auto& [delta, value] : r.quantiles)
    quantiles.push_back({{"delta", delta}, {"quantile", value}});
  j = nlohmann::json{{"kind", "sweep_report"},
                     {"config", r.config},
                     {"n", r.n},
                     {"trials", r.trials},
                     {"trials_ok", r.trials_ok},
                     {"trials_failed", r.trials_failed},
                     {"gamma", r.gamma},
                     {"mean_delta", r.mean_delta},
                     {"se_delta", r.se_delta},
                     {"mean_delta_sq", r.mean_delta_sq},
                     {"se_delta_sq", r.se_delta_sq},
                     {"mean_abs_delta", r.mean_abs_delta},
                     {"quantiles", quantiles},
                     {"checks", r.checks},
                     {"errors", r.errors},
                     {"all_pass", r.all_pass}};
  if (r.beta) {
    j["beta"] = nlohmann::json{{"estimate", r.beta->estimate},
                               {"bound", r.beta->bound},
                               {"probes", r.beta->probes},
                               {"exhaustive", r.beta->exhaustive},
                               {"pass", r.beta->pass}};
  } else {
    j["beta"] = nullptr;
  }
}

SweepReport moment_and_tail_report(const ExperimentConfig& config,
                                   std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("report requires records");
  const FiniteDistribution dist = make_distribution(config.distribution);
  const StableStatistic stat = make_statistic(config.statistic, dist);

  SweepReport report;
  report.config = config_to_json(config);
  report.n = config.n;
  report.trials = records.size();
  report.gamma = stat.declared_gamma(config.n);

  std::vector<double> deltas;
  deltas.reserve(records.size());
  for (const TrialRecord& rec : records) {
    if (rec.error) {
      report.errors.push_back("trial " + std::to_string(rec.index) + ": " +
                              *rec.error);
      ++report.trials_failed;
    } else {
      deltas.push_back(rec.delta);
      ++report.trials_ok;
    }
  }
  if (deltas.empty()) throw std::runtime_error("all trials failed");

  std::vector<double> abs_deltas(deltas.size()), sq_deltas(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    abs_deltas[i] = std::abs(deltas[i]);
    sq_deltas[i] = deltas[i] * deltas[i];
  }
  const SampleMoments mom = sample_moments(deltas);
  const SampleMoments mom_sq = sample_moments(sq_deltas);
  report.mean_delta = mom.mean;
  report.se_delta = mom.std_error;
  report.mean_delta_sq = mom_sq.mean;
  report.se_delta_sq = mom_sq.std_error;
  report.mean_abs_delta = sample_moments(abs_deltas).mean;

  std::vector<double> sorted = deltas;
  std::sort(sorted.begin(), sorted.end());
  for (double d : config.delta_grid)
    report.quantiles.emplace_back(d, empirical_quantile(sorted, 1.0 - d));

  BoundInputs inputs;
  inputs.gamma = report.gamma;
  inputs.n = config.n;
  if (auto eps = statistic_eps(config.statistic)) inputs.eps = *eps;

  auto moment_check = [&](BoundId id, double statistic, double std_error) {
    SweepCheckEntry entry;
    entry.name = bound_id_to_string(id);
    entry.kind = "moment";
    entry.statistic = statistic;
    entry.value = evaluate_bound(id, inputs);
    entry.ci_low = statistic - 3.0 * std_error;
    entry.ci_high = statistic + 3.0 * std_error;
    entry.vacuous = entry.value >= 1.0;
    entry.constant_parameterized = bound_constant_parameterized(id);
    entry.pass = entry.vacuous || entry.constant_parameterized ||
                 entry.ci_low <= entry.value;
    report.checks.push_back(std::move(entry));
  };

  for (BoundId id : config.bounds) {
    if (is_tail_bound(id)) {
      for (double d : config.delta_grid) {
        BoundInputs tail_inputs = inputs;
        tail_inputs.delta = d;
        SweepCheckEntry entry;
        entry.name = bound_id_to_string(id) + "@delta=" + format_double(d);
        entry.kind = "tail";
        entry.delta = d;
        entry.value = evaluate_bound(id, tail_inputs);
        entry.vacuous = entry.value >= 1.0;
        entry.constant_parameterized = bound_constant_parameterized(id);
        std::size_t exceed = 0;
        for (double x : deltas)
          if (x >= entry.value) ++exceed;
        entry.statistic =
            static_cast<double>(exceed) / static_cast<double>(deltas.size());
        const BinomialInterval ci = clopper_pearson(exceed, deltas.size());
        entry.ci_low = ci.low;
        entry.ci_high = ci.high;
        entry.pass =
            entry.vacuous || entry.constant_parameterized || entry.ci_low <= d;
        report.checks.push_back(std::move(entry));
      }
    } else if (id == BoundId::exp_e1) {
      moment_check(id, std::abs(report.mean_delta), report.se_delta);
    } else if (id == BoundId::var_e2 || id == BoundId::var_e5 ||
               id == BoundId::thm5_var) {
      moment_check(id, report.mean_delta_sq, report.se_delta_sq);
    } else if (id == BoundId::firstmoment_e4) {
      moment_check(id, report.mean_abs_delta,
                   sample_moments(abs_deltas).std_error);
    }
  }

  if (config.beta_probes > 0)
    report.beta = delta_sensitivity_audit(config, config.beta_probes);

  report.all_pass = report.trials_failed == 0;
  for (const SweepCheckEntry& entry : report.checks)
    report.all_pass = report.all_pass && entry.pass;
  if (report.beta) report.all_pass = report.all_pass && report.beta->pass;
  return report;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  SweepResult result;
  result.records = run_trials(config);
  result.report = moment_and_tail_report(config, result.records);
  return result;
}

std::string trials_csv(std::span<const TrialRecord> records) {
  std::string out = "index,seed,delta,emp_mean,true_mean\n";
  for (const TrialRecord& rec : records) {
    out += std::to_string(rec.index);
    out += ',' + std::to_string(rec.seed);
    out += ',' + format_double(rec.delta);
    out += ',' + format_double(rec.empirical_mean);
    out += ',' + format_double(rec.true_mean);
    out += '\n';
  }
  return out;
}

}  // namespace stabilab
