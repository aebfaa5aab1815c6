#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "stabilab/harness.hpp"
#include "stabilab/stats_util.hpp"

using namespace stabilab;

namespace {

ExperimentConfig basic_config() {
  ExperimentConfig config;
  config.distribution = TwoPointSpec{0.5, 0.0, 1.0};
  config.statistic = IdentityStatSpec{};
  config.n = 50;
  config.trials = 400;
  config.seed = 2024;
  config.delta_grid = {0.5, 0.1};
  config.bounds = {BoundId::exp_e1, BoundId::var_e2, BoundId::var_e5,
                   BoundId::hp_e3, BoundId::hp_e6};
  config.beta_probes = 50;
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("mix64 is pinned") {
  // frozen values so the per-trial seed derivation can never drift silently
  CHECK(mix64(0, 0) == 16294208416658607535ULL);
  CHECK(mix64(1, 0) == 10451216379200822465ULL);
  CHECK(mix64(0, 1) == 7960286522194355700ULL);
  CHECK(mix64(0xdeadbeefULL, 42) == 2326200420768488734ULL);
  CHECK(mix64(20240901ULL, 9999) == 10197874183331785582ULL);
}

TEST_CASE("clopper-pearson intervals match reference values") {
  // reference numbers from an independent beta-quantile implementation
  const auto ci_0_100 = clopper_pearson(0, 100);
  CHECK(ci_0_100.low == 0.0);
  CHECK(ci_0_100.high == doctest::Approx(0.03621669264517641).epsilon(1e-9));
  const auto ci_1_10 = clopper_pearson(1, 10);
  CHECK(ci_1_10.low == doctest::Approx(0.0025285785444617848).epsilon(1e-9));
  CHECK(ci_1_10.high == doctest::Approx(0.4450161170281954).epsilon(1e-9));
  const auto ci_5_10 = clopper_pearson(5, 10);
  CHECK(ci_5_10.low == doctest::Approx(0.18708602844739855).epsilon(1e-9));
  CHECK(ci_5_10.high == doctest::Approx(0.8129139715526015).epsilon(1e-9));
  const auto ci_100_100 = clopper_pearson(100, 100);
  CHECK(ci_100_100.low == doctest::Approx(0.9637833073548235).epsilon(1e-9));
  CHECK(ci_100_100.high == 1.0);
  const auto ci_37_1000 = clopper_pearson(37, 1000);
  CHECK(ci_37_1000.low == doctest::Approx(0.02618270884373733).epsilon(1e-9));
  CHECK(ci_37_1000.high == doctest::Approx(0.05064112305992485).epsilon(1e-9));
  CHECK_THROWS_AS(clopper_pearson(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(5, 4), std::invalid_argument);
}

TEST_CASE("empirical quantile uses nearest rank") {
  const std::vector<double> sorted = {1.0, 2.0, 3.0, 4.0};
  CHECK(empirical_quantile(sorted, 0.0) == 1.0);
  CHECK(empirical_quantile(sorted, 0.5) == 2.0);
  CHECK(empirical_quantile(sorted, 0.51) == 3.0);
  CHECK(empirical_quantile(sorted, 1.0) == 4.0);
}

TEST_CASE("distribution presets") {
  SUBCASE("two_point puts weight p on z1") {
    const auto dist = make_distribution(TwoPointSpec{0.7, 0.0, 1.0});
    CHECK(dist.support_size() == 2);
    CHECK(dist.support()[0] == Point::scalar(0.0));
    CHECK(dist.support()[1] == Point::scalar(1.0));
    CHECK(dist.weight(0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(dist.weight(1) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK_THROWS_AS(make_distribution(TwoPointSpec{0.5, 0.3, 0.3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_distribution(TwoPointSpec{1.5, 0.0, 1.0}),
                    std::invalid_argument);
  }
  SUBCASE("uniform_grid(3,1) is {-1, 0, 1} at weight 1/3") {
    const auto dist = make_distribution(UniformGridSpec{3, 1});
    REQUIRE(dist.support_size() == 3);
    CHECK(dist.support()[0] == Point::scalar(-1.0));
    CHECK(dist.support()[1] == Point::scalar(0.0));
    CHECK(dist.support()[2] == Point::scalar(1.0));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(dist.weight(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("uniform_grid scales multi-dimensional points into the ball") {
    const auto dist = make_distribution(UniformGridSpec{3, 2});
    CHECK(dist.support_size() == 9);
    for (const Point& p : dist.support()) CHECK(p.x().norm() <= 1.0 + 1e-12);
  }
  SUBCASE("labeled_threshold has 2k support points and exact bayes error") {
    const auto dist = make_distribution(LabeledThresholdSpec{4, 0.1});
    REQUIRE(dist.support_size() == 8);
    // exact Bayes error: sum over x of min(P(y=0|x), P(y=1|x)) weighted by P(x)
    double bayes = 0.0;
    for (std::size_t i = 0; i < dist.support_size(); i += 2)
      bayes += std::min(dist.weight(i), dist.weight(i + 1));
    CHECK(bayes == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(make_distribution(LabeledThresholdSpec{4, 0.6}),
                    std::invalid_argument);
  }
  SUBCASE("spec json round trip") {
    const nlohmann::json j = {{"kind", "two_point"}, {"p", 0.25}, {"z0", -0.5},
                              {"z1", 0.5}};
    const auto spec = parse_distribution_spec(j);
    CHECK(distribution_spec_to_json(spec) == j);
    CHECK_THROWS_AS(parse_distribution_spec({{"kind", "gaussian"}}),
                    std::invalid_argument);
  }
}

TEST_CASE("statistic presets") {
  const auto dist = make_distribution(TwoPointSpec{0.5, 0.0, 1.0});
  SUBCASE("const") {
    const auto stat = make_statistic(ConstStatSpec{0.3}, dist);
    Rng rng(1);
    const Dataset s = dist.sample_dataset(5, rng);
    CHECK(stat(s, dist.support()[0]) == 0.3);
    CHECK(stat.declared_gamma(10) == 0.0);
    CHECK_THROWS_AS(make_statistic(ConstStatSpec{1.4}, dist),
                    std::invalid_argument);
  }
  SUBCASE("identity clamps the first coordinate") {
    const auto grid = make_distribution(UniformGridSpec{3, 1});
    const auto stat = make_statistic(IdentityStatSpec{}, grid);
    Rng rng(2);
    const Dataset s = grid.sample_dataset(3, rng);
    CHECK(stat(s, Point::scalar(-1.0)) == 0.0);
    CHECK(stat(s, Point::scalar(0.6)) == 0.6);
  }
  SUBCASE("kind mismatches are rejected") {
    CHECK_THROWS_AS(make_statistic(RrStatSpec{"one_nn", 0.5}, dist),
                    std::invalid_argument);
    const auto labeled = make_distribution(LabeledThresholdSpec{2, 0.1});
    CHECK_THROWS_AS(make_statistic(ErmStatSpec{"quadratic", 0.1}, labeled),
                    std::invalid_argument);
  }
  SUBCASE("spec json round trip") {
    const nlohmann::json j = {{"kind", "erm"}, {"family", "quadratic"},
                              {"lambda", 0.4}};
    const auto spec = parse_statistic_spec(j);
    CHECK(statistic_spec_to_json(spec) == j);
    CHECK(!statistic_eps(spec).has_value());
    CHECK(statistic_eps(RrStatSpec{"one_nn", 0.7}).value() == 0.7);
  }
}

TEST_CASE("config parsing and validation") {
  nlohmann::json j = {
      {"distribution", {{"kind", "two_point"}, {"p", 0.5}, {"z0", 0.0}, {"z1", 1.0}}},
      {"statistic", {{"kind", "identity"}}},
      {"n", 20},
      {"trials", 200},
      {"seed", 7}};
  CHECK_NOTHROW(config_from_json(j));

  nlohmann::json too_few = j;
  too_few["trials"] = 50;
  CHECK_THROWS_AS(config_from_json(too_few), std::invalid_argument);

  nlohmann::json bad_delta = j;
  bad_delta["delta_grid"] = {0.5, 1.2};
  CHECK_THROWS_AS(config_from_json(bad_delta), std::invalid_argument);

  nlohmann::json bad_bound = j;
  bad_bound["bounds"] = {"cor2"};
  CHECK_THROWS_AS(config_from_json(bad_bound), std::invalid_argument);

  nlohmann::json thm5_without_rr = j;
  thm5_without_rr["bounds"] = {"thm5_var"};
  CHECK_THROWS_AS(config_from_json(thm5_without_rr), std::invalid_argument);

  const auto config = config_from_json(j);
  const auto round = config_to_json(config);
  CHECK(round.at("n") == 20);
  CHECK(round.at("beta_probes") == 200);
  CHECK(config_to_json(config_from_json(round)) == round);
}

TEST_CASE("trials are deterministic and worker-count independent") {
  ExperimentConfig config = basic_config();
  const auto once = run_trials(config);
  const auto twice = run_trials(config);
  ExperimentConfig parallel = config;
  parallel.workers = 4;
  const auto threaded = run_trials(parallel);

  REQUIRE(once.size() == config.trials);
  for (std::size_t t = 0; t < once.size(); ++t) {
    CHECK(once[t].seed == mix64(config.seed, t));
    CHECK(once[t].delta == twice[t].delta);
    CHECK(once[t].delta == threaded[t].delta);
    CHECK(once[t].empirical_mean == threaded[t].empirical_mean);
    CHECK(!once[t].error.has_value());
    // identity statistic: delta = E[z] - mean(s), and the record stores both
    CHECK(std::abs(once[t].delta - (once[t].true_mean - once[t].empirical_mean)) <=
          1e-12);
    CHECK(once[t].true_mean == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(trials_csv(once) == trials_csv(twice));
  CHECK(trials_csv(once) == trials_csv(threaded));
  CHECK(trials_csv(once).rfind("index,seed,delta,emp_mean,true_mean\n", 0) == 0);
}

TEST_CASE("identity statistic delta matches binomial variance arithmetic") {
  ExperimentConfig config = basic_config();
  config.trials = 4000;
  config.n = 25;
  const auto records = run_trials(config);
  const auto report = moment_and_tail_report(config, records);
  // Var(mean) = p(1-p)/n = 0.25/25 = 0.01 exactly
  CHECK(report.mean_delta_sq == doctest::Approx(0.01).epsilon(0.15));
  CHECK(std::abs(report.mean_delta) <= 3.0 * report.se_delta);
  CHECK(report.all_pass);
}

TEST_CASE("constant statistics pass every check with zero deltas") {
  ExperimentConfig config = basic_config();
  config.statistic = ConstStatSpec{0.4};
  config.trials = 150;
  const auto result = run_sweep(config);
  CHECK(result.report.mean_delta == 0.0);
  CHECK(result.report.mean_delta_sq == 0.0);
  CHECK(result.report.all_pass);
  REQUIRE(result.report.beta.has_value());
  CHECK(result.report.beta->estimate == 0.0);
}

TEST_CASE("statistic failures mark trials but not the sweep") {
  ExperimentConfig config = basic_config();
  const auto dist = make_distribution(config.distribution);
  const StableStatistic flaky(
      "flaky",
      [](const Dataset& s, const Point& z) -> double {
        if (s[0] == Point::scalar(1.0)) throw std::runtime_error("solver blew up");
        return z.x0();
      },
      0.0);
  const auto records = run_trials(flaky, dist, 8, 200, 99);
  std::size_t failed = 0;
  for (const auto& rec : records) failed += rec.error.has_value();
  REQUIRE(failed > 0);
  REQUIRE(failed < records.size());

  const auto report = moment_and_tail_report(config, records);
  CHECK(report.trials_failed == failed);
  CHECK(report.trials_ok == records.size() - failed);
  CHECK(!report.all_pass);
  CHECK(report.errors.size() == failed);
  CHECK(report.errors[0].find("solver blew up") != std::string::npos);

  // failed rows still serialize, as nan placeholders
  const std::string csv = trials_csv(records);
  CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("erm sweep second moment obeys both variance bounds") {
  ExperimentConfig config = basic_config();
  config.statistic = ErmStatSpec{"quadratic", 0.4};
  config.n = 100;
  config.trials = 1000;
  config.beta_probes = 100;
  const auto result = run_sweep(config);
  const auto& report = result.report;
  CHECK(report.gamma == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(report.all_pass);

  bool saw_var_e5 = false;
  for (const auto& check : report.checks) {
    if (check.name == "var_e5") {
      saw_var_e5 = true;
      CHECK(check.value == doctest::Approx(0.18).epsilon(1e-12));
      CHECK(check.statistic < check.value);
      CHECK(!check.vacuous);
    }
    if (check.name == "hp_e6@delta=0.5")
      CHECK(check.vacuous);  // 8 sqrt(0.21 ln 16) is far above one
  }
  CHECK(saw_var_e5);
  REQUIRE(report.beta.has_value());
  CHECK(report.beta->pass);
  CHECK(report.beta->bound == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("mean delta squared matches an independent reimplementation") {
  // pipeline under test
  ExperimentConfig config = basic_config();
  config.statistic = ErmStatSpec{"quadratic", 0.4};
  config.n = 60;
  config.trials = 10000;
  config.beta_probes = 0;
  const auto records = run_trials(config);
  const auto report = moment_and_tail_report(config, records);

  // test-local oracle: plain loops, closed-form minimizer, fresh seeds
  const double lambda = 0.4;
  const double p = 0.5, z0 = 0.0, z1 = 1.0;
  double sum_sq = 0.0;
  const std::size_t trials = 10000;
  std::vector<double> sq(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(mix64(777000 + t, 0));
    double sum = 0.0;
    std::vector<double> zs(config.n);
    for (auto& z : zs) {
      z = rng.uniform01() < p ? z1 : z0;
      sum += z;
    }
    const double w = (sum / config.n) / (1.0 + 2.0 * lambda);
    auto loss = [w](double z) { return 0.25 * (w - z) * (w - z); };
    double emp = 0.0;
    for (double z : zs) emp += loss(z);
    emp /= config.n;
    const double truth = (1.0 - p) * loss(z0) + p * loss(z1);
    const double delta = truth - emp;
    sq[t] = delta * delta;
    sum_sq += sq[t];
  }
  const auto oracle = sample_moments(sq);
  const double combined_se = std::sqrt(
      oracle.std_error * oracle.std_error + report.se_delta_sq * report.se_delta_sq);
  CHECK(std::abs(report.mean_delta_sq - oracle.mean) <= 2.0 * combined_se);
}

TEST_CASE("delta sensitivity audit") {
  SUBCASE("constants have zero beta") {
    ExperimentConfig config = basic_config();
    config.statistic = ConstStatSpec{0.9};
    const auto beta = delta_sensitivity_audit(config, 50);
    CHECK(beta.estimate == 0.0);
    CHECK(beta.pass);
  }
  SUBCASE("identity at n=4 over {0,1} hits 1/4 exactly under exhaustion") {
    ExperimentConfig config = basic_config();
    config.n = 4;
    const auto beta = delta_sensitivity_audit(config, 10);
    CHECK(beta.exhaustive);
    CHECK(beta.estimate == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(beta.pass);  // bound 2*0 + 1/4
  }
  SUBCASE("erm stays under 2 gamma + 1/n") {
    ExperimentConfig config = basic_config();
    config.statistic = ErmStatSpec{"quadratic", 0.5};
    config.n = 30;
    const auto beta = delta_sensitivity_audit(config, 200);
    CHECK(!beta.exhaustive);
    CHECK(beta.estimate <= beta.bound + 1e-9);
  }
}

TEST_CASE("sweep report serializes with stable shape") {
  ExperimentConfig config = basic_config();
  config.trials = 120;
  config.beta_probes = 20;
  const auto result = run_sweep(config);
  const nlohmann::json j = result.report;
  CHECK(j.at("kind") == "sweep_report");
  CHECK(j.at("config").at("statistic").at("kind") == "identity");
  CHECK(j.at("checks").is_array());
  CHECK(j.at("quantiles").size() == config.delta_grid.size());
  CHECK(j.at("beta").is_object());
  const std::string dumped = j.dump(2);
  CHECK(nlohmann::json(result.report).dump(2) == dumped);
}

TEST_SUITE_END();
