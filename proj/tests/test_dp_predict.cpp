#include <cmath>

#include "doctest.h"
#include "stabilab/audit.hpp"
#include "stabilab/bounds.hpp"
#include "stabilab/dp_predict.hpp"
#include "stabilab/harness.hpp"

using namespace stabilab;

namespace {

Point labeled_scalar(double x, int y) {
  Eigen::VectorXd v(1);
  v << x;
  return Point::labeled(v, y);
}

Dataset toy_labeled() {
  return Dataset({labeled_scalar(-0.8, 0), labeled_scalar(-0.2, 0),
                  labeled_scalar(0.3, 1), labeled_scalar(0.9, 1)});
}

Eigen::VectorXd query(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("dp_predict");

TEST_CASE("base predictors") {
  const auto one_nn = make_base_predictor("one_nn");
  const auto threshold = make_base_predictor("threshold");
  const Dataset s = toy_labeled();

  CHECK(one_nn(s, query(-0.9)) == 0);
  CHECK(one_nn(s, query(0.85)) == 1);
  CHECK(threshold(s, query(-0.9)) == 0);
  CHECK(threshold(s, query(0.5)) == 1);

  SUBCASE("nearest-neighbor ties resolve to the lower index") {
    const Dataset tied({labeled_scalar(-0.5, 1), labeled_scalar(0.5, 0)});
    CHECK(one_nn(tied, query(0.0)) == 1);
  }
  SUBCASE("threshold learns noisy threshold data well") {
    const auto dist =
        make_distribution(LabeledThresholdSpec{.k = 6, .noise = 0.05});
    Rng rng(19);
    const Dataset sample = dist.sample_dataset(60, rng);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < dist.support_size(); ++i)
      if (threshold(sample, dist.support()[i].x()) != dist.support()[i].y())
        ++errors;
    // misclassifies only the flipped copies: half the support points
    CHECK(errors <= dist.support_size() / 2);
  }
  SUBCASE("unknown preset ids fail") {
    CHECK_THROWS_AS(make_base_predictor("forest"), std::invalid_argument);
  }
}

TEST_CASE("randomized response prediction") {
  const RRPredictor rr(make_base_predictor("one_nn"), std::log(3.0));
  const Dataset s = toy_labeled();
  CHECK(rr.flip_probability == doctest::Approx(0.25).epsilon(1e-12));

  SUBCASE("eps -> infinity returns the base prediction surely") {
    const RRPredictor sharp(make_base_predictor("one_nn"), 40.0);
    for (std::uint64_t seed = 0; seed < 200; ++seed)
      CHECK(rr_predict(sharp, s, query(0.9), seed) == 1);
  }
  SUBCASE("eps = 0 is a fair coin") {
    const RRPredictor coin(make_base_predictor("one_nn"), 0.0);
    CHECK(coin.flip_probability == doctest::Approx(0.5).epsilon(1e-12));
    int ones = 0;
    for (std::uint64_t seed = 0; seed < 4000; ++seed)
      ones += rr_predict(coin, s, query(0.9), seed);
    CHECK(std::abs(ones / 4000.0 - 0.5) < 0.03);
  }
  SUBCASE("output distributions of neighboring datasets stay within e^eps") {
    // the output law is {q, 1-q} with q in {flip, 1-flip}; the worst ratio
    // between neighboring datasets is (1-flip)/flip = e^eps
    const double worst = (1.0 - rr.flip_probability) / rr.flip_probability;
    CHECK(worst == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(worst <= std::exp(rr.eps) + 1e-12);
  }
  SUBCASE("sampled losses agree with the closed-form expectation") {
    const auto stat = rr_loss_statistic(rr);
    const Point z = labeled_scalar(0.9, 1);
    const double expected = stat(s, z);  // base correct: flip probability
    CHECK(expected == doctest::Approx(0.25).epsilon(1e-12));
    const std::size_t trials = 20000;
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < trials; ++seed)
      sum += rr_predict(rr, s, z.x(), mix64(4242, seed)) != z.y() ? 1.0 : 0.0;
    const double freq = sum / trials;
    const double se = std::sqrt(expected * (1 - expected) / trials);
    CHECK(std::abs(freq - expected) <= 3.0 * se);
  }
}

TEST_CASE("rr loss statistic closed form") {
  const double eps = std::log(3.0);
  const RRPredictor rr(make_base_predictor("one_nn"), eps);
  const auto stat = rr_loss_statistic(rr);
  const Dataset s = toy_labeled();

  // base correct at 0.9/1, wrong at 0.9/0
  CHECK(stat(s, labeled_scalar(0.9, 1)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(stat(s, labeled_scalar(0.9, 0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(stat.declared_gamma(100) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("range stays inside [flip, 1-flip]") {
    Rng rng(23);
    const auto dist = make_distribution(LabeledThresholdSpec{.k = 4, .noise = 0.2});
    for (int rep = 0; rep < 100; ++rep) {
      const Dataset sample = dist.sample_dataset(8, rng);
      const double v = stat(sample, dist.support()[rng.below(8)]);
      CHECK(v >= 0.25 - 1e-12);
      CHECK(v <= 0.75 + 1e-12);
    }
  }
}

TEST_CASE("privacy confers stability on an unstable base") {
  const auto dist = make_distribution(LabeledThresholdSpec{.k = 1, .noise = 0.3});
  REQUIRE(dist.support_size() == 2);

  AuditOptions opts;  // space 2^(n+2) n is tiny, so both audits are exhaustive
  const auto base_stat = base_loss_statistic(make_base_predictor("one_nn"));
  const auto base_report = audit_stability(base_stat, dist, 4, opts);
  CHECK(base_report.exhaustive);
  CHECK(base_report.gamma_observed == doctest::Approx(1.0).epsilon(1e-12));

  const double eps = 0.5;
  const RRPredictor rr(make_base_predictor("one_nn"), eps);
  const auto rr_report = audit_stability(rr_loss_statistic(rr), dist, 4, opts);
  const double gamma = (std::exp(eps) - 1.0) / (std::exp(eps) + 1.0);
  CHECK(rr_report.exhaustive);
  CHECK(rr_report.gamma_observed <= gamma + 1e-9);
  CHECK(rr_report.gamma_observed == doctest::Approx(gamma).epsilon(1e-9));
  CHECK(gamma == doctest::Approx(0.24491866240370913).epsilon(1e-12));
}

TEST_CASE("thm5 report delegates to the bound catalog") {
  SUBCASE("eps = 0 collapses to the gamma = 0 bounds") {
    const auto [second_moment, tail] = thm5_report(0.0, 50, 0.1);
    CHECK(second_moment == doctest::Approx(2.0 / 50.0).epsilon(1e-12));
    CHECK(tail ==
          doctest::Approx(8.0 * std::sqrt(std::log(80.0) / 50.0)).epsilon(1e-12));
  }
  SUBCASE("eps = 0.1, n = 400") {
    const auto [second_moment, tail] = thm5_report(0.1, 400, 0.1);
    CHECK(second_moment == doctest::Approx(0.18197475214199366).epsilon(1e-12));
    BoundInputs in;
    in.eps = 0.1;
    in.n = 400;
    in.delta = 0.1;
    CHECK(second_moment == evaluate_bound(BoundId::thm5_var, in));
    CHECK(tail == evaluate_bound(BoundId::thm5_hp, in));
  }
}

TEST_SUITE_END();
