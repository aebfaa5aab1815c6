#include <Eigen/Core>
#include <initializer_list>
#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "stabilab/dataset.hpp"

using namespace stabilab;

namespace {

Dataset scalar_dataset(std::initializer_list<double> values) {
  std::vector<Point> points;
  for (double v : values) points.push_back(Point::scalar(v));
  return Dataset(std::move(points));
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("point norm constraint is enforced on construction") {
  CHECK_NOTHROW(Point::scalar(1.0));
  CHECK_NOTHROW(Point::scalar(-1.0));
  CHECK_THROWS_AS(Point::scalar(1.5), std::invalid_argument);
  Eigen::VectorXd big(2);
  big << 0.9, 0.9;
  CHECK_THROWS_AS(Point::vector(big), std::invalid_argument);
  CHECK_THROWS_AS(Point::labeled(big, 1), std::invalid_argument);
}

TEST_CASE("label accessor and validation") {
  Eigen::VectorXd x(1);
  x << 0.5;
  CHECK(Point::labeled(x, 1).y() == 1);
  CHECK_THROWS_AS(Point::labeled(x, 2), std::invalid_argument);
  CHECK_THROWS_AS(Point::scalar(0.5).y(), std::logic_error);
}

TEST_CASE("datasets are nonempty and kind-uniform") {
  CHECK_THROWS_AS(Dataset({}), std::invalid_argument);
  Eigen::VectorXd x(1);
  x << 0.5;
  std::vector<Point> mixed = {Point::scalar(0.1), Point::labeled(x, 0)};
  CHECK_THROWS_AS(Dataset(std::move(mixed)), std::invalid_argument);
}

TEST_CASE("replace returns the modified copy and leaves the source alone") {
  const Dataset s = scalar_dataset({0.1, 0.2, 0.3});
  const Dataset replaced = s.replace(1, Point::scalar(0.9));
  CHECK(replaced[0] == Point::scalar(0.1));
  CHECK(replaced[1] == Point::scalar(0.9));
  CHECK(replaced[2] == Point::scalar(0.3));
  CHECK(s[1] == Point::scalar(0.2));

  SUBCASE("replacing with the current element is the identity") {
    CHECK(s.replace(1, Point::scalar(0.2)) == s);
  }
  SUBCASE("replacing back restores the original") {
    CHECK(replaced.replace(1, Point::scalar(0.2)) == s);
  }
  SUBCASE("index and kind violations are rejected") {
    CHECK_THROWS_AS(s.replace(3, Point::scalar(0.0)), std::out_of_range);
    Eigen::VectorXd x(1);
    x << 0.5;
    CHECK_THROWS_AS(s.replace(0, Point::labeled(x, 0)), std::invalid_argument);
  }
}

TEST_CASE("distribution invariants") {
  CHECK_THROWS_AS(FiniteDistribution({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      FiniteDistribution({Point::scalar(0.0), Point::scalar(1.0)}, {0.7, 0.5}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      FiniteDistribution({Point::scalar(0.0), Point::scalar(1.0)}, {-0.1, 1.1}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      FiniteDistribution({Point::scalar(0.3), Point::scalar(0.3)}, {0.5, 0.5}),
      std::invalid_argument);
  CHECK_NOTHROW(
      FiniteDistribution({Point::scalar(0.0), Point::scalar(1.0)}, {0.5, 0.5}));
}

TEST_CASE("sampling is deterministic per seed and hits stated frequencies") {
  const auto dist = FiniteDistribution({Point::scalar(0.0), Point::scalar(1.0)},
                                       {0.25, 0.75});
  Rng a(42), b(42);
  for (int i = 0; i < 200; ++i) CHECK(dist.sample(a) == dist.sample(b));

  Rng rng(7);
  int ones = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ones += dist.sample(rng) == Point::scalar(1.0);
  const double freq = static_cast<double>(ones) / draws;
  CHECK(freq == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("json round trip for datasets and distributions") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Point> support;
    std::vector<double> weights;
    const std::size_t k = 2 + rng.below(3);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      Eigen::VectorXd x(2);
      x << rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7) + 1e-3 * double(i);
      support.push_back(Point::labeled(x, static_cast<int>(rng.below(2))));
      const double w = 0.1 + rng.uniform01();
      weights.push_back(w);
      total += w;
    }
    for (double& w : weights) w /= total;
    {
      const double drift = 1.0 - std::accumulate(weights.begin(), weights.end(), 0.0);
      weights.back() += drift;
    }
    const FiniteDistribution dist(support, weights);
    const nlohmann::json j = dist;
    const FiniteDistribution back = distribution_from_json(j);
    REQUIRE(back.support_size() == dist.support_size());
    for (std::size_t i = 0; i < dist.support_size(); ++i) {
      CHECK(back.support()[i] == dist.support()[i]);
      CHECK(back.weight(i) == dist.weight(i));
    }

    Rng sample_rng(rep);
    const Dataset s = dist.sample_dataset(5, sample_rng);
    const nlohmann::json js = s;
    CHECK(dataset_from_json(js) == s);
    CHECK(js.at("kind") == "labeled");
    CHECK(js.at("dim") == 2);
  }
}

TEST_SUITE_END();
