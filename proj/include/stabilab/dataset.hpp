#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "stabilab/random.hpp"

namespace stabilab {

enum class PointKind { vector, labeled };

std::string to_string(PointKind kind);
PointKind point_kind_from_string(const std::string& s);

// A domain point: either a plain vector in the unit Euclidean ball, or a
// labeled example (x in the unit ball, y in {0,1}).
class Point {
 public:
  static Point vector(Eigen::VectorXd x);
  static Point labeled(Eigen::VectorXd x, int y);
  // 1-d vector point, for scalar domains.
  static Point scalar(double v);

  PointKind kind() const { return kind_; }
  const Eigen::VectorXd& x() const { return x_; }
  std::size_t dim() const { return static_cast<std::size_t>(x_.size()); }
  int y() const;  // throws for vector points
  // First coordinate, the scalar view used by synthetic statistics.
  double x0() const { return x_[0]; }

  bool operator==(const Point& other) const;
  bool operator!=(const Point& other) const { return !(*this == other); }

 private:
  Point(PointKind kind, Eigen::VectorXd x, int y);

  PointKind kind_;
  Eigen::VectorXd x_;
  int y_;
};

// An ordered n-tuple of points of a single kind. Immutable value type:
// replace() returns a fresh dataset.
class Dataset {
 public:
  explicit Dataset(std::vector<Point> points);

  std::size_t size() const { return points_.size(); }
  PointKind kind() const { return points_.front().kind(); }
  std::size_t dim() const { return points_.front().dim(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  // Copy of this dataset with position i set to z.
  Dataset replace(std::size_t i, Point z) const;

  bool operator==(const Dataset& other) const;
  bool operator!=(const Dataset& other) const { return !(*this == other); }

 private:
  std::vector<Point> points_;
};

// Finite-support probability distribution over the domain. True means are
// exact weighted sums over the support.
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<Point> support, std::vector<double> weights);

  static FiniteDistribution uniform(std::vector<Point> support);

  std::size_t support_size() const { return support_.size(); }
  PointKind kind() const { return support_.front().kind(); }
  std::size_t dim() const { return support_.front().dim(); }
  const std::vector<Point>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  // Inverse-CDF draw: returns the first support index i with u < cum[i].
  const Point& sample(Rng& rng) const;
  std::size_t sample_index(Rng& rng) const;
  Dataset sample_dataset(std::size_t n, Rng& rng) const;

 private:
  std::vector<Point> support_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// JSON document shapes:
//   point: [x...] for vector kind, {"x":[...], "y":0|1} for labeled kind
//   dataset: {"kind","dim","points"}
//   distribution: {"kind","dim","points","weights"}
nlohmann::json point_to_json(const Point& p);
Point point_from_json(const nlohmann::json& j, PointKind kind);
void to_json(nlohmann::json& j, const Dataset& s);
void to_json(nlohmann::json& j, const FiniteDistribution& d);
Dataset dataset_from_json(const nlohmann::json& j);
FiniteDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace stabilab
