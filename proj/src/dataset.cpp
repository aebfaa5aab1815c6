#include "stabilab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace stabilab {

namespace {
constexpr double kNormSlack = 1e-9;
constexpr double kWeightTol = 1e-12;
}  // namespace

std::string to_string(PointKind kind) {
  return kind == PointKind::vector ? "vector" : "labeled";
}

PointKind point_kind_from_string(const std::string& s) {
  if (s == "vector") return PointKind::vector;
  if (s == "labeled") return PointKind::labeled;
  throw std::invalid_argument("unknown point kind: " + s);
}

Point::Point(PointKind kind, Eigen::VectorXd x, int y)
    : kind_(kind), x_(std::move(x)), y_(y) {
  if (x_.size() == 0) throw std::invalid_argument("point must have dimension >= 1");
  if (x_.norm() > 1.0 + kNormSlack)
    throw std::invalid_argument("point norm exceeds 1");
}

Point Point::vector(Eigen::VectorXd x) {
  return Point(PointKind::vector, std::move(x), -1);
}

Point Point::labeled(Eigen::VectorXd x, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
  return Point(PointKind::labeled, std::move(x), y);
}

Point Point::scalar(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return Point::vector(std::move(x));
}

int Point::y() const {
  if (kind_ != PointKind::labeled)
    throw std::logic_error("label requested from a vector point");
  return y_;
}

bool Point::operator==(const Point& other) const {
  if (kind_ != other.kind_ || x_.size() != other.x_.size()) return false;
  if (kind_ == PointKind::labeled && y_ != other.y_) return false;
  return (x_.array() == other.x_.array()).all();
}

Dataset::Dataset(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("dataset must be nonempty");
  const PointKind kind = points_.front().kind();
  const std::size_t dim = points_.front().dim();
  for (const Point& p : points_) {
    if (p.kind() != kind) throw std::invalid_argument("mixed point kinds in dataset");
    if (p.dim() != dim) throw std::invalid_argument("mixed dimensions in dataset");
  }
}

Dataset Dataset::replace(std::size_t i, Point z) const {
  if (i >= points_.size()) throw std::out_of_range("replace index out of range");
  if (z.kind() != kind() || z.dim() != dim())
    throw std::invalid_argument("replacement point kind/dimension mismatch");
  std::vector<Point> copy = points_;
  copy[i] = std::move(z);
  return Dataset(std::move(copy));
}

bool Dataset::operator==(const Dataset& other) const {
  return points_ == other.points_;
}

FiniteDistribution::FiniteDistribution(std::vector<Point> support,
                                       std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty()) throw std::invalid_argument("empty support");
  if (support_.size() != weights_.size())
    throw std::invalid_argument("support/weights size mismatch");
  const PointKind kind = support_.front().kind();
  const std::size_t dim = support_.front().dim();
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i].kind() != kind || support_[i].dim() != dim)
      throw std::invalid_argument("mixed point kinds in support");
    if (weights_[i] < 0.0) throw std::invalid_argument("negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > kWeightTol)
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
  for (std::size_t i = 0; i < support_.size(); ++i)
    for (std::size_t j = i + 1; j < support_.size(); ++j)
      if (support_[i] == support_[j])
        throw std::invalid_argument("support points must be pairwise distinct");
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc += weights_[i];
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;
}

FiniteDistribution FiniteDistribution::uniform(std::vector<Point> support) {
  std::vector<double> w(support.size(), 1.0 / static_cast<double>(support.size()));
  return FiniteDistribution(std::move(support), std::move(w));
}

std::size_t FiniteDistribution::sample_index(Rng& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  return i < support_.size() ? i : support_.size() - 1;
}

const Point& FiniteDistribution::sample(Rng& rng) const {
  return support_[sample_index(rng)];
}

Dataset FiniteDistribution::sample_dataset(std::size_t n, Rng& rng) const {
  std::vector<Point> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(sample(rng));
  return Dataset(std::move(points));
}

nlohmann::json point_to_json(const Point& p) {
  std::vector<double> coords(p.x().data(), p.x().data() + p.x().size());
  if (p.kind() == PointKind::vector) return nlohmann::json(coords);
  return nlohmann::json{{"x", coords}, {"y", p.y()}};
}

Point point_from_json(const nlohmann::json& j, PointKind kind) {
  if (kind == PointKind::vector) {
    const auto coords = j.get<std::vector<double>>();
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
        coords.data(), static_cast<Eigen::Index>(coords.size()));
    return Point::vector(std::move(x));
  }
  const auto coords = j.at("x").get<std::vector<double>>();
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      coords.data(), static_cast<Eigen::Index>(coords.size()));
  return Point::labeled(std::move(x), j.at("y").get<int>());
}

void to_json(nlohmann::json& j, const Dataset& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const Point& p : s.points()) points.push_back(point_to_json(p));
  j = nlohmann::json{
      {"kind", to_string(s.kind())}, {"dim", s.dim()}, {"points", points}};
}

void to_json(nlohmann::json& j, const FiniteDistribution& d) {
  nlohmann::json points = nlohmann::json::array();
  for (const Point& p : d.support()) points.push_back(point_to_json(p));
  j = nlohmann::json{{"kind", to_string(d.kind())},
                     {"dim", d.dim()},
                     {"points", points},
                     {"weights", d.weights()}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  const PointKind kind = point_kind_from_string(j.at("kind").get<std::string>());
  std::vector<Point> points;
  for (const auto& pj : j.at("points")) points.push_back(point_from_json(pj, kind));
  return Dataset(std::move(points));
}

FiniteDistribution distribution_from_json(const nlohmann::json& j) {
  const PointKind kind = point_kind_from_string(j.at("kind").get<std::string>());
  std::vector<Point> points;
  for (const auto& pj : j.at("points")) points.push_back(point_from_json(pj, kind));
  return FiniteDistribution(std::move(points),
                            j.at("weights").get<std::vector<double>>());
}

}  // namespace stabilab
