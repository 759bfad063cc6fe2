#ifndef FPTEST_SPACE_HPP
#define FPTEST_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fptest/point.hpp"
#include "fptest/rational.hpp"

namespace fptest {

class SampleSpace;
using SpacePtr = std::shared_ptr<const SampleSpace>;

/// A metric sample space: finite discrete (labelled points with a distance
/// table), a sub-interval of the real line with rational endpoints (or the
/// whole line), or a finite product with the sum metric.
class SampleSpace {
 public:
  enum class Kind { Discrete, Real, Product };

  static SpacePtr discrete(std::vector<std::string> labels,
                           std::vector<std::vector<double>> dist) {
    auto s = std::make_shared<SampleSpace>(Private{});
    s->kind_ = Kind::Discrete;
    s->labels_ = std::move(labels);
    s->dist_ = std::move(dist);
    s->check_metric();
    return s;
  }

  /// Uniform discrete metric: d(x,y) = d01 for x != y.
  static SpacePtr discrete_uniform(std::vector<std::string> labels, double d01 = 1.0) {
    size_t m = labels.size();
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, d01));
    for (size_t i = 0; i < m; ++i) dist[i][i] = 0.0;
    return discrete(std::move(labels), std::move(dist));
  }

  /// The two-point coin space {0,1}; houses Bernoulli measures.
  static SpacePtr coin(double d01 = 1.0) { return discrete_uniform({"0", "1"}, d01); }

  /// Real interval [lo, hi]; pass nullopt for an unbounded side.
  static SpacePtr real_interval(std::optional<Rat> lo, std::optional<Rat> hi) {
    if (lo && hi && *lo > *hi) throw std::invalid_argument("empty ambient interval");
    auto s = std::make_shared<SampleSpace>(Private{});
    s->kind_ = Kind::Real;
    s->lo_ = std::move(lo);
    s->hi_ = std::move(hi);
    return s;
  }

  static SpacePtr unit_interval() { return real_interval(rat(0), rat(1)); }
  static SpacePtr real_line() { return real_interval(std::nullopt, std::nullopt); }

  static SpacePtr product(std::vector<SpacePtr> components) {
    if (components.empty()) throw std::invalid_argument("empty product space");
    auto s = std::make_shared<SampleSpace>(Private{});
    s->kind_ = Kind::Product;
    s->components_ = std::move(components);
    return s;
  }

  Kind kind() const { return kind_; }
  bool is_discrete() const { return kind_ == Kind::Discrete; }
  bool is_real() const { return kind_ == Kind::Real; }
  bool is_product() const { return kind_ == Kind::Product; }

  size_t point_count() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<Rat>& lower() const { return lo_; }
  const std::optional<Rat>& upper() const { return hi_; }
  const std::vector<SpacePtr>& components() const { return components_; }

  double dist(const Point& a, const Point& b) const {
    switch (kind_) {
      case Kind::Discrete:
        return dist_[check_index(a)][check_index(b)];
      case Kind::Real:
        return std::abs(a.real() - b.real());
      case Kind::Product: {
        const Tuple& ta = a.tuple();
        const Tuple& tb = b.tuple();
        if (ta.size() != components_.size() || tb.size() != components_.size())
          throw std::invalid_argument("tuple arity does not match product space");
        double d = 0;
        for (size_t i = 0; i < components_.size(); ++i) d += components_[i]->dist(ta[i], tb[i]);
        return d;
      }
    }
    return 0;
  }

  bool contains(const Point& p) const {
    switch (kind_) {
      case Kind::Discrete:
        return p.is_discrete() && p.index() >= 0 && size_t(p.index()) < labels_.size();
      case Kind::Real: {
        if (!p.is_real() || !std::isfinite(p.real())) return false;
        if (lo_ && cmp_double_rat(p.real(), *lo_) < 0) return false;
        if (hi_ && cmp_double_rat(p.real(), *hi_) > 0) return false;
        return true;
      }
      case Kind::Product: {
        if (!p.is_tuple() || p.tuple().size() != components_.size()) return false;
        for (size_t i = 0; i < components_.size(); ++i)
          if (!components_[i]->contains(p.tuple()[i])) return false;
        return true;
      }
    }
    return false;
  }

  /// Smallest nonzero pairwise distance; infinity for real spaces (and for
  /// products it is the min over discrete components, or infinity).
  double min_positive_dist() const {
    switch (kind_) {
      case Kind::Discrete: {
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < dist_.size(); ++i)
          for (size_t j = i + 1; j < dist_.size(); ++j) m = std::min(m, dist_[i][j]);
        return m;
      }
      case Kind::Real:
        return std::numeric_limits<double>::infinity();
      case Kind::Product: {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : components_) m = std::min(m, c->min_positive_dist());
        return m;
      }
    }
    return 0;
  }

  bool same_as(const SampleSpace& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
      case Kind::Discrete:
        return labels_ == other.labels_ && dist_ == other.dist_;
      case Kind::Real:
        return lo_ == other.lo_ && hi_ == other.hi_;
      case Kind::Product: {
        if (components_.size() != other.components_.size()) return false;
        for (size_t i = 0; i < components_.size(); ++i)
          if (!components_[i]->same_as(*other.components_[i])) return false;
        return true;
      }
    }
    return false;
  }

  struct Private {};
  explicit SampleSpace(Private) {}

 private:
  int check_index(const Point& p) const {
    if (!p.is_discrete() || p.index() < 0 || size_t(p.index()) >= labels_.size())
      throw std::invalid_argument("point not in discrete space");
    return p.index();
  }

  void check_metric() const {
    size_t m = labels_.size();
    if (dist_.size() != m) throw std::invalid_argument("distance table size mismatch");
    for (size_t i = 0; i < m; ++i) {
      if (dist_[i].size() != m) throw std::invalid_argument("distance table not square");
      if (dist_[i][i] != 0.0) throw std::invalid_argument("d(x,x) must be 0");
      for (size_t j = 0; j < m; ++j) {
        if (dist_[i][j] < 0) throw std::invalid_argument("negative distance");
        if (i != j && dist_[i][j] == 0.0)
          throw std::invalid_argument("distinct points at distance 0");
        if (dist_[i][j] != dist_[j][i]) throw std::invalid_argument("distance table not symmetric");
        for (size_t k = 0; k < m; ++k)
          if (dist_[i][j] > dist_[i][k] + dist_[k][j] + 1e-15 * (dist_[i][k] + dist_[k][j]))
            throw std::invalid_argument("triangle inequality violated");
      }
    }
  }

  Kind kind_ = Kind::Discrete;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> dist_;
  std::optional<Rat> lo_, hi_;
  std::vector<SpacePtr> components_;
};

inline void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (!a || !b || !a->same_as(*b))
    throw std::invalid_argument(std::string("space mismatch in ") + what);
}

}  // namespace fptest

#endif  // FPTEST_SPACE_HPP
