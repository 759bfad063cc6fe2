#ifndef FPTEST_MEASURE_HPP
#define FPTEST_MEASURE_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fptest/open_set.hpp"
#include "fptest/point.hpp"
#include "fptest/rational.hpp"
#include "fptest/space.hpp"

namespace fptest {

/// Exact Bernoulli parameter a + b*sqrt(2); rationality questions about the
/// parameter are decidable, which floating point cannot offer.
struct BernParam {
  Rat a, b;

  double value() const { return rat_to_double(a) + rat_to_double(b) * std::sqrt(2.0); }

  /// Sign of (a + b*sqrt(2)) - c, computed exactly.
  int cmp_rat(const Rat& c) const {
    Rat s = a - c;
    if (b == 0) return sgn(s);
    if (sgn(s) == sgn(b) || sgn(s) == 0) return sgn(b);
    // opposite signs: compare s^2 against 2 b^2 (never equal for b != 0)
    Rat lhs = s * s, rhs = 2 * b * b;
    return lhs > rhs ? sgn(s) : sgn(b);
  }

  bool is_rational() const { return b == 0; }
};

class Sample;

/// A probability measure: finite-support (atoms + weights), Bernoulli on a
/// coin space, or a multivariate Gaussian. Weights are floating point with a
/// 1e-12 normalization tolerance; empirical measures also carry exact
/// rational weights.
class Measure {
 public:
  enum class Kind { FiniteSupport, Bernoulli, Gaussian };

  static Measure finite_support(SpacePtr space, std::vector<Point> atoms,
                                std::vector<double> weights,
                                std::optional<std::vector<Rat>> exact = std::nullopt) {
    if (atoms.empty() || atoms.size() != weights.size())
      throw std::invalid_argument("finite-support measure needs matching atoms and weights");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0)) throw std::invalid_argument("negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("weights do not sum to 1 within 1e-12");
    for (const Point& p : atoms)
      if (!space->contains(p)) throw std::invalid_argument("atom outside sample space");
    if (exact) {
      Rat s(0);
      for (const Rat& r : *exact) s += r;
      if (s != 1) throw std::invalid_argument("exact weights do not sum to 1");
    }
    Measure m;
    m.kind_ = Kind::FiniteSupport;
    m.space_ = std::move(space);
    m.atoms_ = std::move(atoms);
    m.weights_ = std::move(weights);
    m.exact_weights_ = std::move(exact);
    return m;
  }

  static Measure dirac(SpacePtr space, Point at) {
    return finite_support(std::move(space), {std::move(at)}, {1.0},
                          std::vector<Rat>{rat(1)});
  }

  static Measure bernoulli(double p, SpacePtr space = nullptr) {
    return bernoulli_token({rat_of_double(p), rat(0)}, std::move(space));
  }

  static Measure bernoulli_token(BernParam p, SpacePtr space = nullptr) {
    if (p.cmp_rat(rat(0)) < 0 || p.cmp_rat(rat(1)) > 0)
      throw std::invalid_argument("Bernoulli parameter outside [0,1]");
    Measure m;
    m.kind_ = Kind::Bernoulli;
    m.space_ = space ? std::move(space) : SampleSpace::coin();
    if (!m.space_->is_discrete() || m.space_->point_count() != 2)
      throw std::invalid_argument("Bernoulli measure needs a two-point space");
    m.bern_ = std::move(p);
    return m;
  }

  static Measure gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
      throw std::invalid_argument("covariance shape mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-12))
      throw std::invalid_argument("covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
      throw std::invalid_argument("covariance not positive semi-definite");
    Measure m;
    m.kind_ = Kind::Gaussian;
    std::vector<SpacePtr> comps(mean.size(), SampleSpace::real_line());
    m.space_ = mean.size() == 1 ? SampleSpace::real_line() : SampleSpace::product(comps);
    m.mean_ = std::move(mean);
    m.cov_ = std::move(cov);
    return m;
  }

  Kind kind() const { return kind_; }
  const SpacePtr& space() const { return space_; }

  const std::vector<Point>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::optional<std::vector<Rat>>& exact_weights() const { return exact_weights_; }

  double bern_p() const { return bern_->value(); }
  const BernParam& bern_param() const { return *bern_; }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  /// Finite-support view; Bernoulli converts to atoms {0,1}. Gaussians have
  /// none and are rejected.
  Measure as_finite_support() const {
    switch (kind_) {
      case Kind::FiniteSupport:
        return *this;
      case Kind::Bernoulli: {
        double p = bern_p();
        return finite_support(space_, {Point(0), Point(1)}, {1.0 - p, p});
      }
      case Kind::Gaussian:
        throw std::invalid_argument("Gaussian measure has no finite support");
    }
    throw std::logic_error("unreachable");
  }

  friend double measure_of_set(const Measure& P, const OpenSet& S);

 private:
  Kind kind_ = Kind::FiniteSupport;
  SpacePtr space_;
  std::vector<Point> atoms_;
  std::vector<double> weights_;
  std::optional<std::vector<Rat>> exact_weights_;
  std::optional<BernParam> bern_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// An ordered i.i.d. sample of points from one sample space.
class Sample {
 public:
  Sample(SpacePtr space, std::vector<Point> pts) : space_(std::move(space)), pts_(std::move(pts)) {
    for (const Point& p : pts_)
      if (!space_->contains(p)) throw std::invalid_argument("sample point outside space");
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<Point>& points() const { return pts_; }
  size_t size() const { return pts_.size(); }

 private:
  SpacePtr space_;
  std::vector<Point> pts_;
};

/// Empirical measure of a sample: weight multiplicity/n per distinct point,
/// with exact rational weights. Atom order is first occurrence.
inline Measure empirical_measure(const Sample& x) {
  if (x.size() == 0) throw std::invalid_argument("empirical measure of empty sample");
  std::vector<Point> atoms;
  std::vector<long> counts;
  std::unordered_map<Point, size_t, PointHash> index;
  for (const Point& p : x.points()) {
    auto [it, fresh] = index.try_emplace(p, atoms.size());
    if (fresh) {
      atoms.push_back(p);
      counts.push_back(0);
    }
    ++counts[it->second];
  }
  long n = long(x.size());
  std::vector<double> w(atoms.size());
  std::vector<Rat> ew(atoms.size());
  for (size_t i = 0; i < atoms.size(); ++i) {
    w[i] = double(counts[i]) / double(n);
    ew[i] = rat(counts[i], n);
  }
  // floating weights may miss 1 by rounding; renormalize against the exact ones
  double total = 0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return Measure::finite_support(x.space(), std::move(atoms), std::move(w), std::move(ew));
}

/// P(S) for finite-support or Bernoulli P. Atom membership uses exact
/// endpoint comparisons; the sum is exact when exact weights are present.
inline double measure_of_set(const Measure& P, const OpenSet& S) {
  require_same_space(P.space(), S.space(), "measure_of_set");
  if (P.kind() == Measure::Kind::Gaussian)
    throw std::invalid_argument("measure_of_set needs finite support");
  Measure fs = P.as_finite_support();
  if (fs.exact_weights()) {
    Rat total(0);
    for (size_t i = 0; i < fs.atoms().size(); ++i)
      if (S.contains(fs.atoms()[i])) total += (*fs.exact_weights())[i];
    return rat_to_double(total);
  }
  double total = 0;
  for (size_t i = 0; i < fs.atoms().size(); ++i)
    if (S.contains(fs.atoms()[i])) total += fs.weights()[i];
  return total;
}

}  // namespace fptest

#endif  // FPTEST_MEASURE_HPP
