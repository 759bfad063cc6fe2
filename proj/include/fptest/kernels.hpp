#ifndef FPTEST_KERNELS_HPP
#define FPTEST_KERNELS_HPP

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fptest/bl_metric.hpp"
#include "fptest/fp_tests.hpp"
#include "fptest/measure.hpp"

namespace fptest {

/// Markov kernel: a map from conditioning points to probability measures.
/// Either a finite table (z -> finite-support measure) or a Gaussian-linear
/// rule z -> N(intercept + B z, cond_cov). May carry a declared Lipschitz
/// bound w.r.t. (d_Z, d_BL).
class MarkovKernel {
 public:
  enum class Kind { Table, GaussianLinear };

  static MarkovKernel table(SpacePtr z_space, SpacePtr x_space,
                            std::vector<std::pair<Point, Measure>> entries,
                            std::optional<double> lipschitz = std::nullopt) {
    MarkovKernel k;
    k.kind_ = Kind::Table;
    k.z_space_ = std::move(z_space);
    k.x_space_ = std::move(x_space);
    for (auto& [z, m] : entries) {
      if (!k.z_space_->contains(z))
        throw std::invalid_argument("kernel conditioning point outside its space");
      require_same_space(m.space(), k.x_space_, "kernel table entry");
      if (k.index_.count(z)) throw std::invalid_argument("duplicate conditioning point");
      k.index_.emplace(z, k.entries_.size());
      k.entries_.emplace_back(std::move(z), std::move(m));
    }
    k.lipschitz_ = lipschitz;
    return k;
  }

  static MarkovKernel gaussian_linear(Eigen::VectorXd intercept, Eigen::MatrixXd coef,
                                      Eigen::MatrixXd cond_cov) {
    MarkovKernel k;
    k.kind_ = Kind::GaussianLinear;
    k.intercept_ = std::move(intercept);
    k.coef_ = std::move(coef);
    k.cond_cov_ = std::move(cond_cov);
    if (k.coef_.rows() != k.intercept_.size() || k.cond_cov_.rows() != k.intercept_.size())
      throw std::invalid_argument("gaussian kernel shape mismatch");
    std::vector<SpacePtr> zc(k.coef_.cols(), SampleSpace::real_line());
    k.z_space_ = k.coef_.cols() == 1 ? SampleSpace::real_line() : SampleSpace::product(zc);
    std::vector<SpacePtr> xc(k.intercept_.size(), SampleSpace::real_line());
    k.x_space_ =
        k.intercept_.size() == 1 ? SampleSpace::real_line() : SampleSpace::product(xc);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(k.coef_);
    k.lipschitz_ = svd.singularValues()(0);
    return k;
  }

  Kind kind() const { return kind_; }
  const SpacePtr& z_space() const { return z_space_; }
  const SpacePtr& x_space() const { return x_space_; }
  const std::vector<std::pair<Point, Measure>>& entries() const { return entries_; }
  std::optional<double> lipschitz_bound() const { return lipschitz_; }
  const Eigen::MatrixXd& coef() const { return coef_; }
  const Eigen::MatrixXd& cond_cov() const { return cond_cov_; }

  Measure at(const Point& z) const {
    if (kind_ == Kind::Table) {
      auto it = index_.find(z);
      if (it == index_.end())
        throw std::invalid_argument("conditioning point " + z.str() + " not in kernel table");
      return entries_[it->second].second;
    }
    Eigen::VectorXd zv(coef_.cols());
    if (coef_.cols() == 1) {
      zv[0] = z.real();
    } else {
      const Tuple& t = z.tuple();
      for (int i = 0; i < coef_.cols(); ++i) zv[i] = t[i].real();
    }
    return Measure::gaussian(intercept_ + coef_ * zv, cond_cov_);
  }

 private:
  Kind kind_ = Kind::Table;
  SpacePtr z_space_, x_space_;
  std::vector<std::pair<Point, Measure>> entries_;
  std::unordered_map<Point, size_t, PointHash> index_;
  std::optional<double> lipschitz_;
  Eigen::VectorXd intercept_;
  Eigen::MatrixXd coef_, cond_cov_;
};

/// Mean-zero Gaussian joint with a block-partitioned covariance.
struct GaussianJoint {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  GaussianJoint(Eigen::VectorXd mu, Eigen::MatrixXd sigma)
      : mean(std::move(mu)), cov(std::move(sigma)) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
      throw std::invalid_argument("covariance shape mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-12))
      throw std::invalid_argument("covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
      throw std::invalid_argument("covariance not positive semi-definite");
  }

  Eigen::MatrixXd block(const std::vector<int>& rows, const std::vector<int>& cols) const {
    Eigen::MatrixXd B(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j) B(i, j) = cov(rows[i], cols[j]);
    return B;
  }
};

/// Product P(X|Z) ⊗ Q(Y,Z): the measure on X x Y x Z with atom weights
/// K(z)({x}) * Q({(y,z)}). Q must be finite-support on a (Y,Z) product and
/// every z-atom must appear in the kernel table.
inline Measure kernel_product(const MarkovKernel& K, const Measure& Q) {
  if (K.kind() != MarkovKernel::Kind::Table)
    throw std::invalid_argument("kernel_product needs a table kernel");
  Measure q = Q.as_finite_support();
  if (!q.space()->is_product() || q.space()->components().size() != 2)
    throw std::invalid_argument("kernel_product needs Q on a (Y,Z) product space");
  SpacePtr y_space = q.space()->components()[0];
  SpacePtr z_space = q.space()->components()[1];
  require_same_space(z_space, K.z_space(), "kernel_product conditioning space");
  SpacePtr out_space = SampleSpace::product({K.x_space(), y_space, z_space});
  std::vector<Point> atoms;
  std::vector<double> weights;
  std::unordered_map<Point, size_t, PointHash> index;
  for (size_t i = 0; i < q.atoms().size(); ++i) {
    const Tuple& yz = q.atoms()[i].tuple();
    double wq = q.weights()[i];
    if (wq == 0.0) continue;
    Measure kx = K.at(yz[1]).as_finite_support();
    for (size_t j = 0; j < kx.atoms().size(); ++j) {
      double w = kx.weights()[j] * wq;
      if (w == 0.0) continue;
      Point p(Tuple{kx.atoms()[j], yz[0], yz[1]});
      auto [it, fresh] = index.try_emplace(p, atoms.size());
      if (fresh) {
        atoms.push_back(std::move(p));
        weights.push_back(0.0);
      }
      weights[it->second] += w;
    }
  }
  return Measure::finite_support(std::move(out_space), std::move(atoms), std::move(weights));
}

/// Composition P(X|Y) ∘ P(Y|Z): z -> sum_y K2(z)({y}) K1(y). The declared
/// bound, when both inputs carry one, is max{1, L} * M.
inline MarkovKernel kernel_compose(const MarkovKernel& K1, const MarkovKernel& K2) {
  if (K1.kind() != MarkovKernel::Kind::Table || K2.kind() != MarkovKernel::Kind::Table)
    throw std::invalid_argument("kernel_compose needs table kernels");
  require_same_space(K2.x_space(), K1.z_space(), "kernel_compose middle space");
  std::vector<std::pair<Point, Measure>> entries;
  for (const auto& [z, my] : K2.entries()) {
    Measure fy = my.as_finite_support();
    std::vector<Point> atoms;
    std::vector<double> weights;
    std::unordered_map<Point, size_t, PointHash> index;
    for (size_t i = 0; i < fy.atoms().size(); ++i) {
      double wy = fy.weights()[i];
      if (wy == 0.0) continue;
      Measure mx = K1.at(fy.atoms()[i]).as_finite_support();
      for (size_t j = 0; j < mx.atoms().size(); ++j) {
        double w = wy * mx.weights()[j];
        if (w == 0.0) continue;
        auto [it, fresh] = index.try_emplace(mx.atoms()[j], atoms.size());
        if (fresh) {
          atoms.push_back(mx.atoms()[j]);
          weights.push_back(0.0);
        }
        weights[it->second] += w;
      }
    }
    entries.emplace_back(z, Measure::finite_support(K1.x_space(), std::move(atoms),
                                                    std::move(weights)));
  }
  std::optional<double> bound;
  if (K1.lipschitz_bound() && K2.lipschitz_bound())
    bound = std::max(1.0, *K1.lipschitz_bound()) * *K2.lipschitz_bound();
  return MarkovKernel::table(K2.z_space(), K1.x_space(), std::move(entries), bound);
}

/// Largest observed ratio d_bl(K(z), K(z')) / d(z, z'); over all table pairs
/// when `pairs` is omitted. A lower bound for the true Lipschitz constant
/// (exact for full-table scans of finite kernels).
inline double lipschitz_estimate(
    const MarkovKernel& K,
    const std::vector<std::pair<Point, Point>>* pairs = nullptr) {
  if (K.kind() != MarkovKernel::Kind::Table)
    throw std::invalid_argument("lipschitz_estimate needs a table kernel");
  double best = 0.0;
  auto consider = [&](const Point& z1, const Point& z2) {
    double dz = K.z_space()->dist(z1, z2);
    if (dz <= 0) return;
    best = std::max(best, d_bl(K.at(z1), K.at(z2)) / dz);
  };
  if (pairs) {
    for (const auto& [z1, z2] : *pairs) consider(z1, z2);
  } else {
    const auto& es = K.entries();
    for (size_t i = 0; i < es.size(); ++i)
      for (size_t j = i + 1; j < es.size(); ++j) consider(es[i].first, es[j].first);
  }
  if (pairs && pairs->empty() && K.entries().empty())
    throw std::invalid_argument("lipschitz_estimate with no pairs and empty table");
  return best;  // 0 when there is nothing to compare (constant kernels included)
}

/// Conditional of a Gaussian joint on the `given` coordinates:
/// mean mu_T + S_TG S_GG^{-1} (z - mu_G), covariance S_TT - S_TG S_GG^{-1} S_GT.
/// Returns the Gaussian-linear kernel and the conditional covariance.
inline std::pair<MarkovKernel, Eigen::MatrixXd> gaussian_conditional(
    const GaussianJoint& J, const std::vector<int>& target, const std::vector<int>& given) {
  Eigen::MatrixXd Stt = J.block(target, target);
  Eigen::MatrixXd Stg = J.block(target, given);
  Eigen::MatrixXd Sgg = J.block(given, given);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Sgg);
  double scale = std::max(1.0, Sgg.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-12);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12 * scale)
    throw std::invalid_argument("conditioning block is singular");
  Eigen::MatrixXd B = Stg * lu.inverse();
  Eigen::MatrixXd cond_cov = Stt - B * Stg.transpose();
  Eigen::VectorXd mu_t(target.size()), mu_g(given.size());
  for (size_t i = 0; i < target.size(); ++i) mu_t[i] = J.mean[target[i]];
  for (size_t i = 0; i < given.size(); ++i) mu_g[i] = J.mean[given[i]];
  Eigen::VectorXd intercept = mu_t - B * mu_g;
  return {MarkovKernel::gaussian_linear(std::move(intercept), B, cond_cov), cond_cov};
}

/// Lipschitz constant of the Gaussian conditional: the operator norm of the
/// coefficient matrix, via the eigen-decomposition of its Gram matrix.
inline double gaussian_lipschitz(const GaussianJoint& J, const std::vector<int>& target,
                                 const std::vector<int>& given) {
  Eigen::MatrixXd Stg = J.block(target, given);
  Eigen::MatrixXd Sgg = J.block(given, given);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Sgg);
  double scale = std::max(1.0, Sgg.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-12);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12 * scale)
    throw std::invalid_argument("conditioning block is singular");
  Eigen::MatrixXd B = Stg * lu.inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// The trivariate covariance sequence whose conditionals grow as sqrt(n)/2:
/// diag 1,1,2/n; off-diagonal XY = 1/2 and XZ = YZ = 1/sqrt(n). Mean zero.
inline GaussianJoint example_gauss_sequence(size_t n) {
  if (n < 1) throw std::invalid_argument("sequence index must be >= 1");
  double rn = 1.0 / std::sqrt(double(n));
  Eigen::MatrixXd S(3, 3);
  S << 1.0, 0.5, rn, 0.5, 1.0, rn, rn, rn, 2.0 / double(n);
  return GaussianJoint(Eigen::VectorXd::Zero(3), std::move(S));
}

namespace detail {

struct CiParts {
  MarkovKernel conditional;   // P(X | Z=z) on observed z-atoms
  Measure marginal_yz;        // P(Y, Z)
};

inline CiParts ci_parts(const Measure& P) {
  Measure fp = P.as_finite_support();
  if (fp.atoms().empty()) throw std::invalid_argument("empty support");
  if (!fp.space()->is_product() || fp.space()->components().size() != 3)
    throw std::invalid_argument("conditional-independence distance needs an (X,Y,Z) product");
  SpacePtr xs = fp.space()->components()[0];
  SpacePtr ys = fp.space()->components()[1];
  SpacePtr zs = fp.space()->components()[2];

  struct Slice {
    double mass = 0;
    std::vector<Point> xs;
    std::vector<double> ws;
    std::unordered_map<Point, size_t, PointHash> index;
  };
  std::vector<Point> z_order;
  std::unordered_map<Point, Slice, PointHash> slices;
  std::vector<Point> yz_atoms;
  std::vector<double> yz_weights;
  std::unordered_map<Point, size_t, PointHash> yz_index;

  for (size_t i = 0; i < fp.atoms().size(); ++i) {
    double w = fp.weights()[i];
    const Tuple& t = fp.atoms()[i].tuple();
    const Point &x = t[0], &y = t[1], &z = t[2];
    auto [sit, zfresh] = slices.try_emplace(z);
    if (zfresh) z_order.push_back(z);
    Slice& s = sit->second;
    s.mass += w;
    auto [xit, xfresh] = s.index.try_emplace(x, s.xs.size());
    if (xfresh) {
      s.xs.push_back(x);
      s.ws.push_back(0.0);
    }
    s.ws[xit->second] += w;
    Point yz(Tuple{y, z});
    auto [mit, mfresh] = yz_index.try_emplace(yz, yz_atoms.size());
    if (mfresh) {
      yz_atoms.push_back(std::move(yz));
      yz_weights.push_back(0.0);
    }
    yz_weights[mit->second] += w;
  }

  std::vector<std::pair<Point, Measure>> entries;
  for (const Point& z : z_order) {
    Slice& s = slices.at(z);
    if (s.mass <= 0) continue;
    std::vector<double> ws = s.ws;
    for (double& w : ws) w /= s.mass;
    entries.emplace_back(z, Measure::finite_support(xs, s.xs, std::move(ws)));
  }
  MarkovKernel K = MarkovKernel::table(zs, xs, std::move(entries));
  Measure Q = Measure::finite_support(SampleSpace::product({ys, zs}), std::move(yz_atoms),
                                      std::move(yz_weights));
  return {std::move(K), std::move(Q)};
}

}  // namespace detail

/// d_bl(P(X|Z) ⊗ P(Y,Z), P(X,Y,Z)) for a finite-support P, the conditional
/// being formed on observed z-atoms. Zero exactly when the factorization
/// holds atomwise.
inline double ci_distance(const Measure& P) {
  detail::CiParts parts = detail::ci_parts(P);
  Measure product = kernel_product(parts.conditional, parts.marginal_yz);
  return d_bl(product, P);
}

/// Distance test for conditional independence on finite spaces:
///   verdict 0 iff ci_distance(empirical) < gamma,
///   verdict 1 iff ci_distance(empirical) > eps - gamma,
/// with 0 < gamma < eps/2 (default gamma = eps/4). On finite spaces a
/// perturbation smaller than the least point separation cannot move any
/// sample point, so both regions are open. alpha is recorded for reporting;
/// the levels follow from the margins.
inline FpTest ci_test(SpacePtr space, double eps, double gamma = 0.0, double alpha = 0.05) {
  if (!space->is_product() || space->components().size() != 3)
    throw std::invalid_argument("ci_test needs an (X,Y,Z) product space");
  for (const auto& c : space->components())
    if (!c->is_discrete())
      throw std::invalid_argument("ci_test supports finite component spaces only");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (gamma == 0.0) gamma = eps / 4.0;
  if (!(gamma > 0) || !(gamma < eps / 2.0))
    throw std::invalid_argument("need 0 < gamma < eps/2");
  double stability = space->min_positive_dist();
  Json prov{{"op", "ci_test"}, {"eps", eps}, {"gamma", gamma}, {"alpha", alpha}};
  double e = eps, g = gamma;
  auto eval = [e, g, stability](const EvalContext& ctx) -> Verdict {
    if (ctx.n() == 0) return {2, 0.0};
    double d = ci_distance(ctx.empirical());
    bool cond0 = d < g;
    bool cond1 = d > e - g;
    if (cond0 && cond1) throw InvariantViolation("ci test: both cases hold");
    if (cond0) return {0, stability};
    if (cond1) return {1, stability};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), std::move(space), alpha);
}

/// Moves duplicate z-coordinates of a finite-support measure on X x Y x Z
/// (Z real) to fresh nearby values, in atom order, by the largest dyadic
/// step below each atom's share of the budget. The output has pairwise
/// distinct z-coordinates (hence exact atomwise conditional independence)
/// and d_bl displacement strictly below eps.
inline Measure densify_ci(const Measure& P, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("budget must be positive");
  Measure fp = P.as_finite_support();
  if (!fp.space()->is_product() || fp.space()->components().size() != 3)
    throw std::invalid_argument("densify_ci needs an (X,Y,Z) product");
  SpacePtr zs = fp.space()->components()[2];
  if (!zs->is_real()) {
    if (zs->is_discrete() && zs->point_count() < fp.atoms().size())
      throw std::invalid_argument("discrete Z has fewer points than atoms");
    throw std::invalid_argument("densify_ci needs a real-valued Z space");
  }
  size_t m = fp.atoms().size();
  std::unordered_map<Point, int, PointHash> used;
  for (const Point& a : fp.atoms()) used.try_emplace(a.tuple()[2], 0);

  std::vector<Point> atoms = fp.atoms();
  std::vector<double> weights = fp.weights();
  std::unordered_map<Point, int, PointHash> seen;
  for (size_t i = 0; i < m; ++i) {
    const Tuple& t = atoms[i].tuple();
    Point z = t[2];
    auto [it, fresh] = seen.try_emplace(z, 1);
    if (fresh) continue;  // first atom at this z keeps it
    double w = weights[i];
    double budget = w > 0 ? eps / (2.0 * double(m) * w) : eps;
    budget = std::min(budget, eps);
    double step = std::exp2(std::floor(std::log2(budget)));
    if (step >= budget) step /= 2;
    Point candidate = z;
    for (; step > 0; step /= 2) {
      Point up(z.real() + step), down(z.real() - step);
      if (zs->contains(up) && !used.count(up)) {
        candidate = up;
        break;
      }
      if (zs->contains(down) && !used.count(down)) {
        candidate = down;
        break;
      }
    }
    if (candidate == z) throw std::runtime_error("could not find a fresh z (internal error)");
    used.try_emplace(candidate, 0);
    atoms[i] = Point(Tuple{t[0], t[1], candidate});
  }
  return Measure::finite_support(fp.space(), std::move(atoms), std::move(weights),
                                 fp.exact_weights());
}

}  // namespace fptest

#endif  // FPTEST_KERNELS_HPP
