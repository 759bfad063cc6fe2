#ifndef FPTEST_BL_METRIC_HPP
#define FPTEST_BL_METRIC_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fptest/hypotheses.hpp"
#include "fptest/measure.hpp"
#include "fptest/transport.hpp"

namespace fptest {

/// Pooled-support view of a pair of finite-support measures: support points,
/// signed weight differences, and the pairwise distance matrix of the LP.
struct BlProblem {
  std::vector<Point> support;
  std::vector<double> diff;                 // p_i - q_i, sums to 0
  std::vector<std::vector<double>> dist;

  static constexpr size_t kMaxSupport = 500;

  static BlProblem build(const Measure& P, const Measure& Q) {
    require_same_space(P.space(), Q.space(), "d_bl");
    Measure fp = P.as_finite_support();
    Measure fq = Q.as_finite_support();
    BlProblem prob;
    std::unordered_map<Point, size_t, PointHash> index;
    auto add = [&](const Point& p, double w, double sign) {
      auto [it, fresh] = index.try_emplace(p, prob.support.size());
      if (fresh) {
        prob.support.push_back(p);
        prob.diff.push_back(0.0);
      }
      prob.diff[it->second] += sign * w;
    };
    for (size_t i = 0; i < fp.atoms().size(); ++i) add(fp.atoms()[i], fp.weights()[i], +1);
    for (size_t i = 0; i < fq.atoms().size(); ++i) add(fq.atoms()[i], fq.weights()[i], -1);
    size_t m = prob.support.size();
    if (m > kMaxSupport)
      throw std::invalid_argument("pooled support exceeds the desk-scale cap of 500 points");
    const SampleSpace& sp = *P.space();
    prob.dist.assign(m, std::vector<double>(m, 0.0));
    for (size_t i = 0; i < m; ++i)
      for (size_t j = i + 1; j < m; ++j)
        prob.dist[i][j] = prob.dist[j][i] = sp.dist(prob.support[i], prob.support[j]);
    return prob;
  }

  bool trivially_zero() const {
    return std::all_of(diff.begin(), diff.end(), [](double c) { return std::abs(c) < 1e-15; });
  }
};

/// Bounded-Lipschitz distance between finite-support measures: the value of
///   max { sum_i f_i (p_i - q_i) : |f_i| <= 1, |f_i - f_j| <= d(x_i, x_j) },
/// solved through the transportation dual. Always in [0, 2].
inline double d_bl(const Measure& P, const Measure& Q) {
  BlProblem prob = BlProblem::build(P, Q);
  if (prob.trivially_zero()) return 0.0;
  return flat_metric_lp(prob.dist, prob.diff);
}

namespace detail {

inline void bruteforce_scan(const BlProblem& prob, double h, size_t i, std::vector<double>& f,
                            double acc, double& best) {
  size_t m = prob.diff.size();
  if (i == m) {
    best = std::max(best, acc);
    return;
  }
  long steps = std::lround(2.0 / h);
  for (long k = 0; k <= steps; ++k) {
    double fi = -1.0 + h * double(k);
    bool ok = true;
    for (size_t j = 0; j < i && ok; ++j)
      if (std::abs(fi - f[j]) > prob.dist[i][j] + h * (1 + 1e-9)) ok = false;
    if (!ok) continue;
    f[i] = fi;
    bruteforce_scan(prob, h, i + 1, f, acc + fi * prob.diff[i], best);
  }
}

}  // namespace detail

/// Independent grid-search oracle for d_bl on pooled supports of at most 4
/// points. Enumerates f on a grid of step `resolution` with slack-feasible
/// Lipschitz filtering; the result is within resolution * sum_i |p_i - q_i|
/// of the true optimum.
inline double d_bl_bruteforce(const Measure& P, const Measure& Q, double resolution) {
  if (!(resolution > 0) || resolution > 1)
    throw std::invalid_argument("oracle resolution must be in (0,1]");
  BlProblem prob = BlProblem::build(P, Q);
  if (prob.support.size() > 4)
    throw std::invalid_argument("brute-force oracle limited to pooled supports of 4 points");
  if (prob.trivially_zero()) return 0.0;
  long steps = std::max(2L, std::lround(std::ceil(2.0 / resolution)));
  double h = 2.0 / double(steps);
  std::vector<double> f(prob.support.size(), 0.0);
  double best = 0.0;  // f = 0 is feasible
  detail::bruteforce_scan(prob, h, 0, f, 0.0, best);
  return best;
}

/// min(2, d(0,1)) * |p - q|: closed form of d_bl for two Bernoulli laws on a
/// coin space with point distance d(0,1).
inline double d_bl_bernoulli(const SpacePtr& coin_space, double p, double q) {
  double d01 = coin_space->dist(Point(0), Point(1));
  return std::min(2.0, d01) * std::abs(p - q);
}

/// Distance from P to a hypothesis set: exact closed form for Bernoulli
/// parameter sets, a minimum for finite measure lists, and a grid scan (at
/// the caller's resolution) for generic parametric families.
inline double d_bl_to_set(const Measure& P, const HypothesisRegion& H, double resolution = 1e-4) {
  if (H.bern_set) {
    Measure fs = P.as_finite_support();
    double d01 = fs.space()->dist(Point(0), Point(1));
    double scale = std::min(2.0, d01);
    double p_hat = 0;
    for (size_t i = 0; i < fs.atoms().size(); ++i)
      if (fs.atoms()[i] == Point(1)) p_hat += fs.weights()[i];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : H.bern_set->closed_intervals) {
      double l = rat_to_double(lo), r = rat_to_double(hi);
      double gap = p_hat < l ? l - p_hat : (p_hat > r ? p_hat - r : 0.0);
      best = std::min(best, gap);
    }
    for (const BernParam& t : H.bern_set->singletons)
      best = std::min(best, std::abs(p_hat - t.value()));
    if (!std::isfinite(best)) throw std::invalid_argument("empty Bernoulli parameter set");
    return scale * best;
  }
  if (H.measure_list) {
    if (H.measure_list->empty()) throw std::invalid_argument("empty measure list");
    double best = std::numeric_limits<double>::infinity();
    for (const Measure& M : *H.measure_list) best = std::min(best, d_bl(P, M));
    return best;
  }
  if (H.family) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : H.family->param_ranges) {
      long steps = std::max(1L, std::lround(std::ceil((hi - lo) / resolution)));
      for (long k = 0; k <= steps; ++k) {
        double t = lo + (hi - lo) * double(k) / double(steps);
        best = std::min(best, d_bl(P, H.family->measure_at(t)));
      }
    }
    if (!std::isfinite(best)) throw std::invalid_argument("empty parametric family");
    return best;
  }
  throw std::invalid_argument("hypothesis region has no distance-computable representation");
}

/// Finite-support total variation distance; a helper bound (d_bl <= 2 d_tv).
inline double d_tv(const Measure& P, const Measure& Q) {
  BlProblem prob = BlProblem::build(P, Q);
  double s = 0;
  for (double c : prob.diff) s += std::abs(c);
  return s / 2.0;
}

}  // namespace fptest

#endif  // FPTEST_BL_METRIC_HPP
