#ifndef FPTEST_SAMPLING_HPP
#define FPTEST_SAMPLING_HPP

#include <stdexcept>
#include <vector>

#include "fptest/measure.hpp"
#include "fptest/rng.hpp"

namespace fptest {

namespace detail {

inline Eigen::MatrixXd gaussian_transform(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline Point gaussian_point(const Eigen::VectorXd& mean, const Eigen::MatrixXd& transform,
                            RngStream& rng) {
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < mean.size(); ++i) z[i] = rng.gauss();
  Eigen::VectorXd x = mean + transform * z;
  if (mean.size() == 1) return Point(x[0]);
  Tuple t;
  t.reserve(mean.size());
  for (int i = 0; i < mean.size(); ++i) t.emplace_back(x[i]);
  return Point(std::move(t));
}

}  // namespace detail

inline Point draw_point(const Measure& P, RngStream& rng) {
  switch (P.kind()) {
    case Measure::Kind::FiniteSupport:
      return P.atoms()[rng.categorical(P.weights())];
    case Measure::Kind::Bernoulli:
      return Point(rng.bernoulli(P.bern_p()) ? 1 : 0);
    case Measure::Kind::Gaussian:
      return detail::gaussian_point(P.mean(), detail::gaussian_transform(P.cov()), rng);
  }
  throw std::logic_error("unreachable");
}

inline Sample sample_iid(const Measure& P, size_t n, RngStream& rng) {
  std::vector<Point> pts;
  pts.reserve(n);
  if (P.kind() == Measure::Kind::Gaussian) {
    Eigen::MatrixXd transform = detail::gaussian_transform(P.cov());
    for (size_t i = 0; i < n; ++i)
      pts.push_back(detail::gaussian_point(P.mean(), transform, rng));
  } else {
    for (size_t i = 0; i < n; ++i) pts.push_back(draw_point(P, rng));
  }
  return Sample(P.space(), std::move(pts));
}

inline Sample sample_iid(const Measure& P, size_t n, uint64_t seed) {
  RngStream rng = RngStream::for_replicate(seed, n, 0);
  return sample_iid(P, n, rng);
}

/// Per-atom hit counts for a finite-support measure; the fast path for
/// Monte-Carlo runs that only need the empirical histogram.
inline std::vector<long> sample_iid_counts(const Measure& P, size_t n, RngStream& rng) {
  Measure fs = P.as_finite_support();
  std::vector<long> counts(fs.atoms().size(), 0);
  for (size_t i = 0; i < n; ++i) ++counts[rng.categorical(fs.weights())];
  return counts;
}

}  // namespace fptest

#endif  // FPTEST_SAMPLING_HPP
