#ifndef FPTEST_TEST_SUPPORT_HPP
#define FPTEST_TEST_SUPPORT_HPP

#include <vector>

#include "fptest/fptest.hpp"

namespace fptest::fixtures {

/// Random relatively-open interval union in [0,1] with denominator-bounded
/// rational endpoints.
inline OpenSet random_open_set(const SpacePtr& space, RngStream& rng, int max_parts = 3) {
  int parts = 1 + int(rng.uniform_index(size_t(max_parts)));
  std::vector<std::pair<Rat, Rat>> ivs;
  for (int i = 0; i < parts; ++i) {
    long den = 8 + long(rng.uniform_index(40));
    long a = long(rng.uniform_index(size_t(den)));
    long b = a + 1 + long(rng.uniform_index(size_t(den - a)));
    ivs.emplace_back(rat(a, den), rat(b, den));
  }
  return OpenSet::of_intervals(space, std::move(ivs));
}

/// Discrete metric space with distances in [base, 2*base] (triangle-safe).
inline SpacePtr random_discrete_space(RngStream& rng, size_t min_pts = 2, size_t max_pts = 5) {
  size_t m = min_pts + rng.uniform_index(max_pts - min_pts + 1);
  double base = 0.5 + 0.5 * rng.uniform01();
  std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) dist[i][j] = dist[j][i] = base * (1.0 + rng.uniform01());
  std::vector<std::string> labels;
  for (size_t i = 0; i < m; ++i) labels.push_back("x" + std::to_string(i));
  return SampleSpace::discrete(std::move(labels), std::move(dist));
}

inline Measure random_simplex_measure(const SpacePtr& space, const std::vector<Point>& pts,
                                      RngStream& rng, double floor_w = 0.02) {
  std::vector<double> w(pts.size());
  double s = 0;
  for (double& x : w) {
    x = floor_w + rng.uniform01();
    s += x;
  }
  for (double& x : w) x /= s;
  return Measure::finite_support(space, pts, w);
}

}  // namespace fptest::fixtures

#endif  // FPTEST_TEST_SUPPORT_HPP
