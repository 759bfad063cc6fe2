#include <gtest/gtest.h>

#include "fptest/fptest.hpp"
#include "test_support.hpp"

using namespace fptest;

namespace {

SpacePtr unit() { return SampleSpace::unit_interval(); }

TEST(SampleSpaceTest, RejectsBrokenMetrics) {
  EXPECT_THROW(SampleSpace::discrete({"a", "b"}, {{0, 1}, {2, 0}}), std::invalid_argument);
  EXPECT_THROW(SampleSpace::discrete({"a", "b"}, {{0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(SampleSpace::discrete({"a", "b", "c"}, {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}),
               std::invalid_argument);
  EXPECT_THROW(SampleSpace::discrete({"a"}, {{0, 1}}), std::invalid_argument);
  EXPECT_NO_THROW(SampleSpace::discrete({"a", "b"}, {{0, 1}, {1, 0}}));
}

TEST(OpenSetTest, NeighborhoodOfComplementRealInterval) {
  // A=(0.2,0.8) in [0,1], r=1/10 -> [0,0.3) u (0.7,1]
  OpenSet A = OpenSet::of_intervals(unit(), {{rat(1, 5), rat(4, 5)}});
  OpenSet nb = A.neighborhood_of_complement(rat(1, 10));
  ASSERT_EQ(nb.intervals().size(), 2u);
  EXPECT_EQ(nb.intervals()[0].a, rat(0));
  EXPECT_TRUE(nb.intervals()[0].a_closed);
  EXPECT_EQ(nb.intervals()[0].b, rat(3, 10));
  EXPECT_FALSE(nb.intervals()[0].b_closed);
  EXPECT_EQ(nb.intervals()[1].a, rat(7, 10));
  EXPECT_FALSE(nb.intervals()[1].a_closed);
  EXPECT_EQ(nb.intervals()[1].b, rat(1));
  EXPECT_TRUE(nb.intervals()[1].b_closed);
  // boundary membership is exact
  EXPECT_TRUE(nb.contains_rat(rat(0)));
  EXPECT_FALSE(nb.contains_rat(rat(3, 10)));
  EXPECT_FALSE(nb.contains_rat(rat(7, 10)));
  EXPECT_TRUE(nb.contains_rat(rat(1)));
}

TEST(OpenSetTest, NeighborhoodOfComplementDiscrete) {
  // A={1} in {0,1} with d(0,1)=1, r=1/3 -> {0}
  SpacePtr coin = SampleSpace::coin();
  OpenSet A = OpenSet::of_points(coin, {1});
  OpenSet nb = A.neighborhood_of_complement(rat(1, 3));
  EXPECT_TRUE(nb.contains(Point(0)));
  EXPECT_FALSE(nb.contains(Point(1)));
}

TEST(OpenSetTest, NeighborhoodOfWholeSpaceIsEmpty) {
  EXPECT_TRUE(OpenSet::whole(unit()).neighborhood_of_complement(rat(1, 7)).is_empty());
  EXPECT_TRUE(
      OpenSet::whole(SampleSpace::coin()).neighborhood_of_complement(rat(1, 2)).is_empty());
}

TEST(OpenSetTest, ExteriorExamples) {
  // S=[0,0.3) u (0.7,1] -> (0.3,0.7)
  OpenSet A = OpenSet::of_intervals(unit(), {{rat(1, 5), rat(4, 5)}});
  OpenSet S = A.neighborhood_of_complement(rat(1, 10));
  OpenSet ext = S.exterior();
  ASSERT_EQ(ext.intervals().size(), 1u);
  EXPECT_EQ(ext.intervals()[0].a, rat(3, 10));
  EXPECT_FALSE(ext.intervals()[0].a_closed);
  EXPECT_EQ(ext.intervals()[0].b, rat(7, 10));
  EXPECT_FALSE(ext.intervals()[0].b_closed);

  EXPECT_EQ(OpenSet::empty(unit()).exterior(), OpenSet::whole(unit()));

  SpacePtr coin = SampleSpace::coin();
  OpenSet zero = OpenSet::of_points(coin, {0});
  OpenSet zext = zero.exterior();
  EXPECT_FALSE(zext.contains(Point(0)));
  EXPECT_TRUE(zext.contains(Point(1)));
}

TEST(OpenSetTest, ExteriorDisjointFromSetOnRandomFixtures) {
  for (uint64_t inst = 0; inst < 60; ++inst) {
    RngStream rng = RngStream::for_replicate(5, 1, inst);
    OpenSet S = fixtures::random_open_set(unit(), rng);
    OpenSet ext = S.exterior();
    for (long k = 0; k <= 64; ++k) {
      Rat x = rat(k, 64);
      EXPECT_FALSE(S.contains_rat(x) && ext.contains_rat(x))
          << "point " << rat_str(x) << " in both S=" << S.str() << " and ext=" << ext.str();
    }
  }
}

TEST(OpenSetTest, NeighborhoodCoversComplementAndIsMonotone) {
  for (uint64_t inst = 0; inst < 60; ++inst) {
    RngStream rng = RngStream::for_replicate(6, 1, inst);
    OpenSet A = fixtures::random_open_set(unit(), rng);
    Rat r1 = rat(1, 2 + long(rng.uniform_index(30)));
    Rat r2 = r1 + rat(1, 5);
    OpenSet n1 = A.neighborhood_of_complement(r1);
    OpenSet n2 = A.neighborhood_of_complement(r2);
    for (long k = 0; k <= 80; ++k) {
      Rat x = rat(k, 80);
      if (!A.contains_rat(x)) EXPECT_TRUE(n1.contains_rat(x));  // complement is covered
      if (n1.contains_rat(x)) EXPECT_TRUE(n2.contains_rat(x));  // monotone in r
    }
  }
}

TEST(OpenSetTest, ExhaustionOfAByExteriorOfShrinkingNeighborhoods) {
  for (uint64_t inst = 0; inst < 30; ++inst) {
    RngStream rng = RngStream::for_replicate(7, 1, inst);
    OpenSet A = fixtures::random_open_set(unit(), rng);
    OpenSet prev = OpenSet::empty(unit());
    for (long n : {1L, 2L, 4L, 16L, 64L, 512L}) {
      OpenSet ext = A.neighborhood_of_complement(rat(1, n)).exterior();
      for (long k = 0; k <= 48; ++k) {
        Rat x = rat(k, 48);
        EXPECT_FALSE(ext.contains_rat(x) && !A.contains_rat(x));  // ext(A^c_r) inside A
        EXPECT_FALSE(prev.contains_rat(x) && !ext.contains_rat(x));  // increasing in n
      }
      prev = ext;
    }
    // every rational test point of A is eventually captured
    for (long k = 0; k <= 48; ++k) {
      Rat x = rat(k, 48);
      if (A.contains_rat(x)) {
        OpenSet ext = A.neighborhood_of_complement(rat(1, 4096)).exterior();
        EXPECT_TRUE(ext.contains_rat(x)) << "x=" << rat_str(x) << " A=" << A.str();
      }
    }
  }
}

TEST(SampleIidTest, DegenerateBernoulliAndDirac) {
  Measure one = Measure::bernoulli(1.0);
  Sample s = sample_iid(one, 5, 42);
  ASSERT_EQ(s.size(), 5u);
  for (const Point& p : s.points()) EXPECT_EQ(p.index(), 1);

  SpacePtr line = SampleSpace::real_line();
  Measure dirac = Measure::dirac(line, Point(0.25));
  Sample t = sample_iid(dirac, 3, 7);
  for (const Point& p : t.points()) EXPECT_EQ(p.real(), 0.25);
}

TEST(SampleIidTest, BernoulliFrequencyMatchesParameter) {
  double total = 0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    Sample x = sample_iid(Measure::bernoulli(0.5), 10000, uint64_t(100 + s));
    long ones = 0;
    for (const Point& p : x.points()) ones += p.index();
    total += double(ones) / 10000.0;
  }
  EXPECT_NEAR(total / seeds, 0.5, 0.02);
}

TEST(SampleIidTest, RejectsBadWeights) {
  SpacePtr coin = SampleSpace::coin();
  EXPECT_THROW(
      Measure::finite_support(coin, {Point(0), Point(1)}, {0.5, 0.6}),
      std::invalid_argument);
  EXPECT_THROW(Measure::finite_support(coin, {Point(0)}, {-1.0}), std::invalid_argument);
}

TEST(EmpiricalMeasureTest, SpecExamples) {
  SpacePtr coin = SampleSpace::coin();
  Sample s(coin, {Point(1), Point(0), Point(1)});
  Measure m = empirical_measure(s);
  ASSERT_EQ(m.atoms().size(), 2u);
  // first occurrence order: 1 then 0
  EXPECT_EQ(m.atoms()[0].index(), 1);
  EXPECT_EQ((*m.exact_weights())[0], rat(2, 3));
  EXPECT_EQ((*m.exact_weights())[1], rat(1, 3));

  SpacePtr line = SampleSpace::real_line();
  Sample t(line, {Point(0.5), Point(0.5), Point(0.5), Point(0.5)});
  Measure d = empirical_measure(t);
  ASSERT_EQ(d.atoms().size(), 1u);
  EXPECT_EQ(d.weights()[0], 1.0);

  Sample u(line, {Point(1.0), Point(2.0), Point(3.0), Point(1.0), Point(2.0), Point(3.0)});
  Measure e = empirical_measure(u);
  ASSERT_EQ(e.atoms().size(), 3u);
  for (const Rat& w : *e.exact_weights()) EXPECT_EQ(w, rat(1, 3));

  EXPECT_THROW(empirical_measure(Sample(line, {})), std::invalid_argument);
}

TEST(EmpiricalMeasureTest, ExactWeightsSumToOneExactly) {
  for (uint64_t inst = 0; inst < 20; ++inst) {
    RngStream rng = RngStream::for_replicate(9, 1, inst);
    size_t n = 1 + rng.uniform_index(200);
    std::vector<Point> pts;
    for (size_t i = 0; i < n; ++i) pts.emplace_back(int(rng.uniform_index(4)));
    SpacePtr sp = SampleSpace::discrete_uniform({"a", "b", "c", "d"});
    Measure m = empirical_measure(Sample(sp, std::move(pts)));
    Rat total(0);
    for (const Rat& w : *m.exact_weights()) total += w;
    EXPECT_EQ(total, rat(1));
  }
}

TEST(MeasureOfSetTest, SpecExamples) {
  SpacePtr coin = SampleSpace::coin();
  OpenSet ones = OpenSet::of_points(coin, {1});
  EXPECT_NEAR(measure_of_set(Measure::bernoulli(0.3), ones), 0.3, 1e-15);

  Sample s(coin, {Point(1), Point(0), Point(1)});
  EXPECT_DOUBLE_EQ(measure_of_set(empirical_measure(s), ones), rat_to_double(rat(2, 3)));

  SpacePtr u = unit();
  Measure grid = Measure::finite_support(
      u, {Point(0.1), Point(0.5), Point(0.9)},
      {1.0 / 3, 1.0 / 3, 1.0 / 3});
  OpenSet mid = OpenSet::of_intervals(u, {{rat(1, 5), rat(4, 5)}});
  EXPECT_NEAR(measure_of_set(grid, mid), 1.0 / 3, 1e-12);

  EXPECT_THROW(measure_of_set(Measure::bernoulli(0.3), mid), std::invalid_argument);
}

TEST(MeasureOfSetTest, BoundaryAtomsUseExactComparison) {
  SpacePtr u = unit();
  // atoms sitting exactly on rational endpoints stay out of the open interval
  Measure m = Measure::finite_support(u, {Point(0.25), Point(0.5)}, {0.5, 0.5});
  OpenSet s = OpenSet::of_intervals(u, {{rat(1, 4), rat(1, 2)}});
  EXPECT_DOUBLE_EQ(measure_of_set(m, s), 0.0);
  OpenSet s2 = OpenSet::of_intervals(u, {{rat(1, 8), rat(1, 2)}});
  EXPECT_DOUBLE_EQ(measure_of_set(m, s2), 0.5);
}

TEST(PointTest, TupleEqualityAndHashing) {
  Point a(Tuple{Point(1), Point(0.5)});
  Point b(Tuple{Point(1), Point(0.5)});
  Point c(Tuple{Point(1), Point(0.25)});
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(PointHash{}(a), PointHash{}(b));
}

}  // namespace
