#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phest/geometry.hpp"
#include "phest/grid.hpp"

using namespace phest;

namespace {

GridFunction line(std::vector<double> interior, int margin) {
  GridSpec spec(1, static_cast<int>(interior.size()), margin);
  GridFunction f(spec);
  for (std::size_t i = 0; i < interior.size(); ++i) f[i + margin] = interior[i];
  return f;
}

GridFunction random_function(std::mt19937_64& rng, int d, int n, int margin) {
  GridSpec spec(d, n, margin);
  GridFunction f(spec);
  std::uniform_int_distribution<int> v(0, 9);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.is_interior(i)) f[i] = v(rng);
  }
  return f;
}

// Brute-force windowed minimum.
GridFunction brute_min_filter(const GridFunction& f, int r) {
  GridFunction out(f.spec);
  for (std::size_t a = 0; a < f.spec.size(); ++a) {
    for (std::size_t b = 0; b < f.spec.size(); ++b) {
      if (chebyshev_distance(f.spec, a, b) <= r) out[a] = std::min(out[a], f[b]);
    }
  }
  return out;
}

}  // namespace

TEST(GridSpec, FlatRoundTrip) {
  GridSpec spec(3, 4, 2);
  EXPECT_EQ(spec.extent(), 8);
  EXPECT_EQ(spec.size(), 512u);
  EXPECT_EQ(spec.interior_size(), 64u);
  for (std::size_t f = 0; f < spec.size(); f += 7) EXPECT_EQ(spec.flat(spec.unflat(f)), f);
  EXPECT_THROW(spec.flat({0, 0, 8}), BoundsError);
  EXPECT_THROW(GridSpec(0, 4, 0), DomainError);
}

TEST(MinFilter, RadiusZeroIsIdentity) {
  std::mt19937_64 rng(1);
  const auto f = random_function(rng, 2, 5, 2);
  EXPECT_EQ(min_filter(f, 0), f);
}

TEST(MinFilter, OneDimensionalExample) {
  const auto g = min_filter(line({5, 2, 7, 3, 9}, 1), 1);
  EXPECT_EQ(std::vector<double>(g.values.begin() + 1, g.values.end() - 1), (std::vector<double>{2, 2, 2, 3, 3}));
  EXPECT_EQ(g[0], 5);
  EXPECT_EQ(g[6], 9);
}

TEST(MinFilter, ConstantStaysConstant) {
  GridFunction f(GridSpec(2, 6, 3), 1.5);
  for (int r = 0; r <= 3; ++r) EXPECT_EQ(min_filter(f, r), f);
}

TEST(MinFilter, RadiusBeyondMarginRejected) {
  GridFunction f(GridSpec(2, 4, 1), 0.0);
  EXPECT_THROW(min_filter(f, 2), BoundsError);
  EXPECT_THROW(min_filter(f, -1), DomainError);
}

TEST(MinFilter, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_function(rng, d, 4, 2);
      for (int r = 0; r <= 2; ++r) EXPECT_EQ(min_filter(f, r), brute_min_filter(f, r));
    }
  }
}

TEST(MinFilter, RadiiCompose) {
  std::mt19937_64 rng(3);
  const auto f = random_function(rng, 2, 7, 4);
  EXPECT_EQ(min_filter(min_filter(f, 1), 2), min_filter(f, 3));
}

TEST(Thicken, RadiusZeroIsIdentity) {
  GridSpec spec(2, 4, 1);
  CubeSet s(spec, {spec.flat({1, 1}), spec.flat({3, 2})});
  EXPECT_EQ(thicken(s, 0), s);
}

TEST(Thicken, SingleCubeBecomesBlock) {
  GridSpec spec(2, 5, 1);
  CubeSet s(spec, {spec.flat({3, 3})});
  const auto t = thicken(s, 1);
  EXPECT_EQ(t.size(), 9u);
  for (int i = 2; i <= 4; ++i) {
    for (int j = 2; j <= 4; ++j) EXPECT_TRUE(t.contains(Index{i, j}));
  }
}

TEST(Thicken, SeparatedCubesStayDisjoint) {
  GridSpec spec(2, 8, 1);
  const auto a = spec.flat({2, 2}), b = spec.flat({5, 2});
  ASSERT_EQ(chebyshev_distance(spec, a, b), 3);
  const auto ta = thicken(CubeSet(spec, {a}), 1), tb = thicken(CubeSet(spec, {b}), 1);
  for (auto f : ta.members) EXPECT_FALSE(tb.contains(f));
  EXPECT_EQ(thicken(CubeSet(spec, {a, b}), 1).size(), 18u);
}

TEST(Thicken, ReachOutsideGridRejected) {
  GridSpec spec(2, 4, 1);
  EXPECT_THROW(thicken(CubeSet(spec, {spec.flat({0, 2})}), 1), BoundsError);
}

TEST(Thicken, CommutesWithSublevel) {
  std::mt19937_64 rng(4);
  const auto f = random_function(rng, 2, 6, 2);
  for (double level : {0.0, 3.0, 6.5, 9.0}) {
    EXPECT_EQ(cube_sublevel(min_filter(f, 2), level), thicken(cube_sublevel(f, level), 2));
  }
}

TEST(GridJson, RoundTrip) {
  std::mt19937_64 rng(5);
  const auto f = random_function(rng, 2, 3, 1);
  EXPECT_EQ(grid_function_from_json(grid_function_to_json(f)), f);
}

// ---- geometry -----------------------------------------------------------------

TEST(DistanceFunction, PointInSet) {
  PointCloudSet k(2, {{0.2, 0.3}, {0.9, 0.9}});
  const auto r = distance_function(std::vector<double>{0.2, 0.3}, k);
  EXPECT_EQ(r.distance, 0.0);
  ASSERT_EQ(r.gamma.size(), 1u);
  EXPECT_EQ(r.gamma[0], (Point{0.2, 0.3}));
}

TEST(DistanceFunction, TwoEquidistantPoints) {
  PointCloudSet k(2, {{0.0, 0.0}, {1.0, 0.0}});
  const auto r = distance_function(std::vector<double>{0.5, 0.3}, k);
  EXPECT_NEAR(r.distance, std::sqrt(0.34), 1e-15);
  EXPECT_EQ(r.gamma.size(), 2u);
}

TEST(DistanceFunction, SinglePoint) {
  PointCloudSet k(3, {{0.1, 0.2, 0.3}});
  const auto r = distance_function(std::vector<double>{0.4, 0.6, 0.3}, k);
  EXPECT_NEAR(r.distance, 0.5, 1e-15);
  EXPECT_THROW(distance_function(std::vector<double>{0.0, 0.0}, PointCloudSet(2, {})), DomainError);
}

TEST(GeneralizedGradient, SingleClosestPointHasUnitNorm) {
  PointCloudSet k(2, {{0.1, 0.1}, {0.9, 0.9}});
  const auto g = generalized_gradient(std::vector<double>{0.2, 0.4}, k);
  EXPECT_NEAR(g.norm, 1.0, 1e-12);
  EXPECT_EQ(g.theta, (Point{0.1, 0.1}));
}

TEST(GeneralizedGradient, TwoClosestPointsUseMidpoint) {
  PointCloudSet k(2, {{0.0, 0.0}, {1.0, 0.0}});
  const auto g = generalized_gradient(std::vector<double>{0.5, 0.3}, k);
  EXPECT_NEAR(g.theta[0], 0.5, 1e-12);
  EXPECT_NEAR(g.theta[1], 0.0, 1e-12);
  EXPECT_NEAR(g.norm, 0.3 / std::sqrt(0.34), 1e-12);
  EXPECT_LT(g.norm, 1.0);
}

TEST(GeneralizedGradient, CentreOfSampledCircleIsCritical) {
  std::vector<Point> pts;
  for (int i = 0; i < 12; ++i) {
    const double a = 2 * M_PI * i / 12;
    pts.push_back({0.5 + 0.3 * std::cos(a), 0.5 + 0.3 * std::sin(a)});
  }
  const auto g = generalized_gradient(std::vector<double>{0.5, 0.5}, PointCloudSet(2, pts));
  EXPECT_LT(g.norm, 1e-9);
  EXPECT_THROW(generalized_gradient(pts[0], PointCloudSet(2, pts)), DomainError);
}

TEST(MinimalEnclosingBall, ThreePoints) {
  // Right triangle: ball on the hypotenuse.
  const auto b = minimal_enclosing_ball({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_NEAR(b.center[0], 0.5, 1e-12);
  EXPECT_NEAR(b.center[1], 0.5, 1e-12);
  EXPECT_NEAR(b.radius, std::sqrt(0.5), 1e-12);
}

TEST(MuReach, ParallelSegmentsGiveHalfGap) {
  // y = 0.4 and y = 0.6 over x in [0.2, 0.8]; the midline is critical at offset 0.1.
  std::vector<Point> pts;
  for (int i = 0; i <= 60; ++i) {
    pts.push_back({0.2 + 0.01 * i, 0.4});
    pts.push_back({0.2 + 0.01 * i, 0.6});
  }
  // Odd resolution puts a row of probes on the midline y = 0.5.
  const auto est = estimate_mu_reach(PointCloudSet(2, pts), 1.0, 51);
  ASSERT_TRUE(est.found);
  EXPECT_NEAR(est.value, 0.1, 0.02);
}

TEST(MuReach, SinglePointHasNoDrop) {
  const auto est = estimate_mu_reach(PointCloudSet(2, {{0.5, 0.5}}), 1.0, 20);
  EXPECT_FALSE(est.found);
  EXPECT_TRUE(std::isinf(est.value));
  EXPECT_THROW(estimate_mu_reach(PointCloudSet(2, {}), 1.0, 20), DomainError);
  EXPECT_THROW(estimate_mu_reach(PointCloudSet(2, {{0.5, 0.5}}), 0.0, 20), DomainError);
}

TEST(MuReach, CornerEstimateGrowsAsMuShrinks) {
  // L-shaped boundary with its corner at (0.3, 0.3).
  std::vector<Point> pts;
  for (int i = 0; i <= 50; ++i) {
    pts.push_back({0.3 + 0.01 * i, 0.3});
    pts.push_back({0.3, 0.3 + 0.01 * i});
  }
  const PointCloudSet k(2, pts);
  const MuReachOptions opts{.min_offset = 0.02};
  const auto tight = estimate_mu_reach(k, 1.0, 100, opts);
  const auto loose = estimate_mu_reach(k, 0.5, 100, opts);
  ASSERT_TRUE(tight.found);
  EXPECT_LT(tight.value, 0.1);
  EXPECT_TRUE(!loose.found || loose.value > tight.value);
}

TEST(OffsetInequality, HoldsForSegment) {
  std::vector<Point> pts;
  for (int i = 0; i <= 40; ++i) pts.push_back({0.3 + 0.01 * i, 0.5});
  const auto rep = check_offset_inequality(PointCloudSet(2, pts), 0.15, 1.0, 100);
  EXPECT_GT(rep.probes_checked, 0u);
  EXPECT_TRUE(rep.holds);
}
