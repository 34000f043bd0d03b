#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "phest/bottleneck.hpp"
#include "phest/signal.hpp"

using namespace phest;

namespace {

// 1D sublevel persistence of a sampled function by an elder-rule sweep.
PersistenceDiagram sweep_1d(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<long> parent(v.size(), -1);
  std::function<long(long)> find = [&](long x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  PersistenceDiagram out;
  for (auto i : order) {
    parent[i] = static_cast<long>(i);
    for (long j : {static_cast<long>(i) - 1, static_cast<long>(i) + 1}) {
      if (j < 0 || j >= static_cast<long>(v.size()) || parent[j] < 0) continue;
      long a = find(static_cast<long>(i)), b = find(j);
      if (a == b) continue;
      if (v[a] < v[b] || (v[a] == v[b] && a < b)) std::swap(a, b);  // a is younger
      if (v[a] < v[i]) out.add(0, v[a], v[i]);
      parent[a] = b;
    }
  }
  out.add(0, v[order[0]], kInf);
  return out.canonical();
}

}  // namespace

TEST(Evaluate, InteriorAndBoundary) {
  const auto step = make_signal("step");
  EXPECT_EQ(evaluate(step, {0.2}), 0.0);
  EXPECT_EQ(evaluate(step, {0.8}), 1.0);
  EXPECT_EQ(evaluate(step, {0.5}), 0.0);
  EXPECT_THROW(evaluate(step, {1.5}), DomainError);
}

TEST(Evaluate, ConstantEverywhere) {
  const auto c = make_signal("constant", {{"c", 2.5}});
  for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(evaluate(c, {x, 0.7}), 2.5);
}

TEST(Evaluate, BoxBoundaryTakesMinimum) {
  const auto box = make_signal("box");
  EXPECT_EQ(evaluate(box, {0.25, 0.5}), 0.0);
  EXPECT_EQ(evaluate(box, {0.1, 0.5}), 1.0);
}

TEST(CubeIntegral, Examples) {
  const auto step = make_signal("step");
  GridSpec spec(1, 4, 1);
  EXPECT_EQ(cube_integral(step, {2}, spec), 0.0);  // (0.25, 0.5)
  EXPECT_EQ(cube_integral(step, {4}, spec), 0.25);
  EXPECT_EQ(cube_integral(step, {0}, spec), kInf);
  const auto stripes = make_signal("stripes");
  GridSpec s2(2, 20, 0);
  // Cube [0.3,0.35] x [0, 0.05] lies in the middle stripe.
  EXPECT_DOUBLE_EQ(cube_integral(stripes, {6, 0}, s2), 1.0 / 400);
  // Cube [0.25, 0.3125]: 4/5 at level 0 and 1/5 at level 1.
  GridSpec s3(2, 16, 0);
  EXPECT_NEAR(cube_integral(stripes, {4, 3}, s3), 0.2 / 256, 1e-18);
  const auto r = cube_range(stripes, {4, 3}, s3);
  EXPECT_EQ(r.first, 0.0);
  EXPECT_EQ(r.second, 1.0);
}

TEST(CubeIntegral, DiskTotalConverges) {
  const auto disk = make_signal("disk");
  const double exact = 1.0 - std::numbers::pi * 0.09;
  double prev_err = 1.0;
  for (int n : {16, 64}) {
    const auto t = cube_tables(disk, GridSpec(2, n, 0), 16);
    double total = 0.0;
    for (double v : t.integral.values) total += v;
    const double err = std::abs(total - exact);
    EXPECT_LT(err, 2e-3);
    EXPECT_LE(err, prev_err);
    prev_err = err;
  }
}

TEST(TrueDiagram, Constant) {
  PersistenceDiagram want;
  want.add(0, 0.5, kInf);
  EXPECT_EQ(true_diagram(make_signal("constant")), want.canonical());
}

TEST(TrueDiagram, AxisAlignedCatalog) {
  PersistenceDiagram wells;
  wells.add(0, 0.0, kInf);
  wells.add(0, 0.2, 0.6);
  EXPECT_EQ(true_diagram(make_signal("wells")), wells.canonical());

  PersistenceDiagram ring;
  ring.add(0, 0.0, kInf);
  ring.add(1, 0.0, 1.0);
  EXPECT_EQ(true_diagram(make_signal("square_annulus")), ring.canonical());

  PersistenceDiagram stripes;
  stripes.add(0, 0.0, kInf);
  stripes.add(0, 0.5, 1.0);
  EXPECT_EQ(true_diagram(make_signal("stripes")), stripes.canonical());

  PersistenceDiagram cross;
  cross.add(0, 0.0, kInf);
  cross.add(1, 0.0, 10.0);
  EXPECT_EQ(true_diagram(make_signal("corner_cross")), cross.canonical());
}

TEST(TrueDiagram, Annulus) {
  PersistenceDiagram ring;
  ring.add(0, 0.0, kInf);
  ring.add(1, 0.0, 1.0);
  EXPECT_EQ(true_diagram(make_signal("annulus")), ring.canonical());
}

TEST(TrueDiagram, ChirpMatchesDenseSweep) {
  const auto sig = make_signal("chirp");
  const auto truth = true_diagram(sig);
  std::vector<double> v(200000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = (i + 0.5) / v.size();
    v[i] = x * std::cos(8 * std::numbers::pi * x);
  }
  EXPECT_LT(bottleneck_distance(truth, sweep_1d(v)), 2 * sig.field->lipschitz / sig.oracle_n);
  int long_lived = 0, essential = 0;
  for (const auto& p : truth.points) {
    essential += p.essential();
    long_lived += !p.essential() && p.death - p.birth > 0.1;
  }
  EXPECT_EQ(essential, 1);
  EXPECT_EQ(long_lived, 3);
}

TEST(TrueDiagram, TooCoarseResolutionRejected) {
  // At n = 2 the middle stripe is never sampled, so the (0.5, 1) class is missed.
  EXPECT_THROW(true_diagram(make_signal("stripes"), 2), ValidationError);
}

TEST(Catalog, UnknownNamesAndKeysRejected) {
  EXPECT_THROW(make_signal("nope"), ValidationError);
  EXPECT_THROW(make_signal("box", {{"typo", 1}}), ValidationError);
  EXPECT_THROW(make_signal("box", {{"mu", 1.5}}), DomainError);
  for (const auto& name : catalog_names()) {
    if (name != "label_grid") {
      EXPECT_NO_THROW(make_signal(name)) << name;
    }
  }
}

TEST(Catalog, LabelGrid) {
  GridFunction g(GridSpec(2, 4, 0), 1.0);
  g.at({1, 1}) = 0.0;
  g.at({1, 2}) = 0.0;
  const auto sig = make_signal("label_grid", {{"grid", grid_function_to_json(g)}});
  EXPECT_EQ(sig.d, 2);
  EXPECT_EQ(evaluate(sig, {0.375, 0.375}), 0.0);
  EXPECT_EQ(evaluate(sig, {0.9, 0.9}), 1.0);
  PersistenceDiagram want;
  want.add(0, 0.0, kInf);
  EXPECT_EQ(true_diagram(sig), want.canonical());
}

TEST(Assumptions, ConstantPassesVacuously) {
  const auto rep = validate_assumptions(make_signal("constant"), 20);
  EXPECT_TRUE(rep.ok());
}

TEST(Assumptions, StripesReachCoversClaim) {
  const auto rep = validate_assumptions(make_signal("stripes"), 40);
  EXPECT_TRUE(rep.coverage_ok());
  EXPECT_TRUE(rep.a2_ok());
  EXPECT_TRUE(rep.a3_ok());
  EXPECT_THROW(validate_assumptions(make_signal("stripes"), 41), DomainError);
}

TEST(Assumptions, CrossCornersNeedMuBelowOne) {
  const auto loose = validate_assumptions(make_signal("corner_cross", {{"mu", 0.7}}), 200);
  EXPECT_TRUE(loose.ok());
  const auto tight = validate_assumptions(make_signal("corner_cross", {{"mu", 1.0}}), 200);
  EXPECT_FALSE(tight.a3_ok());
}
