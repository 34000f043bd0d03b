#include <gtest/gtest.h>

#include <cmath>

#include "phest/observation.hpp"

using namespace phest;

TEST(Observation, NoiselessIsExactIntegral) {
  const auto sig = make_signal("stripes");
  GridSpec spec(2, 20, 2);
  const auto tables = cube_tables(sig, spec);
  const auto obs = sample_observation(tables.integral, 0.0, 42);
  EXPECT_EQ(obs.x_values, tables.integral);
  const auto a = obs.averages();
  EXPECT_EQ(a.at({2 + 10, 2}), 1.0);
  EXPECT_EQ(a.at({0, 0}), kInf);
}

TEST(Observation, NegativeThetaRejected) {
  const auto sig = make_signal("step");
  EXPECT_THROW(sample_observation(sig, GridSpec(1, 8, 0), -0.1, 1), DomainError);
}

TEST(Observation, SeedDeterminism) {
  const auto sig = make_signal("box");
  GridSpec spec(2, 16, 1);
  const auto a = sample_observation(sig, spec, 0.3, 7, 3);
  const auto b = sample_observation(sig, spec, 0.3, 7, 3);
  EXPECT_EQ(a.x_values, b.x_values);
  EXPECT_EQ(a.w_values, b.w_values);
  const auto c = sample_observation(sig, spec, 0.3, 7, 4);
  EXPECT_NE(a.w_values, c.w_values);
  const auto d = sample_observation(sig, spec, 0.3, 8, 3);
  EXPECT_NE(a.w_values, d.w_values);
}

TEST(Observation, NoiseMomentsMatchCubeVolume) {
  // Z = W(H) / h^{d/2} should be standard normal; pooled over replicates and cubes.
  GridFunction zero(GridSpec(2, 10, 0), 0.0);
  double sum = 0, sq = 0, cross = 0;
  std::size_t count = 0;
  for (int r = 0; r < 400; ++r) {
    const auto obs = sample_observation(zero, 1.0, 99, r);
    for (std::size_t f = 0; f < obs.spec.size(); ++f) {
      const double z = obs.w_values[f] / 0.1;
      sum += z;
      sq += z * z;
      ++count;
    }
    cross += obs.w_values[0] * obs.w_values[1] / 0.01;
  }
  // Tolerances are four standard errors.
  EXPECT_NEAR(sum / count, 0.0, 4.0 / 200);
  EXPECT_NEAR(sq / count, 1.0, 4.0 * std::sqrt(2.0) / 200);
  EXPECT_LT(std::abs(cross / 400), 4.0 / 20);
}

TEST(Observation, JsonRoundTrip) {
  const auto obs = sample_observation(make_signal("step"), GridSpec(1, 6, 1), 0.2, 5, 1);
  const auto back = observation_from_json(to_json(obs));
  EXPECT_EQ(back.x_values, obs.x_values);
  EXPECT_EQ(back.w_values, obs.w_values);
  EXPECT_EQ(back.theta, obs.theta);
  auto j = to_json(obs);
  j["extra"] = 1;
  EXPECT_THROW(observation_from_json(j), ValidationError);
}

TEST(NoiseNorm, Examples) {
  GridSpec spec(2, 4, 1);
  Observation obs{spec, 0.0, GridFunction(spec, 0.0), GridFunction(spec, 0.0), 0, 0};
  EXPECT_EQ(noise_norm(obs).value, 0.0);
  obs.w_values.at({2, 3}) = 2.0 * spec.cube_volume();
  EXPECT_DOUBLE_EQ(noise_norm(obs).value, 2.0);
  obs.w_values.at({0, 0}) = 100.0;  // margin cubes are never observed
  EXPECT_DOUBLE_EQ(noise_norm(obs).value, 2.0);
}

TEST(Concentration, TrivialEnds) {
  GridSpec spec(1, 10, 0);
  const auto rows = concentration_check(spec, 200, {0.0, 1e3}, 3);
  EXPECT_EQ(rows[0].empirical, 1.0);
  EXPECT_LT(rows[1].envelope, 1.0 / 200);
  EXPECT_EQ(rows[1].empirical, 0.0);
  EXPECT_THROW(concentration_check(spec, 50, {1.0}, 3), DomainError);
}

TEST(Concentration, EnvelopeDominatesAndTailIsMonotone) {
  GridSpec spec(1, 10, 0);
  std::vector<double> t;
  for (int i = 0; i <= 30; ++i) t.push_back(i * 0.5);
  const auto rows = concentration_check(spec, 2000, t, 11);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double sigma = std::sqrt(std::min(rows[i].envelope, 1.0) * 1.0 / 2000);
    EXPECT_LE(rows[i].empirical, rows[i].envelope + 3 * sigma) << "t = " << rows[i].t;
    if (i) {
      EXPECT_LE(rows[i].empirical, rows[i - 1].empirical);
    }
  }
}

TEST(CounterNormal, IndependentOfEvaluationOrder) {
  const CounterNormal a(5, 2);
  const double x = a(1000), y = a(3);
  EXPECT_EQ(CounterNormal(5, 2)(3), y);
  EXPECT_EQ(CounterNormal(5, 2)(1000), x);
}
