#pragma once

// Discretised white-noise observations: X(H) = int_H f + theta W(H) per interior
// cube, with W(H) = h^{d/2} Z_H and Z_H i.i.d. standard normal.
//
// Z_H comes from a counter-based generator: splitmix64 of (seed, replicate,
// cube index) feeds one Box-Muller draw, so any replicate can be regenerated
// independently of the others.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "phest/errors.hpp"
#include "phest/grid.hpp"
#include "phest/signal.hpp"

namespace phest {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic standard normal for (seed, replicate, counter).
class CounterNormal {
 public:
  CounterNormal(std::uint64_t seed, std::uint64_t replicate)
      : key_(splitmix64(splitmix64(seed) ^ (replicate * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) {}

  double operator()(std::uint64_t counter) const {
    const std::uint64_t a = splitmix64(key_ + 2 * counter);
    const std::uint64_t b = splitmix64(key_ + 2 * counter + 1);
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

struct Observation {
  GridSpec spec;
  double theta = 0.0;
  GridFunction x_values;  ///< X(H) on interior cubes, +inf on the margin
  GridFunction w_values;  ///< W(H) on interior cubes, 0 on the margin
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  /// Cube averages a(H) = X(H) / h^d.
  GridFunction averages() const {
    GridFunction a(spec);
    const double hd = spec.cube_volume();
    for (std::size_t f = 0; f < a.values.size(); ++f) {
      if (x_values[f] < kInf) a[f] = x_values[f] / hd;
    }
    return a;
  }
};

/// Observation from precomputed cube integrals (margin entries +inf).
inline Observation sample_observation(const GridFunction& integrals, double theta, std::uint64_t seed,
                                      std::uint64_t replicate = 0) {
  if (!(theta >= 0.0) || std::isinf(theta)) throw DomainError("sample_observation: theta must be finite and >= 0");
  const GridSpec& spec = integrals.spec;
  Observation obs{spec, theta, GridFunction(spec), GridFunction(spec, 0.0), seed, replicate};
  const CounterNormal normal(seed, replicate);
  const double scale = std::sqrt(spec.cube_volume());
  for (std::size_t f = 0; f < spec.size(); ++f) {
    if (!spec.is_interior(f)) continue;
    obs.w_values[f] = scale * normal(f);
    obs.x_values[f] = integrals[f] + theta * obs.w_values[f];
  }
  return obs;
}

inline Observation sample_observation(const SignalSpec& sig, const GridSpec& spec, double theta, std::uint64_t seed,
                                      std::uint64_t replicate = 0, int subsamples = 8) {
  if (!(theta >= 0.0)) throw DomainError("sample_observation: theta must be >= 0");
  return sample_observation(cube_tables(sig, spec, subsamples).integral, theta, seed, replicate);
}

struct NoiseNorm {
  double value = 0.0;  ///< max over interior cubes of |W(H)| / h^d
};

inline NoiseNorm noise_norm(const Observation& obs) {
  double m = 0.0;
  for (std::size_t f = 0; f < obs.spec.size(); ++f) {
    if (obs.spec.is_interior(f)) m = std::max(m, std::abs(obs.w_values[f]));
  }
  return {m / obs.spec.cube_volume()};
}

/// Union-bound envelope 2 (1/h)^d exp(-h^d t^2 / 2) for P(||W||_h >= t).
inline double noise_tail_envelope(const GridSpec& spec, double t) {
  const double hd = spec.cube_volume();
  return 2.0 / hd * std::exp(-hd * t * t / 2.0);
}

struct ConcentrationRow {
  double t = 0.0;
  double empirical = 0.0;  ///< fraction of replicates with ||W||_h >= t
  double envelope = 0.0;
};

/// Empirical tail of ||W||_h over `reps` replicates next to the analytic envelope.
inline std::vector<ConcentrationRow> concentration_check(const GridSpec& spec, int reps,
                                                         const std::vector<double>& t_grid, std::uint64_t seed) {
  if (reps < 100) throw DomainError("concentration_check: reps must be >= 100");
  const double scale = 1.0 / std::sqrt(spec.cube_volume());  // ||W||_h = h^{-d/2} max |Z_H|
  std::vector<double> norms(reps);
  for (int r = 0; r < reps; ++r) {
    const CounterNormal normal(seed, static_cast<std::uint64_t>(r));
    double m = 0.0;
    for (std::size_t f = 0; f < spec.size(); ++f) {
      if (spec.is_interior(f)) m = std::max(m, std::abs(normal(f)));
    }
    norms[r] = m * scale;
  }
  std::vector<ConcentrationRow> out;
  for (double t : t_grid) {
    const auto hits = std::count_if(norms.begin(), norms.end(), [t](double v) { return v >= t; });
    out.push_back({t, static_cast<double>(hits) / reps, noise_tail_envelope(spec, t)});
  }
  return out;
}

inline nlohmann::json to_json(const Observation& obs) {
  return {{"theta", obs.theta},
          {"seed", obs.seed},
          {"replicate", obs.replicate},
          {"x_values", grid_function_to_json(obs.x_values)},
          {"w_values", grid_function_to_json(obs.w_values)}};
}

inline Observation observation_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "theta" && key != "seed" && key != "replicate" && key != "x_values" && key != "w_values") {
      throw ValidationError("Observation JSON: unknown key '" + key + "'");
    }
  }
  Observation obs;
  obs.theta = j.at("theta").get<double>();
  obs.seed = j.at("seed").get<std::uint64_t>();
  obs.replicate = j.value("replicate", std::uint64_t{0});
  obs.x_values = grid_function_from_json(j.at("x_values"));
  obs.w_values = grid_function_from_json(j.at("w_values"));
  obs.spec = obs.x_values.spec;
  if (!(obs.w_values.spec == obs.spec)) throw ValidationError("Observation JSON: grids differ");
  return obs;
}

}  // namespace phest
