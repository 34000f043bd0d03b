#pragma once

// The two-step estimator: cube averages a(H) = X(H)/h^d, thickened sublevel
// sets g_dom = min_filter(a, ceil r1), their further thickening
// g_cod = min_filter(a, ceil r1 + ceil r2), and the image diagram of the pair.
// Also the plug-in baseline and per-run certificates.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phest/bottleneck.hpp"
#include "phest/errors.hpp"
#include "phest/grid.hpp"
#include "phest/image_persistence.hpp"
#include "phest/observation.hpp"
#include "phest/signal.hpp"

namespace phest {

/// Ceiling that ignores rounding noise just above an integer.
inline int tolerant_ceil(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

struct EstimatorParams {
  RegularityParams regularity;
  double r1 = 0.0;
  double r2 = 0.0;
  int k1 = 0;      ///< ceil(r1), first thickening in cubes
  int k2 = 0;      ///< ceil(r2), second thickening in cubes
  int n = 1;       ///< cubes per axis, h = 1/n
  double theta = 0.0;
  bool on_theorem = true;  ///< h satisfies both upper bounds below

  double h() const { return 1.0 / n; }
  int margin() const { return k1 + k2; }
  GridSpec grid() const { return GridSpec(regularity.d, n, margin()); }

  /// h <= R_mu / (2 ceil r2).
  bool step_bound_holds() const { return 2.0 * k2 * h() <= regularity.r_mu * (1.0 + 1e-12); }
  /// h < R_mu mu / sqrt(d).
  bool inclusion_bound_holds() const {
    return h() < regularity.r_mu * regularity.mu / std::sqrt(static_cast<double>(regularity.d));
  }
};

inline constexpr int kDefaultMaxN = 2048;

/// Thickening radii and grid step from the regularity: r1 = sqrt(d)/mu,
/// r2 = sqrt(d)(1 + 2/mu^2)(sqrt(d) + ceil r1), h = R_mu / (2 ceil r2) rounded
/// down to 1/n.
inline EstimatorParams compute_params(const RegularityParams& reg, double theta, int max_n = kDefaultMaxN) {
  reg.validate();
  if (!(theta >= 0.0) || std::isinf(theta)) throw DomainError("compute_params: theta must be finite and >= 0");
  EstimatorParams p;
  p.regularity = reg;
  p.theta = theta;
  const double sd = std::sqrt(static_cast<double>(reg.d));
  p.r1 = sd / reg.mu;
  p.k1 = tolerant_ceil(p.r1);
  p.r2 = sd * (1.0 + 2.0 / (reg.mu * reg.mu)) * (sd + p.k1);
  p.k2 = tolerant_ceil(p.r2);
  const double n_exact = 2.0 * p.k2 / reg.r_mu;
  if (n_exact > max_n) {
    std::ostringstream msg;
    msg << "compute_params: grid needs n = " << std::ceil(n_exact - 1e-9) << " cubes per axis (cap " << max_n
        << "); increase R_mu or mu, or pass an explicit n override";
    throw ResourceError(msg.str());
  }
  p.n = std::max(1, tolerant_ceil(n_exact));
  p.on_theorem = p.step_bound_holds() && p.inclusion_bound_holds();
  if (!p.on_theorem) throw ConsistencyError("compute_params: derived step violates its own bounds");
  return p;
}

/// Same thickenings on a user-chosen grid; flags the run as outside the guaranteed range when
/// the step exceeds either bound.
inline EstimatorParams with_n_override(EstimatorParams p, int n) {
  if (n < 1) throw DomainError("with_n_override: n must be positive");
  p.n = n;
  p.on_theorem = p.step_bound_holds() && p.inclusion_bound_holds();
  return p;
}

inline nlohmann::json to_json(const EstimatorParams& p) {
  return {{"d", p.regularity.d}, {"mu", p.regularity.mu}, {"r_mu", p.regularity.r_mu}, {"r1", p.r1},
          {"r2", p.r2},          {"k1", p.k1},            {"k2", p.k2},                 {"n", p.n},
          {"h", p.h()},          {"theta", p.theta},      {"on_theorem", p.on_theorem}};
}

/// The filtration pair (g_dom, g_cod) of an observation.
inline FiltrationPair estimator_pair(const Observation& obs, const EstimatorParams& params) {
  if (obs.spec.d != params.regularity.d || obs.spec.n != params.n) {
    throw ValidationError("estimate_diagram: observation grid does not match the parameters");
  }
  if (obs.spec.margin < params.margin()) {
    throw BoundsError("estimate_diagram: grid margin " + std::to_string(obs.spec.margin) + " below ceil r1 + ceil r2 = " +
                      std::to_string(params.margin()));
  }
  const auto a = obs.averages();
  return make_filtration_pair(min_filter(a, params.k1), min_filter(a, params.k1 + params.k2));
}

inline PersistenceDiagram estimate_diagram(const Observation& obs, const EstimatorParams& params) {
  return image_diagram(estimator_pair(obs, params));
}

/// Sublevel diagram of the raw cube averages (no thickening, no image step).
inline PersistenceDiagram plugin_diagram(const Observation& obs) { return sublevel_diagram(obs.averages()); }

// ---- certificates ---------------------------------------------------------------

struct LevelCheck {
  double lambda = 0.0;
  std::size_t interior_violations = 0;  ///< cubes with f <= lambda - eps throughout but a(H) > lambda
  std::size_t lower_violations = 0;  ///< cubes meeting {f <= lambda - eps} outside g_dom <= lambda
  std::size_t upper_violations = 0;  ///< cubes with g_dom <= lambda too far from {f <= lambda + eps}
};

struct Certificate {
  std::vector<double> distance_per_degree;
  double distance = 0.0;
  double noise_norm = 0.0;
  double bound = 0.0;  ///< 2 theta ||W||_h
  bool bound_holds = false;
  bool on_theorem = true;
  bool essential_match = true;  ///< one essential H0 class in both diagrams
  std::vector<LevelCheck> levels;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  bool inclusions_hold() const {
    for (const auto& l : levels) {
      if (l.interior_violations || l.lower_violations || l.upper_violations) return false;
    }
    return true;
  }
  /// All checks hold. Runs outside the guaranteed range carry no guarantee, so a failure there is advisory.
  bool passed() const { return bound_holds && essential_match && inclusions_hold(); }
};

namespace detail {

inline std::size_t essential_h0(const PersistenceDiagram& d) {
  std::size_t c = 0;
  for (const auto& p : d.points) c += p.degree == 0 && p.essential();
  return c;
}

}  // namespace detail

/// Compares an estimate with the truth and spot-checks the sandwich
/// F_{lambda-eps} in F^_lambda in F_{lambda+eps}^{(sqrt d + ceil r1) h},
/// eps = theta ||W||_h, at five random levels. `tables` holds the signal's cube
/// integrals and open-cube ranges on the observation grid.
inline Certificate certify_run(const Observation& obs, const EstimatorParams& params, const PersistenceDiagram& estimate,
                               const PersistenceDiagram& truth, const CubeTables& tables) {
  Certificate c;
  c.seed = obs.seed;
  c.replicate = obs.replicate;
  c.on_theorem = params.on_theorem;
  const int top = std::max({params.regularity.d - 1, estimate.max_degree(), truth.max_degree(), 0});
  for (int s = 0; s <= top; ++s) {
    const double db = bottleneck_distance(estimate, truth, s);
    c.distance_per_degree.push_back(db);
    c.distance = std::max(c.distance, db);
  }
  c.noise_norm = noise_norm(obs).value;
  c.bound = 2.0 * obs.theta * c.noise_norm;
  c.bound_holds = c.distance <= c.bound + 1e-9;
  c.essential_match = detail::essential_h0(estimate) == 1 && detail::essential_h0(truth) == 1;

  const double eps = obs.theta * c.noise_norm;
  const auto a = obs.averages();
  const auto g_dom = min_filter(a, params.k1);
  const double sd = std::sqrt(static_cast<double>(params.regularity.d));
  const int reach = static_cast<int>(std::floor(sd + params.k1 + 0.5));
  double lo = kInf, hi = -kInf;
  for (std::size_t f = 0; f < tables.min.values.size(); ++f) {
    if (tables.min[f] < kInf) {
      lo = std::min(lo, tables.min[f]);
      hi = std::max(hi, tables.max[f]);
    }
  }
  const double pad = 0.1 * (hi - lo) + eps + 1e-3;
  std::mt19937_64 rng(splitmix64(obs.seed ^ splitmix64(obs.replicate + 0x51ed27)));
  std::uniform_real_distribution<double> pick(lo - pad, hi + pad);
  for (int i = 0; i < 5; ++i) {
    LevelCheck lc;
    lc.lambda = pick(rng);
    GridFunction near(tables.min.spec);
    for (std::size_t f = 0; f < near.values.size(); ++f) {
      near[f] = tables.min[f] <= lc.lambda + eps ? 0.0 : kInf;
    }
    const auto within = detail::min_filter_unchecked(near, reach);
    for (std::size_t f = 0; f < a.values.size(); ++f) {
      if (tables.min[f] == kInf) continue;  // margin
      if (tables.max[f] <= lc.lambda - eps && !(a[f] <= lc.lambda + 1e-9)) ++lc.interior_violations;
      if (tables.min[f] <= lc.lambda - eps && !(g_dom[f] <= lc.lambda)) ++lc.lower_violations;
    }
    for (std::size_t f = 0; f < a.values.size(); ++f) {
      if (g_dom[f] <= lc.lambda && within[f] != 0.0) ++lc.upper_violations;
    }
    c.levels.push_back(lc);
  }
  return c;
}

inline nlohmann::json to_json(const Certificate& c) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : c.levels) {
    levels.push_back({{"lambda", l.lambda},
                      {"interior_violations", l.interior_violations},
                      {"lower_violations", l.lower_violations},
                      {"upper_violations", l.upper_violations}});
  }
  const auto real = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
  nlohmann::json per_degree = nlohmann::json::array();
  for (double v : c.distance_per_degree) per_degree.push_back(real(v));
  return {{"seed", c.seed},
          {"replicate", c.replicate},
          {"distance_per_degree", per_degree},
          {"distance", real(c.distance)},
          {"noise_norm", c.noise_norm},
          {"bound", c.bound},
          {"bound_holds", c.bound_holds},
          {"on_theorem", c.on_theorem},
          {"advisory", !c.on_theorem},
          {"essential_match", c.essential_match},
          {"inclusion_checks", levels},
          {"passed", c.passed()}};
}

}  // namespace phest
