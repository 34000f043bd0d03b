#pragma once

// Regular cube grids over [0,1]^d with an outer margin, per-cube value fields,
// cube sets, and the Chebyshev dilation primitives that realise thickening of
// grid-aligned cube unions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "phest/errors.hpp"

namespace phest {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Index = std::vector<int>;

/// Grid of n cubes per axis over [0,1]^d (step h = 1/n), extended by `margin`
/// cube layers on every side. Extended coordinates run over [0, n + 2 margin).
struct GridSpec {
  int d = 1;
  int n = 1;
  int margin = 0;

  GridSpec() = default;
  GridSpec(int dim, int cubes, int margin_layers) : d(dim), n(cubes), margin(margin_layers) {
    if (d < 1) throw DomainError("GridSpec: dimension must be positive");
    if (n < 1) throw DomainError("GridSpec: n must be positive");
    if (margin < 0) throw DomainError("GridSpec: margin must be non-negative");
  }

  double h() const { return 1.0 / static_cast<double>(n); }
  double cube_volume() const { return std::pow(h(), d); }
  int extent() const { return n + 2 * margin; }

  std::size_t size() const {
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(extent());
    return total;
  }
  std::size_t interior_size() const {
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(n);
    return total;
  }

  /// Row-major stride of axis k (last axis fastest).
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int k = axis + 1; k < d; ++k) s *= static_cast<std::size_t>(extent());
    return s;
  }

  std::size_t flat(const Index& idx) const {
    if (static_cast<int>(idx.size()) != d) throw BoundsError("GridSpec: index arity mismatch");
    std::size_t f = 0;
    for (int k = 0; k < d; ++k) {
      if (idx[k] < 0 || idx[k] >= extent()) throw BoundsError("GridSpec: index outside extended grid");
      f = f * static_cast<std::size_t>(extent()) + static_cast<std::size_t>(idx[k]);
    }
    return f;
  }

  Index unflat(std::size_t f) const {
    Index idx(d);
    for (int k = d - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(f % static_cast<std::size_t>(extent()));
      f /= static_cast<std::size_t>(extent());
    }
    return idx;
  }

  bool is_interior(const Index& idx) const {
    return std::all_of(idx.begin(), idx.end(),
                       [&](int i) { return i >= margin && i < margin + n; });
  }
  bool is_interior(std::size_t f) const { return is_interior(unflat(f)); }

  /// Lower corner of the cube in domain coordinates (margin cubes fall outside [0,1]).
  std::vector<double> lower_corner(const Index& idx) const {
    std::vector<double> x(d);
    for (int k = 0; k < d; ++k) x[k] = static_cast<double>(idx[k] - margin) / n;
    return x;
  }

  /// Interior cube containing a domain point (upper faces clamp into the last cube).
  Index cube_of(const std::vector<double>& x) const {
    Index idx(d);
    for (int k = 0; k < d; ++k) {
      int i = static_cast<int>(std::floor(x[k] * n));
      idx[k] = std::clamp(i, 0, n - 1) + margin;
    }
    return idx;
  }

  bool operator==(const GridSpec&) const = default;
};

/// One extended-real value per cube of the extended grid. Margin cubes hold +inf
/// unless explicitly written. Values are finite or +inf.
struct GridFunction {
  GridSpec spec;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& s, double fill = kInf) : spec(s), values(s.size(), fill) {}

  double& operator[](std::size_t f) { return values[f]; }
  double operator[](std::size_t f) const { return values[f]; }
  double& at(const Index& idx) { return values[spec.flat(idx)]; }
  double at(const Index& idx) const { return values[spec.flat(idx)]; }

  void validate() const {
    if (values.size() != spec.size()) throw ValidationError("GridFunction: value count does not match grid");
    for (double v : values) {
      if (std::isnan(v) || v == -kInf) throw ValidationError("GridFunction: values must be finite or +inf");
    }
  }

  bool has_finite_value() const {
    return std::any_of(values.begin(), values.end(), [](double v) { return v < kInf; });
  }

  bool operator==(const GridFunction&) const = default;
};

/// Set of cubes of an extended grid, stored as sorted flat indices.
struct CubeSet {
  GridSpec spec;
  std::vector<std::size_t> members;

  CubeSet() = default;
  explicit CubeSet(const GridSpec& s) : spec(s) {}
  CubeSet(const GridSpec& s, std::vector<std::size_t> m) : spec(s), members(std::move(m)) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto f : members) {
      if (f >= spec.size()) throw BoundsError("CubeSet: member outside extended grid");
    }
  }

  bool contains(std::size_t f) const { return std::binary_search(members.begin(), members.end(), f); }
  bool contains(const Index& idx) const { return contains(spec.flat(idx)); }
  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }

  bool operator==(const CubeSet&) const = default;
};

namespace detail {

// Visits every axis-aligned line of the grid along `axis`, calling fn(start, stride, length).
template <class Fn>
void for_each_line(const GridSpec& spec, int axis, Fn&& fn) {
  const std::size_t n = static_cast<std::size_t>(spec.extent());
  const std::size_t stride = spec.stride(axis);
  const std::size_t total = spec.size();
  const std::size_t block = stride * n;
  for (std::size_t outer = 0; outer < total; outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) fn(outer + inner, stride, n);
  }
}

// Sliding-window minimum over [i - r, i + r], clipped to the line.
inline void line_min(const double* in, double* out, std::size_t len, std::size_t step, int radius) {
  std::deque<std::size_t> window;
  const std::size_t r = static_cast<std::size_t>(radius);
  std::size_t next = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t hi = std::min(len - 1, i + r);
    while (next <= hi) {
      while (!window.empty() && in[window.back() * step] >= in[next * step]) window.pop_back();
      window.push_back(next);
      ++next;
    }
    const std::size_t lo = i >= r ? i - r : 0;
    while (window.front() < lo) window.pop_front();
    out[i * step] = in[window.front() * step];
  }
}

inline GridFunction min_filter_unchecked(const GridFunction& f, int radius) {
  GridFunction out = f;
  if (radius == 0) return out;
  std::vector<double> scratch(f.values.size());
  for (int axis = 0; axis < f.spec.d; ++axis) {
    for_each_line(f.spec, axis, [&](std::size_t start, std::size_t step, std::size_t len) {
      line_min(out.values.data() + start, scratch.data() + start, len, step, radius);
    });
    out.values.swap(scratch);
  }
  return out;
}

}  // namespace detail

/// Windowed minimum over Chebyshev index balls of the given radius. Sublevel sets
/// of the result are the radius-cube thickenings of the sublevel sets of `f`.
inline GridFunction min_filter(const GridFunction& f, int radius) {
  if (radius < 0) throw DomainError("min_filter: radius must be non-negative");
  if (radius > f.spec.margin) throw BoundsError("min_filter: radius exceeds grid margin");
  return detail::min_filter_unchecked(f, radius);
}

/// Cubes with value <= level.
inline CubeSet cube_sublevel(const GridFunction& f, double level) {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.values[i] <= level) m.push_back(i);
  }
  return CubeSet(f.spec, std::move(m));
}

/// All cubes within Chebyshev index distance `radius` of a member.
inline CubeSet thicken(const CubeSet& s, int radius) {
  if (radius < 0) throw DomainError("thicken: radius must be non-negative");
  for (auto f : s.members) {
    const Index idx = s.spec.unflat(f);
    for (int i : idx) {
      if (i - radius < 0 || i + radius >= s.spec.extent()) {
        throw BoundsError("thicken: dilation reaches outside the extended grid");
      }
    }
  }
  if (radius == 0) return s;
  GridFunction indicator(s.spec, kInf);
  for (auto f : s.members) indicator.values[f] = 0.0;
  return cube_sublevel(detail::min_filter_unchecked(indicator, radius), 0.0);
}

/// Chebyshev index distance between two cubes.
inline int chebyshev_distance(const GridSpec& spec, std::size_t a, std::size_t b) {
  const Index ia = spec.unflat(a);
  const Index ib = spec.unflat(b);
  int dist = 0;
  for (int k = 0; k < spec.d; ++k) dist = std::max(dist, std::abs(ia[k] - ib[k]));
  return dist;
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json grid_function_to_json(const GridFunction& f) {
  nlohmann::json values = nlohmann::json::array();
  for (double v : f.values) {
    if (v == kInf) {
      values.push_back("inf");
    } else {
      values.push_back(v);
    }
  }
  return {{"d", f.spec.d}, {"n", f.spec.n}, {"margin", f.spec.margin}, {"values", std::move(values)}};
}

inline GridFunction grid_function_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "d" && key != "n" && key != "margin" && key != "values") {
      throw ValidationError("GridFunction JSON: unknown key '" + key + "'");
    }
  }
  if (!j.contains("d") || !j.contains("n") || !j.contains("values")) {
    throw ValidationError("GridFunction JSON: missing d, n or values");
  }
  GridSpec spec(j.at("d").get<int>(), j.at("n").get<int>(), j.value("margin", 0));
  GridFunction f(spec);
  const auto& values = j.at("values");
  if (!values.is_array() || values.size() != spec.size()) {
    throw ValidationError("GridFunction JSON: expected " + std::to_string(spec.size()) + " values");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = values[i];
    if (v.is_string()) {
      if (v.get<std::string>() != "inf") throw ValidationError("GridFunction JSON: only \"inf\" strings allowed");
      f.values[i] = kInf;
    } else if (v.is_number()) {
      f.values[i] = v.get<double>();
    } else {
      throw ValidationError("GridFunction JSON: values must be numbers or \"inf\"");
    }
  }
  f.validate();
  return f;
}

inline nlohmann::json cube_set_to_json(const CubeSet& s) {
  nlohmann::json out = nlohmann::json::array();
  for (auto f : s.members) out.push_back(s.spec.unflat(f));
  return out;
}

inline CubeSet cube_set_from_json(const GridSpec& spec, const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("CubeSet JSON: expected a list of index tuples");
  std::vector<std::size_t> members;
  for (const auto& t : j) members.push_back(spec.flat(t.get<Index>()));
  return CubeSet(spec, std::move(members));
}

}  // namespace phest
