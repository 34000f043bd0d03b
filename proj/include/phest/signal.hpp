#pragma once

// Piecewise-constant signals on [0,1]^d built from an ordered list of regions
// (later regions paint over earlier ones, region 0 is the background), plus
// smooth signals given by a field callback. Cube integrals, the fine-grid
// ground-truth diagram, assumption validation and a named catalog.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "phest/bottleneck.hpp"
#include "phest/diagram.hpp"
#include "phest/errors.hpp"
#include "phest/geometry.hpp"
#include "phest/grid.hpp"
#include "phest/image_persistence.hpp"

namespace phest {

/// Claimed regularity (mu, R_mu) of the discontinuity set.
struct RegularityParams {
  double mu = 1.0;
  double r_mu = 1.0;
  int d = 1;

  void validate() const {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("RegularityParams: mu must lie in (0,1]");
    if (!(r_mu > 0.0) || std::isinf(r_mu)) throw DomainError("RegularityParams: R_mu must be positive and finite");
    if (d < 1) throw DomainError("RegularityParams: dimension must be positive");
  }
};

enum class RegionKind { axis_box, disk, annulus, halfplane_union, cross_with_corners, custom_label_grid };

inline std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::axis_box: return "axis_box";
    case RegionKind::disk: return "disk";
    case RegionKind::annulus: return "annulus";
    case RegionKind::halfplane_union: return "halfplane_union";
    case RegionKind::cross_with_corners: return "cross_with_corners";
    case RegionKind::custom_label_grid: return "custom_label_grid";
  }
  return "?";
}

struct HalfSpace {
  Point normal;  ///< {x : normal . x <= offset}
  double offset = 0.0;
};

/// One region M_i. Membership is closed; boundaries only matter through the
/// minimum rule applied by `evaluate`, and through sampling at interior points.
struct RegionDescriptor {
  RegionKind kind = RegionKind::axis_box;
  std::string name;
  // axis_box
  Point lo, hi;
  // disk, annulus
  Point center;
  double r_in = 0.0, r_out = 0.0;
  // halfplane_union
  std::vector<HalfSpace> halfspaces;
  // cross_with_corners (2D): square frame of half-size `a` around `center`,
  // cut into four bars of width `w`, consecutive bars meeting at a corner point
  // when the gap `g` is zero and separated by `g` along each bar otherwise.
  double a = 0.0, w = 0.0, g = 0.0;
  // custom_label_grid: cells of `labels` whose value equals `label`
  std::shared_ptr<const GridFunction> labels;
  double label = 0.0;

  static RegionDescriptor box(std::string name, Point lo, Point hi) {
    RegionDescriptor r;
    r.kind = RegionKind::axis_box;
    r.name = std::move(name);
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    return r;
  }
  static RegionDescriptor disk(std::string name, Point center, double radius) {
    RegionDescriptor r;
    r.kind = RegionKind::disk;
    r.name = std::move(name);
    r.center = std::move(center);
    r.r_out = radius;
    return r;
  }
  static RegionDescriptor annulus(std::string name, Point center, double r_in, double r_out) {
    RegionDescriptor r = disk(std::move(name), std::move(center), r_out);
    r.kind = RegionKind::annulus;
    r.r_in = r_in;
    return r;
  }
  static RegionDescriptor halfplanes(std::string name, std::vector<HalfSpace> hs) {
    RegionDescriptor r;
    r.kind = RegionKind::halfplane_union;
    r.name = std::move(name);
    r.halfspaces = std::move(hs);
    return r;
  }
  static RegionDescriptor cross(std::string name, Point center, double a, double w, double g) {
    RegionDescriptor r;
    r.kind = RegionKind::cross_with_corners;
    r.name = std::move(name);
    r.center = std::move(center);
    r.a = a;
    r.w = w;
    r.g = g;
    return r;
  }
  static RegionDescriptor label_cells(std::string name, std::shared_ptr<const GridFunction> grid, double value) {
    RegionDescriptor r;
    r.kind = RegionKind::custom_label_grid;
    r.name = std::move(name);
    r.labels = std::move(grid);
    r.label = value;
    return r;
  }

  /// The four bars of a cross as boxes.
  std::vector<std::pair<Point, Point>> cross_bars() const {
    const double cx = center[0], cy = center[1];
    const double inner_lo = -a + w + g / 2, inner_hi = a - w - g / 2;
    return {
        {{cx - a, cy + inner_lo}, {cx - a + w, cy + inner_hi}},  // left
        {{cx + a - w, cy + inner_lo}, {cx + a, cy + inner_hi}},  // right
        {{cx + inner_lo, cy - a}, {cx + inner_hi, cy - a + w}},  // bottom
        {{cx + inner_lo, cy + a - w}, {cx + inner_hi, cy + a}},  // top
    };
  }

  void validate(int d) const {
    const auto dim_ok = [d](const Point& p) { return static_cast<int>(p.size()) == d; };
    switch (kind) {
      case RegionKind::axis_box:
        if (!dim_ok(lo) || !dim_ok(hi)) throw ValidationError("axis_box '" + name + "': corner dimension mismatch");
        for (int k = 0; k < d; ++k) {
          if (!(lo[k] < hi[k])) throw ValidationError("axis_box '" + name + "': empty box");
        }
        break;
      case RegionKind::disk:
      case RegionKind::annulus:
        if (!dim_ok(center)) throw ValidationError("disk '" + name + "': centre dimension mismatch");
        if (!(r_out > 0.0)) throw ValidationError("disk '" + name + "': radius must be positive");
        if (kind == RegionKind::annulus && !(r_in > 0.0 && r_in < r_out)) {
          throw ValidationError("annulus '" + name + "': need 0 < r_in < r_out");
        }
        break;
      case RegionKind::halfplane_union:
        if (halfspaces.empty()) throw ValidationError("halfplane_union '" + name + "': no half-spaces");
        for (const auto& h : halfspaces) {
          if (!dim_ok(h.normal)) throw ValidationError("halfplane_union '" + name + "': normal dimension mismatch");
        }
        break;
      case RegionKind::cross_with_corners:
        if (d != 2 || !dim_ok(center)) throw ValidationError("cross_with_corners '" + name + "': two-dimensional only");
        if (!(w > 0.0 && a > 0.0 && g >= 0.0 && 2 * w + g < 2 * a)) {
          throw ValidationError("cross_with_corners '" + name + "': need w > 0, g >= 0, 2w + g < 2a");
        }
        break;
      case RegionKind::custom_label_grid:
        if (!labels || labels->spec.d != d || labels->spec.margin != 0) {
          throw ValidationError("custom_label_grid '" + name + "': need a margin-free label grid of matching dimension");
        }
        break;
    }
  }

  bool contains(const Point& x) const {
    const auto in_box = [&](const Point& l, const Point& h) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < l[k] || x[k] > h[k]) return false;
      }
      return true;
    };
    switch (kind) {
      case RegionKind::axis_box: return in_box(lo, hi);
      case RegionKind::disk: return squared_distance(x, center) <= r_out * r_out;
      case RegionKind::annulus: {
        const double s = squared_distance(x, center);
        return s >= r_in * r_in && s <= r_out * r_out;
      }
      case RegionKind::halfplane_union:
        for (const auto& h : halfspaces) {
          double dot = 0.0;
          for (std::size_t k = 0; k < x.size(); ++k) dot += h.normal[k] * x[k];
          if (dot <= h.offset) return true;
        }
        return false;
      case RegionKind::cross_with_corners:
        for (const auto& [l, h] : cross_bars()) {
          if (in_box(l, h)) return true;
        }
        return false;
      case RegionKind::custom_label_grid: {
        const auto idx = labels->spec.cube_of(x);
        return labels->at(idx) == label;
      }
    }
    return false;
  }

  bool axis_aligned() const {
    switch (kind) {
      case RegionKind::axis_box:
      case RegionKind::cross_with_corners:
      case RegionKind::custom_label_grid: return true;
      case RegionKind::halfplane_union:
        return std::all_of(halfspaces.begin(), halfspaces.end(), [](const HalfSpace& h) {
          return std::count_if(h.normal.begin(), h.normal.end(), [](double v) { return v != 0.0; }) == 1;
        });
      default: return false;
    }
  }

  /// Coordinates along `axis` where membership can change (axis-aligned kinds).
  std::vector<double> breakpoints(int axis) const {
    std::vector<double> out;
    switch (kind) {
      case RegionKind::axis_box:
        out = {lo[axis], hi[axis]};
        break;
      case RegionKind::cross_with_corners:
        for (const auto& [l, h] : cross_bars()) {
          out.push_back(l[axis]);
          out.push_back(h[axis]);
        }
        break;
      case RegionKind::halfplane_union:
        for (const auto& h : halfspaces) {
          if (h.normal[axis] != 0.0) out.push_back(h.offset / h.normal[axis]);
        }
        break;
      case RegionKind::custom_label_grid:
        for (int i = 1; i < labels->spec.n; ++i) out.push_back(static_cast<double>(i) / labels->spec.n);
        break;
      default: break;
    }
    return out;
  }
};

/// Smooth signal: values from a callback with a Lipschitz constant.
struct SmoothField {
  std::function<double(const Point&)> value;
  double lipschitz = 0.0;
};

struct SignalSpec {
  std::string name;
  int d = 1;
  std::vector<RegionDescriptor> regions;  ///< painter's order; region 0 is the background
  std::vector<double> levels;             ///< level of each region
  RegularityParams regularity;
  std::shared_ptr<const SmoothField> field;  ///< set for smooth signals; regions unused
  int oracle_n = 64;                         ///< resolution at which the ground truth is exact or converged

  bool smooth() const { return field != nullptr; }

  bool axis_aligned() const {
    return !smooth() && std::all_of(regions.begin(), regions.end(), [](const auto& r) { return r.axis_aligned(); });
  }

  void validate() const {
    if (d < 1) throw ValidationError("SignalSpec: dimension must be positive");
    regularity.validate();
    if (regularity.d != d) throw ValidationError("SignalSpec: regularity dimension mismatch");
    if (smooth()) {
      if (!field->value) throw ValidationError("SignalSpec: smooth field without a value callback");
      return;
    }
    if (regions.empty()) throw ValidationError("SignalSpec: at least one region required");
    if (levels.size() != regions.size()) throw ValidationError("SignalSpec: one level per region required");
    for (double v : levels) {
      if (!std::isfinite(v)) throw ValidationError("SignalSpec: levels must be finite");
    }
    for (const auto& r : regions) r.validate(d);
  }

  /// Index of the topmost region containing x, or -1 when no region does.
  int label(const Point& x) const {
    for (int i = static_cast<int>(regions.size()) - 1; i >= 0; --i) {
      if (regions[i].contains(x)) return i;
    }
    return -1;
  }

  /// Value at a point interior to a region (no boundary rule applied).
  double value_at(const Point& x) const {
    if (smooth()) return field->value(x);
    const int l = label(x);
    if (l < 0) throw ValidationError("SignalSpec '" + name + "': point not covered by any region");
    return levels[l];
  }

  /// Distinct breakpoints along each axis, for axis-aligned signals.
  std::vector<std::vector<double>> axis_breakpoints() const {
    std::vector<std::vector<double>> out(d);
    for (int k = 0; k < d; ++k) {
      for (const auto& r : regions) {
        for (double b : r.breakpoints(k)) out[k].push_back(b);
      }
      std::sort(out[k].begin(), out[k].end());
      out[k].erase(std::unique(out[k].begin(), out[k].end()), out[k].end());
    }
    return out;
  }
};

namespace detail {

inline void check_in_domain(const Point& x, int d) {
  if (static_cast<int>(x.size()) != d) throw DomainError("evaluate: dimension mismatch");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("evaluate: point outside the unit cube");
  }
}

// Offsets in {-1,0,1}^d.
inline std::vector<std::vector<int>> neighbour_offsets(int d) {
  std::vector<std::vector<int>> out{{}};
  for (int k = 0; k < d; ++k) {
    std::vector<std::vector<int>> next;
    for (const auto& o : out) {
      for (int s = -1; s <= 1; ++s) {
        auto e = o;
        e.push_back(s);
        next.push_back(e);
      }
    }
    out.swap(next);
  }
  return out;
}

}  // namespace detail

/// f(x), with boundary points taking the minimum level of the adjacent regions.
inline double evaluate(const SignalSpec& sig, const Point& x) {
  detail::check_in_domain(x, sig.d);
  if (sig.smooth()) return sig.field->value(x);
  constexpr double eps = 1e-9;
  double best = kInf;
  for (const auto& o : detail::neighbour_offsets(sig.d)) {
    Point y = x;
    bool inside = true;
    for (int k = 0; k < sig.d; ++k) {
      y[k] += eps * o[k];
      inside = inside && y[k] >= 0.0 && y[k] <= 1.0;
    }
    if (!inside) continue;
    const int l = sig.label(y);
    if (l >= 0) best = std::min(best, sig.levels[l]);
  }
  if (best == kInf) throw ValidationError("evaluate: point not covered by any region");
  return best;
}

// ---- cube integrals -------------------------------------------------------------

/// Integral of f over a cube together with the range of f on the open cube.
struct CubeMoments {
  double integral = 0.0;
  double min = kInf;
  double max = -kInf;
};

namespace detail {

// Sub-cells of one cube cut along the signal's breakpoints, in cube-local units [0,1].
inline std::vector<std::vector<double>> local_cuts(const std::vector<std::vector<double>>& bps, const GridSpec& spec,
                                                   const Index& idx) {
  constexpr double snap = 1e-9;
  std::vector<std::vector<double>> cuts(spec.d);
  for (int k = 0; k < spec.d; ++k) {
    const double origin = idx[k] - spec.margin;
    cuts[k].push_back(0.0);
    const double lo = origin / spec.n, hi = (origin + 1) / spec.n;
    auto it = std::upper_bound(bps[k].begin(), bps[k].end(), lo - 1.0 / spec.n * snap);
    for (; it != bps[k].end() && *it < hi + 1.0 / spec.n * snap; ++it) {
      const double u = *it * spec.n - origin;
      if (u > snap && u < 1.0 - snap) cuts[k].push_back(u);
    }
    cuts[k].push_back(1.0);
  }
  return cuts;
}

inline CubeMoments exact_moments(const SignalSpec& sig, const std::vector<std::vector<double>>& bps,
                                 const GridSpec& spec, const Index& idx) {
  const auto cuts = local_cuts(bps, spec, idx);
  const int d = spec.d;
  CubeMoments m;
  std::vector<std::size_t> pos(d, 0);
  Point x(d);
  const double hd = spec.cube_volume();
  while (true) {
    double frac = 1.0;
    for (int k = 0; k < d; ++k) {
      const double a = cuts[k][pos[k]], b = cuts[k][pos[k] + 1];
      frac *= b - a;
      x[k] = (idx[k] - spec.margin + 0.5 * (a + b)) / spec.n;
    }
    const double v = sig.value_at(x);
    m.integral += v * frac * hd;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
    int k = d - 1;
    while (k >= 0 && ++pos[k] + 1 == cuts[k].size()) pos[k--] = 0;
    if (k < 0) break;
  }
  return m;
}

inline CubeMoments sampled_moments(const SignalSpec& sig, const GridSpec& spec, const Index& idx, int subsamples) {
  const int d = spec.d;
  CubeMoments m;
  std::vector<int> pos(d, 0);
  Point x(d);
  double sum = 0.0;
  std::size_t count = 0;
  while (true) {
    for (int k = 0; k < d; ++k) x[k] = (idx[k] - spec.margin + (pos[k] + 0.5) / subsamples) / spec.n;
    const double v = sig.value_at(x);
    sum += v;
    ++count;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
    int k = d - 1;
    while (k >= 0 && ++pos[k] == subsamples) pos[k--] = 0;
    if (k < 0) break;
  }
  m.integral = sum / static_cast<double>(count) * spec.cube_volume();
  return m;
}

inline void check_cube(const SignalSpec& sig, const GridSpec& spec, const Index& idx) {
  if (spec.d != sig.d) throw ValidationError("cube_integral: grid and signal dimensions differ");
  if (static_cast<int>(idx.size()) != spec.d) throw BoundsError("cube_integral: index arity mismatch");
  for (int i : idx) {
    if (i < 0 || i >= spec.extent()) throw BoundsError("cube_integral: index outside extended grid");
  }
}

}  // namespace detail

/// Integral and open-cube range of f over one cube. Exact for axis-aligned
/// signals; otherwise midpoint subsampling with subsamples^d points. Margin
/// cubes report +inf.
inline CubeMoments cube_moments(const SignalSpec& sig, const Index& cube, const GridSpec& spec, int subsamples = 8) {
  detail::check_cube(sig, spec, cube);
  if (subsamples < 1) throw DomainError("cube_integral: subsamples must be positive");
  if (!spec.is_interior(cube)) return {kInf, kInf, kInf};
  if (sig.axis_aligned()) return detail::exact_moments(sig, sig.axis_breakpoints(), spec, cube);
  return detail::sampled_moments(sig, spec, cube, subsamples);
}

inline double cube_integral(const SignalSpec& sig, const Index& cube, const GridSpec& spec, int subsamples = 8) {
  return cube_moments(sig, cube, spec, subsamples).integral;
}

/// (min, max) of f over the open cube.
inline std::pair<double, double> cube_range(const SignalSpec& sig, const Index& cube, const GridSpec& spec,
                                            int subsamples = 8) {
  const auto m = cube_moments(sig, cube, spec, subsamples);
  return {m.min, m.max};
}

/// Integrals, minima and maxima for every cube of a grid (margin cubes +inf).
struct CubeTables {
  GridFunction integral, min, max;
};

inline CubeTables cube_tables(const SignalSpec& sig, const GridSpec& spec, int subsamples = 8) {
  sig.validate();
  if (spec.d != sig.d) throw ValidationError("cube_tables: grid and signal dimensions differ");
  CubeTables t{GridFunction(spec), GridFunction(spec), GridFunction(spec)};
  const bool exact = sig.axis_aligned();
  const auto bps = exact ? sig.axis_breakpoints() : std::vector<std::vector<double>>{};
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    if (!spec.is_interior(idx)) continue;
    const auto m = exact ? detail::exact_moments(sig, bps, spec, idx) : detail::sampled_moments(sig, spec, idx, subsamples);
    t.integral[f] = m.integral;
    t.min[f] = m.min;
    t.max[f] = m.max;
  }
  return t;
}

// ---- ground truth -------------------------------------------------------------

/// f sampled at cube centres of an n-grid without margin.
inline GridFunction centre_samples(const SignalSpec& sig, int n) {
  GridSpec spec(sig.d, n, 0);
  GridFunction g(spec);
  Point x(sig.d);
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    for (int k = 0; k < sig.d; ++k) x[k] = (idx[k] + 0.5) / n;
    g[f] = sig.value_at(x);
  }
  return g;
}

/// Tolerance of the resolution-doubling self-check of the truth oracle.
inline double truth_tolerance(const SignalSpec& sig, int oracle_n) {
  if (sig.smooth()) return sig.field->lipschitz * std::sqrt(static_cast<double>(sig.d)) / oracle_n;
  return 1e-9;
}

/// Sublevel diagram of f from cube-centre labels at resolution oracle_n (face
/// values are minima over incident cubes). Throws when the diagram at 2 oracle_n
/// differs by more than the resolution tolerance.
inline PersistenceDiagram true_diagram(const SignalSpec& sig, int oracle_n) {
  sig.validate();
  if (oracle_n < 1) throw DomainError("true_diagram: oracle_n must be positive");
  const auto coarse = sublevel_diagram(centre_samples(sig, oracle_n));
  const auto fine = sublevel_diagram(centre_samples(sig, 2 * oracle_n));
  const double gap = bottleneck_distance(coarse, fine);
  if (gap > truth_tolerance(sig, oracle_n)) {
    throw ValidationError("true_diagram: resolution too coarse for '" + sig.name + "' (diagrams at " +
                          std::to_string(oracle_n) + " and " + std::to_string(2 * oracle_n) +
                          " differ by " + format_real(gap) + ")");
  }
  return coarse;
}

inline PersistenceDiagram true_diagram(const SignalSpec& sig) { return true_diagram(sig, sig.oracle_n); }

// ---- assumption validation ----------------------------------------------------

/// Points of the union of boundaries of the regions selected by `mask`, taken
/// as corners of faces separating differently labelled cells of an n-grid.
/// Faces on the boundary of the unit cube are not part of any region boundary.
inline PointCloudSet sample_boundary(const SignalSpec& sig, int n, unsigned mask) {
  if (sig.smooth()) return PointCloudSet(sig.d, {});
  GridSpec spec(sig.d, n, 0);
  std::vector<int> labels(spec.size());
  Point x(sig.d);
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    for (int k = 0; k < sig.d; ++k) x[k] = (idx[k] + 0.5) / n;
    labels[f] = sig.label(x);
  }
  std::set<std::vector<int>> corners;
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    for (int k = 0; k < sig.d; ++k) {
      if (idx[k] + 1 >= n) continue;
      const std::size_t g = f + spec.stride(k);
      const int a = labels[f], b = labels[g];
      if (a == b) continue;
      const bool selected = (a >= 0 && (mask >> a) & 1u) || (b >= 0 && (mask >> b) & 1u);
      if (!selected) continue;
      // Face at coordinate idx[k] + 1 along k, spanning the cell along the other axes.
      const int others = sig.d - 1;
      for (int c = 0; c < (1 << others); ++c) {
        std::vector<int> p(sig.d);
        int bit = 0;
        for (int j = 0; j < sig.d; ++j) {
          p[j] = j == k ? idx[k] + 1 : idx[j] + ((c >> bit++) & 1);
        }
        corners.insert(p);
      }
    }
  }
  std::vector<Point> pts;
  for (const auto& c : corners) {
    Point p(sig.d);
    for (int k = 0; k < sig.d; ++k) p[k] = static_cast<double>(c[k]) / n;
    pts.push_back(std::move(p));
  }
  return PointCloudSet(sig.d, std::move(pts));
}

struct SubsetReach {
  unsigned mask = 0;  ///< bit i selects region i
  std::size_t boundary_points = 0;
  MuReachEstimate estimate;
  bool passed = true;
};

struct AssumptionReport {
  int sample_n = 0;
  std::size_t uncovered = 0;      ///< sample points outside every region
  std::size_t a2_violations = 0;  ///< face centres valued above an adjacent cell
  std::vector<SubsetReach> subsets;
  double tolerance = 0.0;

  bool coverage_ok() const { return uncovered == 0; }
  bool a2_ok() const { return a2_violations == 0; }
  bool a3_ok() const {
    return std::all_of(subsets.begin(), subsets.end(), [](const auto& s) { return s.passed; });
  }
  bool ok() const { return coverage_ok() && a2_ok() && a3_ok(); }
};

/// Checks coverage, the boundary minimum rule, and the claimed mu-reach of every
/// union of region boundaries at sampling resolution sample_n (even, >= 4).
inline AssumptionReport validate_assumptions(const SignalSpec& sig, int sample_n) {
  sig.validate();
  if (sample_n < 4 || sample_n % 2 != 0) throw DomainError("validate_assumptions: sample_n must be even and >= 4");
  AssumptionReport rep;
  rep.sample_n = sample_n;
  rep.tolerance = 2.0 / sample_n;
  if (sig.smooth()) return rep;
  if (sig.regions.size() > 8) throw ResourceError("validate_assumptions: more than 8 regions (subset guard)");

  GridSpec spec(sig.d, sample_n, 0);
  std::vector<double> cell_level(spec.size());
  Point x(sig.d);
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    for (int k = 0; k < sig.d; ++k) x[k] = (idx[k] + 0.5) / sample_n;
    const int l = sig.label(x);
    if (l < 0) {
      ++rep.uncovered;
      cell_level[f] = kInf;
    } else {
      cell_level[f] = sig.levels[l];
    }
  }
  for (std::size_t f = 0; f < spec.size(); ++f) {
    const Index idx = spec.unflat(f);
    for (int k = 0; k < sig.d; ++k) {
      if (idx[k] + 1 >= sample_n) continue;
      const std::size_t g = f + spec.stride(k);
      for (int j = 0; j < sig.d; ++j) x[j] = (idx[j] + (j == k ? 1.0 : 0.5)) / sample_n;
      const double v = evaluate(sig, x);
      if (v > std::min(cell_level[f], cell_level[g]) + 1e-12) ++rep.a2_violations;
    }
  }

  const unsigned full = (1u << sig.regions.size()) - 1;
  for (unsigned mask = 1; mask <= full; ++mask) {
    SubsetReach s;
    s.mask = mask;
    const auto boundary = sample_boundary(sig, sample_n, mask);
    s.boundary_points = boundary.size();
    if (!boundary.empty()) {
      s.estimate = estimate_mu_reach(boundary, sig.regularity.mu, sample_n / 2, {.min_offset = rep.tolerance});
      s.passed = !s.estimate.found || s.estimate.value >= sig.regularity.r_mu - rep.tolerance;
    }
    rep.subsets.push_back(std::move(s));
  }
  return rep;
}

inline nlohmann::json to_json(const AssumptionReport& r) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& s : r.subsets) {
    subsets.push_back({{"mask", s.mask},
                       {"boundary_points", s.boundary_points},
                       {"found", s.estimate.found},
                       {"estimate", s.estimate.found ? nlohmann::json(s.estimate.value) : nlohmann::json("inf")},
                       {"passed", s.passed}});
  }
  return {{"sample_n", r.sample_n},     {"tolerance", r.tolerance}, {"uncovered", r.uncovered},
          {"a2_violations", r.a2_violations}, {"a3_subsets", subsets},   {"ok", r.ok()}};
}

// ---- catalog ------------------------------------------------------------------

namespace detail {

class ParamReader {
 public:
  ParamReader(const nlohmann::json& j, std::string signal) : j_(j.is_null() ? nlohmann::json::object() : j),
                                                             signal_(std::move(signal)) {
    if (!j_.is_object()) throw ValidationError("signal '" + signal_ + "': parameters must be a JSON object");
  }
  double real(const std::string& key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number()) throw ValidationError("signal '" + signal_ + "': '" + key + "' must be a number");
    return j_[key].get<double>();
  }
  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number_integer()) throw ValidationError("signal '" + signal_ + "': '" + key + "' must be an integer");
    return j_[key].get<int>();
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_[key].get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("signal '" + signal_ + "': '" + key + "' must be a list of numbers");
    }
  }
  const nlohmann::json* raw(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_[key] : nullptr;
  }
  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) throw ValidationError("signal '" + signal_ + "': unknown parameter '" + key + "'");
    }
  }

 private:
  nlohmann::json j_;
  std::string signal_;
  std::set<std::string> used_;
};

inline RegionDescriptor unit_box(int d) { return RegionDescriptor::box("background", Point(d, 0.0), Point(d, 1.0)); }

inline SignalSpec finish_signal(SignalSpec s, ParamReader& p) {
  s.regularity.d = s.d;
  s.regularity.mu = p.real("mu", s.regularity.mu);
  s.regularity.r_mu = p.real("r_mu", s.regularity.r_mu);
  s.oracle_n = p.integer("oracle_n", s.oracle_n);
  p.finish();
  s.validate();
  return s;
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"constant", "step",     "wells",  "box",       "stripes",    "square_annulus",
          "disk",     "annulus",  "corner_cross", "slit_frame", "chirp", "label_grid"};
}

/// Catalog signal by name. Every entry accepts "mu", "r_mu" (claimed regularity)
/// and "oracle_n" besides its own parameters; unknown keys are rejected.
inline SignalSpec make_signal(const std::string& name, const nlohmann::json& params = nlohmann::json::object()) {
  detail::ParamReader p(params, name);
  SignalSpec s;
  s.name = name;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  if (name == "constant") {
    s.d = p.integer("d", 2);
    if (s.d < 1 || s.d > 3) throw ValidationError("constant: d must be 1, 2 or 3");
    s.regions = {detail::unit_box(s.d)};
    s.levels = {p.real("c", 0.5)};
    s.regularity = {1.0, 1.0, s.d};
    s.oracle_n = 8;
  } else if (name == "step") {
    // f = low on [0,t), high on (t,1].
    s.d = 1;
    const double t = p.real("t", 0.5);
    s.regions = {detail::unit_box(1), RegionDescriptor::box("right", {t}, {1.0})};
    s.levels = {p.real("low", 0.0), p.real("high", 1.0)};
    s.regularity = {1.0, 0.25, 1};
    s.oracle_n = 16;
  } else if (name == "wells") {
    // Five equal intervals: two wells separated by a ridge.
    s.d = 1;
    const auto lv = p.reals("levels", {1.0, 0.0, 0.6, 0.2, 1.0});
    if (lv.size() != 5) throw ValidationError("wells: 'levels' needs five values");
    s.regions = {detail::unit_box(1)};
    s.levels = {lv[0]};
    for (int i = 1; i < 5; ++i) {
      s.regions.push_back(RegionDescriptor::box("interval" + std::to_string(i), {i / 5.0}, {(i + 1) / 5.0}));
      s.levels.push_back(lv[i]);
    }
    s.regularity = {1.0, 0.1, 1};
    s.oracle_n = 20;
  } else if (name == "box") {
    s.d = 2;
    const double lo = p.real("lo", 0.25), hi = p.real("hi", 0.75);
    s.regions = {detail::unit_box(2), RegionDescriptor::box("box", {lo, lo}, {hi, hi})};
    s.levels = {p.real("outside", 1.0), p.real("inside", 0.0)};
    s.regularity = {inv_sqrt2, (hi - lo) / 2, 2};
    s.oracle_n = 8;
  } else if (name == "stripes") {
    // Three vertical stripes cut at x = cuts[0], cuts[1].
    s.d = 2;
    const auto cuts = p.reals("cuts", {0.3, 0.7});
    const auto lv = p.reals("levels", {0.0, 1.0, 0.5});
    if (cuts.size() != 2 || lv.size() != 3) throw ValidationError("stripes: need two cuts and three levels");
    s.regions = {detail::unit_box(2), RegionDescriptor::box("middle", {cuts[0], 0.0}, {1.0, 1.0}),
                 RegionDescriptor::box("right", {cuts[1], 0.0}, {1.0, 1.0})};
    s.levels = lv;
    s.regularity = {1.0, (cuts[1] - cuts[0]) / 2, 2};
    s.oracle_n = 10;
  } else if (name == "square_annulus") {
    s.d = 2;
    const auto outer = p.reals("outer", {0.2, 0.8});
    const auto inner = p.reals("inner", {0.4, 0.6});
    if (outer.size() != 2 || inner.size() != 2) throw ValidationError("square_annulus: need [lo, hi] pairs");
    s.regions = {detail::unit_box(2), RegionDescriptor::box("ring", {outer[0], outer[0]}, {outer[1], outer[1]}),
                 RegionDescriptor::box("hole", {inner[0], inner[0]}, {inner[1], inner[1]})};
    s.levels = {p.real("outside", 1.0), p.real("ring_level", 0.0), p.real("hole_level", 1.0)};
    s.regularity = {inv_sqrt2, std::min(inner[0] - outer[0], outer[1] - inner[1]) / 2, 2};
    s.oracle_n = 10;
  } else if (name == "disk") {
    s.d = 2;
    const auto c = p.reals("center", {0.5, 0.5});
    const double r = p.real("radius", 0.3);
    s.regions = {detail::unit_box(2), RegionDescriptor::disk("disk", c, r)};
    s.levels = {p.real("outside", 1.0), p.real("inside", 0.0)};
    s.regularity = {1.0, r, 2};
    s.oracle_n = 64;
  } else if (name == "annulus") {
    s.d = 2;
    const auto c = p.reals("center", {0.5, 0.5});
    const double r_in = p.real("r_in", 0.15), r_out = p.real("r_out", 0.35);
    s.regions = {detail::unit_box(2), RegionDescriptor::annulus("annulus", c, r_in, r_out)};
    s.levels = {p.real("outside", 1.0), p.real("inside", 0.0)};
    s.regularity = {1.0, (r_out - r_in) / 2, 2};
    s.oracle_n = 64;
  } else if (name == "corner_cross") {
    // Level 0 on four bars meeting only at corner points, K elsewhere.
    s.d = 2;
    const auto c = p.reals("center", {0.5, 0.5});
    const double w = p.real("w", 0.1);
    s.regions = {detail::unit_box(2), RegionDescriptor::cross("cross", c, p.real("a", 0.35), w, p.real("g", 0.0))};
    s.levels = {p.real("K", 10.0), 0.0};
    s.regularity = {inv_sqrt2, w / 2, 2};
    s.oracle_n = 20;
  } else if (name == "slit_frame") {
    // Level 0 on a square frame broken by a slit of width g, K elsewhere.
    s.d = 2;
    const double lo = p.real("lo", 0.15), hi = p.real("hi", 0.85), w = p.real("w", 0.1);
    const double g = p.real("g", 0.01), at = p.real("slit_at", 0.51);
    if (!(g > 0.0)) throw ValidationError("slit_frame: slit width must be positive");
    s.regions = {detail::unit_box(2),
                 RegionDescriptor::box("left", {lo, lo}, {lo + w, hi}),
                 RegionDescriptor::box("right", {hi - w, lo}, {hi, hi}),
                 RegionDescriptor::box("bottom", {lo, lo}, {hi, lo + w}),
                 RegionDescriptor::box("top_left", {lo, hi - w}, {at - g / 2, hi}),
                 RegionDescriptor::box("top_right", {at + g / 2, hi - w}, {hi, hi})};
    const double k = p.real("K", 10.0);
    s.levels = {k, 0.0, 0.0, 0.0, 0.0, 0.0};
    s.regularity = {inv_sqrt2, g / 2, 2};
    s.oracle_n = 200;
  } else if (name == "chirp") {
    s.d = 1;
    auto field = std::make_shared<SmoothField>();
    field->value = [](const Point& x) { return x[0] * std::cos(8.0 * std::numbers::pi * x[0]); };
    field->lipschitz = 1.0 + 8.0 * std::numbers::pi;
    s.field = field;
    s.regularity = {1.0, 0.24, 1};
    s.oracle_n = 4096;
  } else if (name == "label_grid") {
    // Levels given per cell of a margin-free grid (GridFunction JSON).
    const auto* grid = p.raw("grid");
    if (!grid) throw ValidationError("label_grid: parameter 'grid' required");
    auto g = std::make_shared<GridFunction>(grid_function_from_json(*grid));
    if (g->spec.margin != 0) throw ValidationError("label_grid: grid must have margin 0");
    s.d = g->spec.d;
    std::vector<double> distinct;
    for (double v : g->values) {
      if (!std::isfinite(v)) throw ValidationError("label_grid: levels must be finite");
      distinct.push_back(v);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() > 8) throw ResourceError("label_grid: at most 8 distinct levels");
    for (double v : distinct) {
      s.regions.push_back(RegionDescriptor::label_cells("level " + format_real(v), g, v));
      s.levels.push_back(v);
    }
    s.regularity = {1.0, 1.0 / g->spec.n, s.d};
    s.oracle_n = g->spec.n;
  } else {
    throw ValidationError("unknown signal '" + name + "'");
  }
  return detail::finish_signal(std::move(s), p);
}

}  // namespace phest
