#pragma once

// Distance functions to sampled compact sets, the generalized gradient of the
// distance function, and diagnostics for the mu-reach of a sampled set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "phest/errors.hpp"

namespace phest {

using Point = std::vector<double>;

/// Finite sampling of a compact set K in [0,1]^d.
struct PointCloudSet {
  int d = 0;
  std::vector<Point> points;

  PointCloudSet() = default;
  PointCloudSet(int dim, std::vector<Point> pts) : d(dim), points(std::move(pts)) {
    for (const auto& p : points) {
      if (static_cast<int>(p.size()) != d) throw ValidationError("PointCloudSet: point dimension mismatch");
    }
  }
  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Relative tolerance below which two candidate distances count as tied.
inline constexpr double kGammaTolerance = 1e-9;

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

struct DistanceResult {
  double distance = 0.0;
  std::vector<Point> gamma;  ///< closest points, ties within kGammaTolerance
};

inline DistanceResult distance_function(std::span<const double> x, const PointCloudSet& k) {
  if (k.empty()) throw DomainError("distance_function: empty point set");
  if (static_cast<int>(x.size()) != k.d) throw DomainError("distance_function: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : k.points) best = std::min(best, squared_distance(x, p));
  const double dist = std::sqrt(best);
  const double cutoff = dist * (1.0 + kGammaTolerance) + 1e-300;
  DistanceResult out{dist, {}};
  for (const auto& p : k.points) {
    if (euclidean_distance(x, p) <= cutoff) out.gamma.push_back(p);
  }
  return out;
}

// ---- minimal enclosing ball --------------------------------------------------

struct Ball {
  Point center;
  double radius = 0.0;
};

namespace detail {

// Smallest ball with all `support` points on its boundary (circumcentre within
// their affine hull). Returns false on affinely dependent support.
inline bool circumball(const std::vector<const Point*>& support, int d, Ball& out) {
  const std::size_t m = support.size();
  if (m == 0) {
    out = {Point(d, 0.0), -1.0};
    return true;
  }
  const Point& p0 = *support[0];
  if (m == 1) {
    out = {p0, 0.0};
    return true;
  }
  const std::size_t k = m - 1;
  std::vector<Point> v(k, Point(d));
  for (std::size_t i = 0; i < k; ++i) {
    for (int c = 0; c < d; ++c) v[i][c] = (*support[i + 1])[c] - p0[c];
  }
  // Solve G a = b with G_ij = v_i . v_j, b_i = |v_i|^2 / 2.
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += v[i][c] * v[j][c];
      g[i][j] = s;
    }
    g[i][k] = 0.5 * g[i][i];
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, g[i][i]);
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
    }
    if (std::abs(g[piv][col]) <= 1e-14 * std::max(scale, 1e-300)) return false;
    std::swap(g[piv], g[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double factor = g[r][col] / g[col][col];
      for (std::size_t c = col; c <= k; ++c) g[r][c] -= factor * g[col][c];
    }
  }
  Point center = p0;
  for (std::size_t i = 0; i < k; ++i) {
    const double a = g[i][k] / g[i][i];
    for (int c = 0; c < d; ++c) center[c] += a * v[i][c];
  }
  out = {center, euclidean_distance(center, p0)};
  return true;
}

inline bool in_ball(const Ball& b, const Point& p) {
  if (b.radius < 0.0) return false;
  return euclidean_distance(b.center, p) <= b.radius * (1.0 + 1e-10) + 1e-14;
}

// Welzl's recursion over pts[0..n) with boundary set `support`.
inline Ball welzl(std::vector<const Point*>& pts, std::size_t n, std::vector<const Point*>& support, int d) {
  Ball ball;
  if (n == 0 || static_cast<int>(support.size()) == d + 1) {
    if (!circumball(support, d, ball)) {
      // Degenerate support: drop the last point, the remaining ball still covers it.
      std::vector<const Point*> reduced(support.begin(), support.end() - 1);
      circumball(reduced, d, ball);
    }
    return ball;
  }
  const Point* p = pts[n - 1];
  ball = welzl(pts, n - 1, support, d);
  if (in_ball(ball, *p)) return ball;
  support.push_back(p);
  ball = welzl(pts, n - 1, support, d);
  support.pop_back();
  return ball;
}

}  // namespace detail

/// Smallest ball enclosing a finite point set (exact up to rounding).
inline Ball minimal_enclosing_ball(const std::vector<Point>& points) {
  if (points.empty()) throw DomainError("minimal_enclosing_ball: empty set");
  const int d = static_cast<int>(points.front().size());
  std::vector<const Point*> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back(&p);
  std::vector<const Point*> support;
  return detail::welzl(pts, pts.size(), support, d);
}

struct GradientResult {
  double norm = 0.0;  ///< |x - theta| / d_K(x), in [0, 1]
  Point theta;        ///< centre of the minimal ball enclosing the closest points
  double distance = 0.0;
};

inline GradientResult generalized_gradient(std::span<const double> x, const PointCloudSet& k) {
  const auto dist = distance_function(x, k);
  if (dist.distance <= 0.0) throw DomainError("generalized_gradient: undefined on K (distance is zero)");
  const Ball ball = minimal_enclosing_ball(dist.gamma);
  const double norm = euclidean_distance(x, ball.center) / dist.distance;
  return {norm, ball.center, dist.distance};
}

// ---- mu-reach diagnostics ----------------------------------------------------

struct MuReachEstimate {
  double value = std::numeric_limits<double>::infinity();
  bool found = false;  ///< false: no probe with gradient norm below mu
  Point witness;       ///< probe realising the estimate
};

struct MuReachOptions {
  /// Probes closer to K than this are skipped; sampling artefacts dominate there.
  double min_offset = 0.0;
};

namespace detail {

template <class Fn>
void for_each_probe(int d, int resolution, Fn&& fn) {
  Point x(d);
  std::vector<int> idx(d, 0);
  while (true) {
    for (int c = 0; c < d; ++c) x[c] = (idx[c] + 0.5) / resolution;
    fn(x);
    int c = d - 1;
    while (c >= 0 && ++idx[c] == resolution) idx[c--] = 0;
    if (c < 0) break;
  }
}

}  // namespace detail

/// Smallest offset d_K(x) over probes x (cell centres of a resolution^d lattice of
/// [0,1]^d) whose generalized gradient norm falls below mu. A resolution-dependent
/// upper-bound diagnostic for reach_mu(K), not an exact value.
inline MuReachEstimate estimate_mu_reach(const PointCloudSet& k, double mu, int probe_resolution,
                                         const MuReachOptions& opts = {}) {
  if (k.empty()) throw DomainError("estimate_mu_reach: empty point set");
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("estimate_mu_reach: mu must lie in (0,1]");
  if (probe_resolution < 1) throw DomainError("estimate_mu_reach: probe resolution must be positive");
  MuReachEstimate best;
  detail::for_each_probe(k.d, probe_resolution, [&](const Point& x) {
    const auto dist = distance_function(x, k);
    if (dist.distance <= opts.min_offset || dist.distance <= 0.0) return;
    if (dist.distance >= best.value) return;
    if (dist.gamma.size() < 2) return;  // unique closest point: norm is exactly 1
    const Ball ball = minimal_enclosing_ball(dist.gamma);
    const double norm = euclidean_distance(x, ball.center) / dist.distance;
    if (norm < mu - 1e-12) {
      best.value = dist.distance;
      best.found = true;
      best.witness = x;
    }
  });
  return best;
}

struct OffsetInequalityReport {
  std::size_t probes_checked = 0;
  double max_excess = -std::numeric_limits<double>::infinity();  ///< max of lhs - rhs
  double tolerance = 0.0;
  bool holds = true;
};

/// Checks d(x, boundary of {d_K <= r}) <= (r - d_K(x)) / mu + 2 / resolution for
/// every lattice probe x with 0 < d_K(x) <= r. The offset boundary is recovered
/// from sign changes of d_K - r along lattice edges, so it must stay inside the
/// unit cube for the check to be meaningful.
inline OffsetInequalityReport check_offset_inequality(const PointCloudSet& k, double r, double mu, int resolution) {
  if (k.empty()) throw DomainError("check_offset_inequality: empty point set");
  if (k.d != 2) throw DomainError("check_offset_inequality: implemented for d = 2");
  const int m = resolution;
  const auto at = [m](int i, int j) { return static_cast<std::size_t>(i) * (m + 1) + j; };
  std::vector<double> dist((m + 1) * (m + 1));
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const Point x{static_cast<double>(i) / m, static_cast<double>(j) / m};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : k.points) best = std::min(best, squared_distance(x, p));
      dist[at(i, j)] = std::sqrt(best);
    }
  }
  std::vector<Point> level;
  const auto crossing = [&](int i0, int j0, int i1, int j1) {
    const double a = dist[at(i0, j0)] - r;
    const double b = dist[at(i1, j1)] - r;
    if (a == 0.0) level.push_back({static_cast<double>(i0) / m, static_cast<double>(j0) / m});
    if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
      const double t = a / (a - b);
      level.push_back({(i0 + t * (i1 - i0)) / m, (j0 + t * (j1 - j0)) / m});
    }
  };
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (i < m) crossing(i, j, i + 1, j);
      if (j < m) crossing(i, j, i, j + 1);
    }
  }
  OffsetInequalityReport report;
  report.tolerance = 2.0 / m;
  if (level.empty()) return report;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const double dk = dist[at(i, j)];
      if (dk <= 0.0 || dk > r) continue;
      const Point x{static_cast<double>(i) / m, static_cast<double>(j) / m};
      double to_boundary = std::numeric_limits<double>::infinity();
      for (const auto& y : level) to_boundary = std::min(to_boundary, squared_distance(x, y));
      to_boundary = std::sqrt(to_boundary);
      const double excess = to_boundary - (r - dk) / mu;
      report.max_excess = std::max(report.max_excess, excess);
      ++report.probes_checked;
      if (excess > report.tolerance) report.holds = false;
    }
  }
  return report;
}

}  // namespace phest
