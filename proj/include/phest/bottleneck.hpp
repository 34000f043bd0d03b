#pragma once

// Bottleneck distance between persistence diagrams, degree by degree.
// Finite points: binary search over candidate thresholds with a maximum
// matching feasibility test on the diagonal-enriched bipartite graph.
// Essential points: matched by sorted birth, +inf on a count mismatch.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "phest/diagram.hpp"
#include "phest/errors.hpp"

namespace phest {

namespace detail {

struct Pt {
  double b, d;
};

inline double linf(const Pt& p, const Pt& q) { return std::max(std::abs(p.b - q.b), std::abs(p.d - q.d)); }
inline double half_life(const Pt& p) { return (p.d - p.b) / 2.0; }

// Hopcroft-Karp on a bipartite graph given as adjacency lists; returns matching size.
class HopcroftKarp {
 public:
  HopcroftKarp(std::size_t nl, std::size_t nr) : adj_(nl), match_l_(nl, kFree), match_r_(nr, kFree), dist_(nl) {}
  void edge(std::size_t l, std::size_t r) { adj_[l].push_back(r); }

  std::size_t solve() {
    std::size_t size = 0;
    while (bfs()) {
      for (std::size_t l = 0; l < adj_.size(); ++l) {
        if (match_l_[l] == kFree && dfs(l)) ++size;
      }
    }
    return size;
  }

 private:
  static constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();

  bool bfs() {
    std::queue<std::size_t> q;
    bool reachable_free = false;
    for (std::size_t l = 0; l < adj_.size(); ++l) {
      dist_[l] = match_l_[l] == kFree ? 0 : kFree;
      if (match_l_[l] == kFree) q.push(l);
    }
    while (!q.empty()) {
      const auto l = q.front();
      q.pop();
      for (auto r : adj_[l]) {
        const auto next = match_r_[r];
        if (next == kFree) {
          reachable_free = true;
        } else if (dist_[next] == kFree) {
          dist_[next] = dist_[l] + 1;
          q.push(next);
        }
      }
    }
    return reachable_free;
  }

  bool dfs(std::size_t l) {
    for (auto r : adj_[l]) {
      const auto next = match_r_[r];
      if (next == kFree || (dist_[next] == dist_[l] + 1 && dfs(next))) {
        match_l_[l] = r;
        match_r_[r] = l;
        return true;
      }
    }
    dist_[l] = kFree;
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

// Perfect matching of A + diag(B) against B + diag(A) with all costs <= eps.
// Left i < na is a point of A, left na + j the diagonal copy of B's point j;
// right j < nb is a point of B, right nb + i the diagonal copy of A's point i.
inline bool feasible(const std::vector<Pt>& a, const std::vector<Pt>& b, double eps) {
  const std::size_t na = a.size(), nb = b.size();
  HopcroftKarp hk(na + nb, na + nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (linf(a[i], b[j]) <= eps) hk.edge(i, j);
    }
    if (half_life(a[i]) <= eps) hk.edge(i, nb + i);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (half_life(b[j]) <= eps) hk.edge(na + j, j);
    for (std::size_t i = 0; i < na; ++i) hk.edge(na + j, nb + i);  // diagonal to diagonal is free
  }
  return hk.solve() == na + nb;
}

inline double finite_bottleneck(const std::vector<Pt>& a, const std::vector<Pt>& b) {
  std::vector<double> cand{0.0};
  for (const auto& p : a) {
    cand.push_back(half_life(p));
    for (const auto& q : b) cand.push_back(linf(p, q));
  }
  for (const auto& q : b) cand.push_back(half_life(q));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t lo = 0, hi = cand.size() - 1;  // the largest candidate is always feasible
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(a, b, cand[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return cand[lo];
}

inline double essential_bottleneck(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct DegreeSplit {
  std::vector<Pt> finite;
  std::vector<double> essential;
};

inline DegreeSplit split(const PersistenceDiagram& d, int s) {
  DegreeSplit out;
  for (const auto& p : d.points) {
    if (p.degree != s) continue;
    if (p.essential()) {
      out.essential.push_back(p.birth);
    } else if (p.death > p.birth) {
      out.finite.push_back({p.birth, p.death});
    }
  }
  return out;
}

inline int max_degree(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  return std::max(a.max_degree(), b.max_degree());
}

}  // namespace detail

/// Bottleneck distance in one homology degree.
inline double bottleneck_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2, int degree) {
  const auto a = detail::split(d1, degree);
  const auto b = detail::split(d2, degree);
  const double e = detail::essential_bottleneck(a.essential, b.essential);
  if (std::isinf(e)) return e;
  return std::max(e, detail::finite_bottleneck(a.finite, b.finite));
}

/// Maximum over degrees of the per-degree bottleneck distance.
inline double bottleneck_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  double m = 0.0;
  for (int s = 0; s <= detail::max_degree(d1, d2); ++s) m = std::max(m, bottleneck_distance(d1, d2, s));
  return m;
}

namespace detail {

// Exhaustive search over partial injections A -> B; unmatched points go to the diagonal.
inline void brute_search(const std::vector<Pt>& a, const std::vector<Pt>& b, std::size_t i,
                         std::vector<char>& used, double current, double& best) {
  if (current >= best) return;
  if (i == a.size()) {
    double cost = current;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j]) cost = std::max(cost, half_life(b[j]));
    }
    best = std::min(best, cost);
    return;
  }
  brute_search(a, b, i + 1, used, std::max(current, half_life(a[i])), best);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (used[j]) continue;
    used[j] = 1;
    brute_search(a, b, i + 1, used, std::max(current, linf(a[i], b[j])), best);
    used[j] = 0;
  }
}

}  // namespace detail

/// Exact bottleneck distance by enumerating every matching. Each degree may
/// hold at most `max_points` (<= 6) points per diagram.
inline double bottleneck_bruteforce(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                                    std::size_t max_points = 6) {
  if (max_points > 6) throw ResourceError("bottleneck_bruteforce: max_points must be <= 6");
  double m = 0.0;
  for (int s = 0; s <= detail::max_degree(d1, d2); ++s) {
    const auto a = detail::split(d1, s);
    const auto b = detail::split(d2, s);
    if (a.finite.size() + a.essential.size() > max_points || b.finite.size() + b.essential.size() > max_points) {
      throw ResourceError("bottleneck_bruteforce: too many points in degree " + std::to_string(s));
    }
    if (a.essential.size() != b.essential.size()) return std::numeric_limits<double>::infinity();
    // Essential points: every bijection by permutation.
    double e = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> perm(b.essential.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) c = std::max(c, std::abs(a.essential[i] - b.essential[perm[i]]));
      e = std::min(e, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(b.finite.size(), 0);
    detail::brute_search(a.finite, b.finite, 0, used, 0.0, best);
    m = std::max({m, e, best});
  }
  return m;
}

}  // namespace phest
