#pragma once

// Definition-level reference for image persistence: ranks of
// H_s(A_b) -> H_s(B_d) by dense Z/2 elimination, and the diagram recovered
// from the rank function by inclusion-exclusion. Quadratic in the number of
// critical values and cubic in the cell count; meant for small test complexes.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "phest/diagram.hpp"
#include "phest/errors.hpp"
#include "phest/image_persistence.hpp"

namespace phest {

namespace detail {

class BitVector {
 public:
  explicit BitVector(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void xor_with(const BitVector& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= o.words_[k];
  }
  // Highest set bit, or -1 for the zero vector.
  long top() const {
    for (std::size_t k = words_.size(); k-- > 0;) {
      if (words_[k]) return static_cast<long>(k * 64 + 63 - std::countl_zero(words_[k]));
    }
    return -1;
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Incremental echelon basis: insert() returns true when the vector enlarges the span.
class EchelonBasis {
 public:
  explicit EchelonBasis(std::size_t n) : by_top_(n) {}
  bool insert(BitVector v) {
    for (long t = v.top(); t >= 0; t = v.top()) {
      auto& slot = by_top_[static_cast<std::size_t>(t)];
      if (slot.empty()) {
        slot.push_back(std::move(v));
        ++rank_;
        return true;
      }
      v.xor_with(slot.front());
    }
    return false;
  }
  std::size_t rank() const { return rank_; }

 private:
  std::vector<std::vector<BitVector>> by_top_;
  std::size_t rank_ = 0;
};

inline BitVector boundary_vector(const CellStructure& cells, CellId id) {
  BitVector v(cells.size());
  cells.for_each_facet(id, [&](CellId f) { v.flip(f); });
  return v;
}

// Basis of the s-cycles supported on cells with values <= level.
inline std::vector<BitVector> cycle_basis(const CellStructure& cells, const std::vector<double>& values, int s,
                                          double level) {
  struct Column {
    BitVector boundary;
    BitVector chain;
  };
  std::vector<Column> reduced;
  std::vector<long> pivot_owner(cells.size(), -1);
  std::vector<BitVector> cycles;
  for (CellId id = 0; id < cells.size(); ++id) {
    if (cells.dim(id) != s || !(values[id] <= level)) continue;
    Column c{boundary_vector(cells, id), BitVector(cells.size())};
    c.chain.flip(id);
    for (long t = c.boundary.top(); t >= 0 && pivot_owner[t] >= 0; t = c.boundary.top()) {
      const auto& o = reduced[static_cast<std::size_t>(pivot_owner[t])];
      c.boundary.xor_with(o.boundary);
      c.chain.xor_with(o.chain);
    }
    const long t = c.boundary.top();
    if (t < 0) {
      cycles.push_back(std::move(c.chain));
    } else {
      pivot_owner[t] = static_cast<long>(reduced.size());
      reduced.push_back(std::move(c));
    }
  }
  return cycles;
}

}  // namespace detail

/// rank(H_s(A_b) -> H_s(B_d)) with A = {g_dom <= b}, B = {g_cod <= d}, computed as
/// dim Z_s(A_b) - dim(Z_s(A_b) cap B_s(B_d)).
inline std::size_t image_rank(const FiltrationPair& p, int s, double b, double d) {
  if (b > d) throw DomainError("image_rank: requires b <= d");
  if (s < 0) throw DomainError("image_rank: negative degree");
  const auto& cells = *p.cells;
  detail::EchelonBasis span(cells.size());
  for (CellId id = 0; id < cells.size(); ++id) {
    if (cells.dim(id) == s + 1 && p.g_cod[id] <= d) span.insert(detail::boundary_vector(cells, id));
  }
  const std::size_t boundaries = span.rank();
  for (auto& z : detail::cycle_basis(cells, p.g_dom, s, b)) span.insert(std::move(z));
  return span.rank() - boundaries;
}

/// Sorted distinct finite values of both filtrations.
inline std::vector<double> critical_values(const FiltrationPair& p) {
  std::vector<double> v;
  for (double x : p.g_dom) {
    if (x < kInf) v.push_back(x);
  }
  for (double x : p.g_cod) {
    if (x < kInf) v.push_back(x);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Image diagram in degree s from the rank function alone.
inline PersistenceDiagram diagram_from_ranks(const FiltrationPair& p, int s) {
  p.validate();
  const auto v = critical_values(p);
  const std::size_t m = v.size();
  // r[i][j] for 0 <= i <= j <= m, index 0 meaning "below v_1".
  std::vector<std::vector<long>> r(m + 1, std::vector<long>(m + 1, 0));
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) r[i][j] = static_cast<long>(image_rank(p, s, v[i - 1], v[j - 1]));
  }
  const auto rank = [&](std::size_t i, std::size_t j) { return i == 0 ? 0L : r[i][j]; };
  PersistenceDiagram out;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = i + 1; j <= m; ++j) {
      const long mult = (rank(i, j - 1) - rank(i, j)) - (rank(i - 1, j - 1) - rank(i - 1, j));
      if (mult < 0) throw ConsistencyError("diagram_from_ranks: negative multiplicity");
      for (long k = 0; k < mult; ++k) out.add(s, v[i - 1], v[j - 1]);
    }
    const long ess = rank(i, m) - rank(i - 1, m);
    if (ess < 0) throw ConsistencyError("diagram_from_ranks: negative essential multiplicity");
    for (long k = 0; k < ess; ++k) out.add(s, v[i - 1], kInf);
  }
  return out.canonical();
}

/// Rank table {degree, levels, ranks[i][j] for levels[i] <= levels[j]} for debugging.
inline nlohmann::json rank_table_json(const FiltrationPair& p, int s) {
  const auto v = critical_values(p);
  nlohmann::json ranks = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < v.size(); ++j) {
      row.push_back(j < i ? nlohmann::json(nullptr) : nlohmann::json(image_rank(p, s, v[i], v[j])));
    }
    ranks.push_back(std::move(row));
  }
  return {{"degree", s}, {"levels", v}, {"ranks", std::move(ranks)}};
}

}  // namespace phest
