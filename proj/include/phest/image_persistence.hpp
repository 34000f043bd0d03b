#pragma once

// Persistence of the image module lambda -> Im(H_s(A_lambda) -> H_s(B_lambda)) for
// two filtrations A (g_dom) and B (g_cod) of one cell structure with g_cod <= g_dom.
//
// The boundary matrix of the (s+1)-cells is reduced with columns in codomain order
// and rows (s-cells) in domain order. A reduced column tau with pivot sigma gives
// the candidate interval [g_dom(sigma), g_cod(tau)); s-cells positive in the
// domain filtration that are never a pivot are essential.
//
// Degree 0 and, on grids, degree d-1 use union-find: the former by the elder
// rule on domain order, the latter on the transposed matrix with both orders
// reversed, whose pivots coincide with those of the original reduction.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "phest/complex.hpp"
#include "phest/diagram.hpp"
#include "phest/errors.hpp"
#include "phest/grid.hpp"

namespace phest {

struct FiltrationPair {
  std::shared_ptr<const CellStructure> cells;
  std::vector<double> g_dom;
  std::vector<double> g_cod;

  void validate() const {
    if (!cells) throw ValidationError("FiltrationPair: missing cell structure");
    if (g_dom.size() != cells->size() || g_cod.size() != cells->size()) {
      throw ValidationError("FiltrationPair: one value per cell required");
    }
    for (CellId id = 0; id < cells->size(); ++id) {
      if (std::isnan(g_dom[id]) || std::isnan(g_cod[id])) throw ValidationError("FiltrationPair: NaN value");
      if (g_cod[id] > g_dom[id]) {
        throw ValidationError("FiltrationPair: codomain value exceeds domain value at cell " + std::to_string(id));
      }
      cells->for_each_facet(id, [&](CellId f) {
        if (g_dom[id] < kInf && !(g_dom[f] <= g_dom[id])) {
          throw ValidationError("FiltrationPair: domain filtration not monotone");
        }
        if (g_cod[id] < kInf && !(g_cod[f] <= g_cod[id])) {
          throw ValidationError("FiltrationPair: codomain filtration not monotone");
        }
      });
    }
  }

  /// Highest homology degree worth computing: d - 1 on grids, the top cell
  /// dimension for explicit complexes.
  int top_degree() const { return cells->is_grid() ? cells->dimension() - 1 : cells->dimension(); }
};

/// Pair of cubical filtrations from two grid functions on the same grid.
inline FiltrationPair make_filtration_pair(const GridFunction& dom, const GridFunction& cod) {
  if (!(dom.spec == cod.spec)) throw ValidationError("make_filtration_pair: grids differ");
  dom.validate();
  cod.validate();
  auto cells = CellStructure::cubical(dom.spec.d, dom.spec.extent());
  FiltrationPair p{cells, cubical_cell_values(*cells, dom), cubical_cell_values(*cells, cod)};
  p.validate();
  return p;
}

/// The identity inclusion: ordinary persistence of a single filtration.
inline FiltrationPair identity_pair(const FiltrationComplex& c) {
  return {c.cells, c.values, c.values};
}

struct ImageOptions {
  /// Use the generic sparse column reduction in every degree.
  bool force_reduction = false;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void attach(std::uint32_t child_root, std::uint32_t parent_root) { parent_[child_root] = parent_root; }

 private:
  std::vector<std::uint32_t> parent_;
};

struct CandidatePair {
  CellId row;     // s-cell (birth side)
  CellId column;  // (s+1)-cell (death side)
};

// Cells of dimension k with finite `values`, sorted by (value, id).
inline std::vector<CellId> cells_in_order(const CellStructure& cells, const std::vector<double>& values, int k) {
  std::vector<CellId> out;
  for (CellId id = 0; id < cells.size(); ++id) {
    if (values[id] < kInf && cells.dim(id) == k) out.push_back(id);
  }
  std::sort(out.begin(), out.end(), [&](CellId a, CellId b) {
    return values[a] != values[b] ? values[a] < values[b] : a < b;
  });
  return out;
}

// Rank of every k-cell in (value, id) order, +inf values ranked last.
inline std::vector<std::uint32_t> row_ranks(const CellStructure& cells, const std::vector<double>& values,
                                            const std::vector<double>& presence, int k, std::size_t& count) {
  std::vector<CellId> rows;
  for (CellId id = 0; id < cells.size(); ++id) {
    if (presence[id] < kInf && cells.dim(id) == k) rows.push_back(id);
  }
  std::sort(rows.begin(), rows.end(), [&](CellId a, CellId b) {
    return values[a] != values[b] ? values[a] < values[b] : a < b;
  });
  std::vector<std::uint32_t> rank(cells.size(), ColumnReducer::kNone);
  for (std::size_t i = 0; i < rows.size(); ++i) rank[rows[i]] = static_cast<std::uint32_t>(i);
  count = rows.size();
  return rank;
}

// s-cells positive in the domain filtration (their addition creates an s-cycle).
inline std::vector<char> domain_positive(const FiltrationPair& p, int s, bool force_reduction) {
  const auto& cells = *p.cells;
  std::vector<char> positive(cells.size(), 0);
  if (s == 0) {
    for (CellId id = 0; id < cells.size(); ++id) positive[id] = (p.g_dom[id] < kInf && cells.dim(id) == 0);
    return positive;
  }
  const auto columns = cells_in_order(cells, p.g_dom, s);
  if (s == 1 && !force_reduction) {
    UnionFind uf(cells.size());
    for (CellId e : columns) {
      CellId ends[2];
      int n = 0;
      cells.for_each_facet(e, [&](CellId v) { ends[n++] = v; });
      const auto a = uf.find(ends[0]);
      const auto b = uf.find(ends[1]);
      if (a == b) {
        positive[e] = 1;
      } else {
        uf.attach(a, b);
      }
    }
    return positive;
  }
  std::size_t nrows = 0;
  const auto rank = row_ranks(cells, p.g_dom, p.g_dom, s - 1, nrows);
  ColumnReducer reducer(nrows);
  for (CellId c : columns) {
    std::vector<CellId> col;
    cells.for_each_facet(c, [&](CellId f) { col.push_back(rank[f]); });
    std::sort(col.begin(), col.end());
    if (reducer.add(std::move(col)) == ColumnReducer::kNone) positive[c] = 1;
  }
  return positive;
}

// Generic mixed-order reduction of the (s+1)-boundary matrix.
inline std::vector<CandidatePair> mixed_reduction(const FiltrationPair& p, int s) {
  const auto& cells = *p.cells;
  std::size_t nrows = 0;
  const auto rank = row_ranks(cells, p.g_dom, p.g_cod, s, nrows);
  std::vector<CellId> row_of(nrows);
  for (CellId id = 0; id < cells.size(); ++id) {
    if (rank[id] != ColumnReducer::kNone) row_of[rank[id]] = id;
  }
  const auto columns = cells_in_order(cells, p.g_cod, s + 1);
  ColumnReducer reducer(nrows);
  std::vector<CandidatePair> out;
  for (CellId c : columns) {
    std::vector<CellId> col;
    cells.for_each_facet(c, [&](CellId f) { col.push_back(rank[f]); });
    std::sort(col.begin(), col.end());
    const auto low = reducer.add(std::move(col));
    if (low != ColumnReducer::kNone) out.push_back({row_of[low], c});
  }
  return out;
}

// Degree 0: components of the codomain graph, each represented by its
// domain-oldest vertex; a merging edge pivots on the younger representative.
inline std::vector<CandidatePair> vertex_union_find(const FiltrationPair& p) {
  const auto& cells = *p.cells;
  const auto older = [&](CellId a, CellId b) {
    return p.g_dom[a] != p.g_dom[b] ? p.g_dom[a] < p.g_dom[b] : a < b;
  };
  UnionFind uf(cells.size());
  std::vector<CandidatePair> out;
  for (CellId e : cells_in_order(cells, p.g_cod, 1)) {
    CellId ends[2];
    int n = 0;
    cells.for_each_facet(e, [&](CellId v) { ends[n++] = v; });
    const auto a = uf.find(ends[0]);
    const auto b = uf.find(ends[1]);
    if (a == b) continue;
    const CellId young = older(a, b) ? b : a;
    const CellId old = young == a ? b : a;
    out.push_back({young, e});
    uf.attach(young, old);
  }
  return out;
}

// Grid degree d-1: union-find over top cells plus an outer element, processing
// (d-1)-cells by decreasing domain order. Representatives are the
// codomain-youngest cells; a merge pivots on the older representative.
inline std::vector<CandidatePair> top_cell_union_find(const FiltrationPair& p) {
  const auto& cells = *p.cells;
  const int d = cells.dimension();
  const CellId outer = static_cast<CellId>(cells.size());
  // Row order of the transposed matrix: top cells by decreasing (g_cod, id), outer first.
  const auto earlier_row = [&](CellId a, CellId b) {
    if (a == outer || b == outer) return a == outer && b != outer;
    return p.g_cod[a] != p.g_cod[b] ? p.g_cod[a] > p.g_cod[b] : a > b;
  };
  std::vector<CellId> sigma;
  for (CellId id = 0; id < cells.size(); ++id) {
    if (p.g_cod[id] < kInf && cells.dim(id) == d - 1) sigma.push_back(id);
  }
  std::sort(sigma.begin(), sigma.end(), [&](CellId a, CellId b) {
    return p.g_dom[a] != p.g_dom[b] ? p.g_dom[a] > p.g_dom[b] : a > b;
  });
  UnionFind uf(cells.size() + 1);
  std::vector<CandidatePair> out;
  for (CellId s : sigma) {
    CellId ends[2] = {outer, outer};
    int n = 0;
    cells.for_each_cofacet(s, [&](CellId t) {
      if (p.g_cod[t] < kInf) ends[n++] = t;
    });
    if (n == 0) continue;
    const auto a = uf.find(ends[0]);
    const auto b = uf.find(ends[1]);
    if (a == b) continue;
    const CellId young = earlier_row(a, b) ? b : a;
    const CellId old = young == a ? b : a;
    out.push_back({s, young});
    uf.attach(young, old);
  }
  return out;
}

}  // namespace detail

/// Diagram of the image persistence module of a filtration pair, degrees
/// 0..top_degree(). Zero-length intervals are dropped.
inline PersistenceDiagram image_diagram(const FiltrationPair& p, const ImageOptions& opts = {}) {
  p.validate();
  PersistenceDiagram out;
  const auto& cells = *p.cells;
  for (int s = 0; s <= p.top_degree(); ++s) {
    const auto positive = detail::domain_positive(p, s, opts.force_reduction);
    std::vector<detail::CandidatePair> candidates;
    if (!opts.force_reduction && s == 0) {
      candidates = detail::vertex_union_find(p);
    } else if (!opts.force_reduction && cells.is_grid() && s == cells.dimension() - 1) {
      candidates = detail::top_cell_union_find(p);
    } else {
      candidates = detail::mixed_reduction(p, s);
    }
    std::vector<char> consumed(cells.size(), 0);
    for (const auto& c : candidates) {
      const double birth = p.g_dom[c.row];
      const double death = p.g_cod[c.column];
      if (birth == kInf) continue;
      if (!positive[c.row]) throw ConsistencyError("image_diagram: pivot on a domain-negative cell");
      consumed[c.row] = 1;
      if (birth < death) out.add(s, birth, death);
    }
    for (CellId id = 0; id < cells.size(); ++id) {
      if (positive[id] && !consumed[id]) out.add(s, p.g_dom[id], kInf);
    }
  }
  return out.canonical();
}

/// Ordinary sublevel persistence of a grid function through the image engine.
inline PersistenceDiagram sublevel_diagram(const GridFunction& f) {
  const auto c = build_complex(f);
  return image_diagram(identity_pair(c));
}

}  // namespace phest
