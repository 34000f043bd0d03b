#pragma once

// Filtered cell complexes (cubical complexes of grid functions, or explicit
// complexes given by boundary lists), boundary-matrix reduction over Z/2 and
// diagram extraction.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "phest/diagram.hpp"
#include "phest/errors.hpp"
#include "phest/grid.hpp"

namespace phest {

using CellId = std::uint32_t;

/// Cell incidence structure without filtration values. Either the full cubical
/// complex of an extended grid (cells addressed by doubled coordinates, where odd
/// coordinates span a cube edge) or an explicit complex given by facet lists.
class CellStructure {
 public:
  static std::shared_ptr<const CellStructure> cubical(int d, int extent) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const CellStructure>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{d, extent}];
    if (!slot) {
      auto s = std::shared_ptr<CellStructure>(new CellStructure());
      s->d_ = d;
      s->grid_extent_ = extent;
      s->side_ = 2 * extent + 1;
      s->strides_.assign(d, 1);
      for (int k = d - 2; k >= 0; --k) s->strides_[k] = s->strides_[k + 1] * static_cast<std::size_t>(s->side_);
      s->size_ = s->strides_[0] * static_cast<std::size_t>(s->side_);
      if (s->size_ > std::numeric_limits<CellId>::max()) throw ResourceError("cubical complex too large");
      slot = s;
    }
    return slot;
  }

  /// Explicit complex: `boundaries[i]` lists the facets of cell i.
  static std::shared_ptr<const CellStructure> explicit_cells(std::vector<int> dims,
                                                             std::vector<std::vector<CellId>> boundaries) {
    if (dims.size() != boundaries.size()) throw ValidationError("explicit complex: dims/boundaries size mismatch");
    auto s = std::shared_ptr<CellStructure>(new CellStructure());
    s->size_ = dims.size();
    s->dims_ = std::move(dims);
    s->d_ = 0;
    for (int k : s->dims_) s->d_ = std::max(s->d_, k);
    s->bnd_off_.push_back(0);
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
      auto b = boundaries[i];
      std::sort(b.begin(), b.end());
      for (CellId f : b) {
        if (f >= s->size_) throw ValidationError("explicit complex: facet id out of range");
        if (s->dims_[f] != s->dims_[i] - 1) throw ValidationError("explicit complex: facet dimension mismatch");
      }
      if (s->dims_[i] > 0 && b.empty()) throw ValidationError("explicit complex: positive-dimensional cell without facets");
      s->bnd_.insert(s->bnd_.end(), b.begin(), b.end());
      s->bnd_off_.push_back(static_cast<CellId>(s->bnd_.size()));
    }
    std::vector<std::vector<CellId>> cob(s->size_);
    for (CellId i = 0; i < s->size_; ++i) {
      for (CellId k = s->bnd_off_[i]; k < s->bnd_off_[i + 1]; ++k) cob[s->bnd_[k]].push_back(i);
    }
    s->cob_off_.push_back(0);
    for (auto& c : cob) {
      s->cob_.insert(s->cob_.end(), c.begin(), c.end());
      s->cob_off_.push_back(static_cast<CellId>(s->cob_.size()));
    }
    return s;
  }

  bool is_grid() const { return grid_extent_ > 0; }
  /// Ambient dimension for grid complexes, maximal cell dimension otherwise.
  int dimension() const { return d_; }
  int grid_extent() const { return grid_extent_; }
  std::size_t size() const { return size_; }

  int coord(CellId id, int axis) const {
    return static_cast<int>((id / strides_[axis]) % static_cast<std::size_t>(side_));
  }

  int dim(CellId id) const {
    if (!is_grid()) return dims_[id];
    int k = 0;
    for (int a = 0; a < d_; ++a) k += coord(id, a) & 1;
    return k;
  }

  template <class Fn>
  void for_each_facet(CellId id, Fn&& fn) const {
    if (!is_grid()) {
      for (CellId k = bnd_off_[id]; k < bnd_off_[id + 1]; ++k) fn(bnd_[k]);
      return;
    }
    for (int a = 0; a < d_; ++a) {
      if (coord(id, a) & 1) {
        fn(static_cast<CellId>(id - strides_[a]));
        fn(static_cast<CellId>(id + strides_[a]));
      }
    }
  }

  template <class Fn>
  void for_each_cofacet(CellId id, Fn&& fn) const {
    if (!is_grid()) {
      for (CellId k = cob_off_[id]; k < cob_off_[id + 1]; ++k) fn(cob_[k]);
      return;
    }
    for (int a = 0; a < d_; ++a) {
      const int c = coord(id, a);
      if ((c & 1) == 0) {
        if (c > 0) fn(static_cast<CellId>(id - strides_[a]));
        if (c + 1 < side_) fn(static_cast<CellId>(id + strides_[a]));
      }
    }
  }

  std::vector<CellId> facets(CellId id) const {
    std::vector<CellId> out;
    for_each_facet(id, [&](CellId f) { out.push_back(f); });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Top-dimensional cell of the grid cube with the given flat index.
  CellId top_cell(const GridSpec& spec, std::size_t cube) const {
    const Index idx = spec.unflat(cube);
    std::size_t id = 0;
    for (int a = 0; a < d_; ++a) id += static_cast<std::size_t>(2 * idx[a] + 1) * strides_[a];
    return static_cast<CellId>(id);
  }

  /// Doubled coordinates of a grid cell.
  std::vector<int> doubled_coords(CellId id) const {
    std::vector<int> c(d_);
    for (int a = 0; a < d_; ++a) c[a] = coord(id, a);
    return c;
  }

 private:
  CellStructure() = default;

  int d_ = 0;
  std::size_t size_ = 0;
  // grid
  int grid_extent_ = 0;
  int side_ = 0;
  std::vector<std::size_t> strides_;
  // explicit
  std::vector<int> dims_;
  std::vector<CellId> bnd_off_, bnd_, cob_off_, cob_;
};

/// Values on every cell of a grid structure: each cell takes the minimum of the
/// grid function over the top cells (cubes) containing it; +inf marks absent cells.
inline std::vector<double> cubical_cell_values(const CellStructure& cells, const GridFunction& f) {
  const int d = f.spec.d;
  const int side = 2 * f.spec.extent() + 1;
  std::vector<double> v(cells.size(), kInf);
  for (std::size_t cube = 0; cube < f.values.size(); ++cube) v[cells.top_cell(f.spec, cube)] = f.values[cube];
  // Pass k fills cells whose even coordinates all lie on axes <= k.
  std::vector<std::size_t> strides(d, 1);
  for (int k = d - 2; k >= 0; --k) strides[k] = strides[k + 1] * static_cast<std::size_t>(side);
  for (int k = 0; k < d; ++k) {
    for (CellId id = 0; id < cells.size(); ++id) {
      const int ck = cells.coord(id, k);
      if (ck & 1) continue;
      bool eligible = true;
      for (int a = k + 1; a < d && eligible; ++a) eligible = (cells.coord(id, a) & 1) != 0;
      if (!eligible) continue;
      double m = kInf;
      if (ck > 0) m = std::min(m, v[id - strides[k]]);
      if (ck + 1 < side) m = std::min(m, v[id + strides[k]]);
      v[id] = m;
    }
  }
  return v;
}

/// A cell structure with a monotone filtration value per cell. Cells valued +inf
/// are absent; present cells are ordered by (value, dimension, id).
struct FiltrationComplex {
  std::shared_ptr<const CellStructure> cells;
  std::vector<double> values;
  std::vector<CellId> order;

  static FiltrationComplex make(std::shared_ptr<const CellStructure> cells, std::vector<double> values) {
    FiltrationComplex c;
    c.cells = std::move(cells);
    c.values = std::move(values);
    c.validate();
    for (CellId id = 0; id < c.values.size(); ++id) {
      if (c.values[id] < kInf) c.order.push_back(id);
    }
    std::vector<int> dims(c.values.size(), 0);
    for (CellId id : c.order) dims[id] = c.cells->dim(id);
    std::sort(c.order.begin(), c.order.end(), [&](CellId a, CellId b) {
      if (c.values[a] != c.values[b]) return c.values[a] < c.values[b];
      if (dims[a] != dims[b]) return dims[a] < dims[b];
      return a < b;
    });
    return c;
  }

  /// Explicit complex from dimensions, facet lists and values.
  static FiltrationComplex make(std::vector<int> dims, std::vector<std::vector<CellId>> boundaries,
                                std::vector<double> values) {
    return make(CellStructure::explicit_cells(std::move(dims), std::move(boundaries)), std::move(values));
  }

  void validate() const {
    if (!cells) throw ValidationError("FiltrationComplex: missing cell structure");
    if (values.size() != cells->size()) throw ValidationError("FiltrationComplex: one value per cell required");
    for (CellId id = 0; id < values.size(); ++id) {
      if (std::isnan(values[id])) throw ValidationError("FiltrationComplex: NaN value");
      if (values[id] == kInf) continue;
      cells->for_each_facet(id, [&](CellId f) {
        if (!(values[f] <= values[id])) {
          throw ValidationError("FiltrationComplex: non-monotone filtration at cell " + std::to_string(id));
        }
      });
    }
  }

  std::size_t size() const { return order.size(); }
  int dim(CellId id) const { return cells->dim(id); }
};

/// Cubical complex of the closed cube union of a grid function's sublevel sets:
/// cubes with finite value are top cells, faces take the minimum over incident cubes.
inline FiltrationComplex build_complex(const GridFunction& f) {
  f.validate();
  if (!f.has_finite_value()) throw ValidationError("build_complex: grid function has no finite value");
  auto cells = CellStructure::cubical(f.spec.d, f.spec.extent());
  return FiltrationComplex::make(cells, cubical_cell_values(*cells, f));
}

// ---- reduction -----------------------------------------------------------------

namespace detail {

// Symmetric difference of two sorted index lists.
inline void xor_into(std::vector<CellId>& acc, const std::vector<CellId>& other, std::vector<CellId>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(scratch));
  acc.swap(scratch);
}

/// Left-to-right Z/2 column reduction with lowest-one pivots. Rows are small
/// integer ranks; the low of a column is its largest rank.
class ColumnReducer {
 public:
  explicit ColumnReducer(std::size_t rows) : pivot_(rows, kNone) {}

  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  /// Reduces `col` (sorted ranks) against earlier columns. Returns the pivot
  /// rank, or kNone for a column reducing to zero.
  std::uint32_t add(std::vector<CellId> col) {
    while (!col.empty()) {
      const CellId low = col.back();
      const std::uint32_t j = pivot_[low];
      if (j == kNone) break;
      xor_into(col, stored_[j], scratch_);
    }
    if (col.empty()) return kNone;
    const CellId low = col.back();
    pivot_[low] = static_cast<std::uint32_t>(stored_.size());
    stored_.push_back(std::move(col));
    return low;
  }

 private:
  std::vector<std::uint32_t> pivot_;
  std::vector<std::vector<CellId>> stored_;
  std::vector<CellId> scratch_;
};

}  // namespace detail

struct ReductionResult {
  struct Pair {
    CellId column;  ///< negative cell (death)
    CellId row;     ///< its pivot, the positive cell it kills (birth)
  };
  std::vector<Pair> pivots;     ///< sorted by column id
  std::vector<CellId> essential;  ///< unpaired positive cells, sorted by id
};

struct ReduceOptions {
  /// Skip columns of cells already known to be pivot rows (twist optimisation).
  bool clearing = true;
};

/// Standard persistence reduction of the full boundary matrix in filtration order.
inline ReductionResult reduce(const FiltrationComplex& c, const ReduceOptions& opts = {}) {
  c.validate();
  const std::size_t m = c.order.size();
  std::vector<std::uint32_t> pos(c.values.size(), detail::ColumnReducer::kNone);
  for (std::size_t i = 0; i < m; ++i) pos[c.order[i]] = static_cast<std::uint32_t>(i);

  int top = 0;
  std::vector<std::vector<CellId>> by_dim;
  for (CellId id : c.order) {
    const int k = c.dim(id);
    if (static_cast<int>(by_dim.size()) <= k) by_dim.resize(k + 1);
    by_dim[k].push_back(id);
    top = std::max(top, k);
  }

  std::vector<char> is_pivot_row(c.values.size(), 0);
  std::vector<char> is_zero_column(c.values.size(), 0);
  ReductionResult result;
  detail::ColumnReducer reducer(m);

  std::vector<int> dims_to_process;
  for (int k = 1; k <= top; ++k) dims_to_process.push_back(k);
  if (opts.clearing) std::reverse(dims_to_process.begin(), dims_to_process.end());

  for (int k : dims_to_process) {
    for (CellId id : by_dim[k]) {
      if (opts.clearing && is_pivot_row[id]) continue;
      std::vector<CellId> col;
      c.cells->for_each_facet(id, [&](CellId f) { col.push_back(pos[f]); });
      std::sort(col.begin(), col.end());
      const auto low = reducer.add(std::move(col));
      if (low == detail::ColumnReducer::kNone) {
        is_zero_column[id] = 1;
      } else {
        const CellId row = c.order[low];
        is_pivot_row[row] = 1;
        result.pivots.push_back({id, row});
      }
    }
  }
  for (CellId id : c.order) {
    const bool positive = c.dim(id) == 0 || is_zero_column[id];
    if (positive && !is_pivot_row[id]) result.essential.push_back(id);
  }
  std::sort(result.pivots.begin(), result.pivots.end(),
            [](const auto& a, const auto& b) { return a.column < b.column; });
  std::sort(result.essential.begin(), result.essential.end());
  return result;
}

/// Diagram of a reduced complex. Zero-length pairs are dropped.
inline PersistenceDiagram diagram(const FiltrationComplex& c, const ReductionResult& r) {
  PersistenceDiagram out;
  for (const auto& p : r.pivots) {
    const double birth = c.values[p.row];
    const double death = c.values[p.column];
    if (birth < death) out.add(c.dim(p.row), birth, death);
  }
  for (CellId id : r.essential) out.add(c.dim(id), c.values[id], kInf);
  return out.canonical();
}

}  // namespace phest
