#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"

namespace fbgsp {

/// Laplacian and affinity variants of an undirected graph.
enum class OperatorKind {
  Combinatorial,       // L = D - A
  SymNormLaplacian,    // L_sym = I - D^-1/2 A D^-1/2
  RwNormLaplacian,     // L_rw = I - D^-1 A
  SymAffinity,         // A_sym = D^-1/2 A D^-1/2
  RwAffinity,          // A_rw = D^-1 A
  RenormSymAffinity,   // Â_sym = (D+I)^-1/2 (A+I) (D+I)^-1/2
  RenormRwAffinity,    // Â_rw = (D+I)^-1 (A+I)
  RenormSymLaplacian,  // L̂_sym = I - Â_sym
  RenormRwLaplacian,   // L̂_rw = I - Â_rw
};

inline constexpr std::array<OperatorKind, 9> kAllOperatorKinds = {
    OperatorKind::Combinatorial,      OperatorKind::SymNormLaplacian,
    OperatorKind::RwNormLaplacian,    OperatorKind::SymAffinity,
    OperatorKind::RwAffinity,         OperatorKind::RenormSymAffinity,
    OperatorKind::RenormRwAffinity,   OperatorKind::RenormSymLaplacian,
    OperatorKind::RenormRwLaplacian};

constexpr bool is_laplacian(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::Combinatorial:
    case OperatorKind::SymNormLaplacian:
    case OperatorKind::RwNormLaplacian:
    case OperatorKind::RenormSymLaplacian:
    case OperatorKind::RenormRwLaplacian: return true;
    default: return false;
  }
}

constexpr bool is_symmetric_kind(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::Combinatorial:
    case OperatorKind::SymNormLaplacian:
    case OperatorKind::SymAffinity:
    case OperatorKind::RenormSymAffinity:
    case OperatorKind::RenormSymLaplacian: return true;
    default: return false;
  }
}

constexpr bool is_renormalized(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::RenormSymAffinity:
    case OperatorKind::RenormRwAffinity:
    case OperatorKind::RenormSymLaplacian:
    case OperatorKind::RenormRwLaplacian: return true;
    default: return false;
  }
}

/// The kind K' with op(K) + op(K') = I. The combinatorial Laplacian has none.
constexpr std::optional<OperatorKind> complement(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::SymNormLaplacian: return OperatorKind::SymAffinity;
    case OperatorKind::SymAffinity: return OperatorKind::SymNormLaplacian;
    case OperatorKind::RwNormLaplacian: return OperatorKind::RwAffinity;
    case OperatorKind::RwAffinity: return OperatorKind::RwNormLaplacian;
    case OperatorKind::RenormSymAffinity: return OperatorKind::RenormSymLaplacian;
    case OperatorKind::RenormSymLaplacian: return OperatorKind::RenormSymAffinity;
    case OperatorKind::RenormRwAffinity: return OperatorKind::RenormRwLaplacian;
    case OperatorKind::RenormRwLaplacian: return OperatorKind::RenormRwAffinity;
    case OperatorKind::Combinatorial: return std::nullopt;
  }
  return std::nullopt;
}

/// The symmetric kind similar to `k` (D^1/2 op D^-1/2 or its renormalized analog).
constexpr OperatorKind symmetric_counterpart(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::RwNormLaplacian: return OperatorKind::SymNormLaplacian;
    case OperatorKind::RwAffinity: return OperatorKind::SymAffinity;
    case OperatorKind::RenormRwAffinity: return OperatorKind::RenormSymAffinity;
    case OperatorKind::RenormRwLaplacian: return OperatorKind::RenormSymLaplacian;
    default: return k;
  }
}

/// Flag spelling used by the command line tool and the JSON reports.
constexpr std::string_view flag_name(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::Combinatorial: return "comb";
    case OperatorKind::SymNormLaplacian: return "sym";
    case OperatorKind::RwNormLaplacian: return "rw";
    case OperatorKind::SymAffinity: return "aff-sym";
    case OperatorKind::RwAffinity: return "aff-rw";
    case OperatorKind::RenormSymAffinity: return "renorm-sym";
    case OperatorKind::RenormRwAffinity: return "renorm-rw";
    case OperatorKind::RenormSymLaplacian: return "renorm-lap-sym";
    case OperatorKind::RenormRwLaplacian: return "renorm-lap-rw";
  }
  return "?";
}

inline OperatorKind parse_operator_kind(std::string_view name) {
  for (OperatorKind k : kAllOperatorKinds)
    if (flag_name(k) == name) return k;
  throw Error(Errc::InvalidArgument, "unknown operator kind '" + std::string(name) + "'");
}

/// A graph matrix in CSR form; columns ascending within each row.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(OperatorKind kind, std::size_t dim, std::vector<std::size_t> offsets,
                 std::vector<NodeId> columns, std::vector<double> values, bool symmetric)
      : kind_(kind),
        dim_(dim),
        offsets_(std::move(offsets)),
        columns_(std::move(columns)),
        values_(std::move(values)),
        symmetric_(symmetric) {}

  OperatorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  bool symmetric() const noexcept { return symmetric_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<NodeId>& columns() const noexcept { return columns_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const {
    for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p)
      if (columns_[p] == j) return values_[p];
    return 0.0;
  }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) s += values_[p];
    return s;
  }

  /// CSR of the transpose. Symmetric operators return a copy of themselves.
  SparseOperator transpose() const {
    if (symmetric_) return *this;
    std::vector<std::size_t> counts(dim_ + 1, 0);
    for (NodeId c : columns_) ++counts[c + 1];
    for (std::size_t i = 0; i < dim_; ++i) counts[i + 1] += counts[i];
    std::vector<NodeId> cols(columns_.size());
    std::vector<double> vals(values_.size());
    std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
    // Rows visited in ascending order, so the transposed rows come out sorted.
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
        const std::size_t q = cursor[columns_[p]]++;
        cols[q] = static_cast<NodeId>(i);
        vals[q] = values_[p];
      }
    }
    return SparseOperator(kind_, dim_, std::move(counts), std::move(cols), std::move(vals), false);
  }

  Matrix to_dense() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) m(i, columns_[p]) = values_[p];
    return m;
  }

 private:
  OperatorKind kind_ = OperatorKind::Combinatorial;
  std::size_t dim_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> columns_;
  std::vector<double> values_;
  bool symmetric_ = true;
};

/// Builds the operator of the requested kind. Renormalized kinds carry the
/// analytic self-loop and accept isolated nodes; the other normalized kinds
/// reject them.
inline SparseOperator build_operator(const Graph& g, OperatorKind kind) {
  const std::size_t n = g.node_count();
  const auto& deg = g.degrees();

  if (!is_renormalized(kind) && kind != OperatorKind::Combinatorial) {
    for (std::size_t i = 0; i < n; ++i)
      if (deg[i] == 0)
        throw Error(Errc::IsolatedNode, "node " + std::to_string(i) + " has degree 0; " +
                                            std::string(flag_name(kind)) + " is undefined");
  }

  // Per-node scale d_i such that the off-diagonal weight is s_i * s_j (symmetric)
  // or s_i (random walk).
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(deg[i]) + (is_renormalized(kind) ? 1.0 : 0.0);
    switch (kind) {
      case OperatorKind::SymNormLaplacian:
      case OperatorKind::SymAffinity:
      case OperatorKind::RenormSymAffinity:
      case OperatorKind::RenormSymLaplacian: scale[i] = 1.0 / std::sqrt(d); break;
      case OperatorKind::RwNormLaplacian:
      case OperatorKind::RwAffinity:
      case OperatorKind::RenormRwAffinity:
      case OperatorKind::RenormRwLaplacian: scale[i] = 1.0 / d; break;
      case OperatorKind::Combinatorial: scale[i] = 1.0; break;
    }
  }

  const bool sym_scaling = kind == OperatorKind::SymNormLaplacian ||
                           kind == OperatorKind::SymAffinity ||
                           kind == OperatorKind::RenormSymAffinity ||
                           kind == OperatorKind::RenormSymLaplacian;
  const bool negate = is_laplacian(kind);

  auto off_diagonal = [&](std::size_t i, std::size_t j) {
    const double w = sym_scaling ? scale[i] * scale[j] : scale[i];
    return negate ? -w : w;
  };

  // nullopt when the kind has no diagonal term.
  auto diagonal = [&](std::size_t i) -> std::optional<double> {
    switch (kind) {
      case OperatorKind::Combinatorial: return static_cast<double>(deg[i]);
      case OperatorKind::SymNormLaplacian:
      case OperatorKind::RwNormLaplacian: return 1.0;
      case OperatorKind::SymAffinity:
      case OperatorKind::RwAffinity: return std::nullopt;
      case OperatorKind::RenormSymAffinity: return scale[i] * scale[i];
      case OperatorKind::RenormRwAffinity: return scale[i];
      case OperatorKind::RenormSymLaplacian: return 1.0 - scale[i] * scale[i];
      case OperatorKind::RenormRwLaplacian: return 1.0 - scale[i];
    }
    return std::nullopt;
  };

  std::vector<std::size_t> offsets;
  offsets.reserve(n + 1);
  offsets.push_back(0);
  std::vector<NodeId> cols;
  std::vector<double> vals;
  cols.reserve(2 * g.edge_count() + n);
  vals.reserve(2 * g.edge_count() + n);
  for (NodeId i = 0; i < n; ++i) {
    const auto diag = diagonal(i);
    bool diag_done = !diag.has_value();
    for (NodeId j : g.neighbors(i)) {
      if (!diag_done && j > i) {
        cols.push_back(i);
        vals.push_back(*diag);
        diag_done = true;
      }
      cols.push_back(j);
      vals.push_back(off_diagonal(i, j));
    }
    if (!diag_done) {
      cols.push_back(i);
      vals.push_back(*diag);
    }
    offsets.push_back(cols.size());
  }
  return SparseOperator(kind, n, std::move(offsets), std::move(cols), std::move(vals),
                        is_symmetric_kind(kind));
}

/// op * X. Each output entry sums its row in ascending column order.
inline Matrix apply(const SparseOperator& op, const Matrix& x) {
  detail::require(x.rows() == op.dim(), Errc::DimensionMismatch,
                  "operator dim " + std::to_string(op.dim()) + " vs signal " + shape_string(x));
  const std::size_t f = x.cols();
  Matrix out(op.dim(), f);
  const auto& off = op.offsets();
  const auto& cols = op.columns();
  const auto& vals = op.values();
  for (std::size_t i = 0; i < op.dim(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
      const double w = vals[p];
      const double* xr = x.row(cols[p]).data();
      for (std::size_t k = 0; k < f; ++k) o[k] += w * xr[k];
    }
  }
  return out;
}

inline std::vector<double> apply(const SparseOperator& op, std::span<const double> x) {
  return apply(op, Matrix::column(x)).values();
}

/// Node-level form of Â_rw: average over the closed neighborhood.
inline std::vector<double> mean_aggregate(const Graph& g, std::span<const double> x) {
  detail::require(x.size() == g.node_count(), Errc::DimensionMismatch,
                  "signal length " + std::to_string(x.size()) + " vs " +
                      std::to_string(g.node_count()) + " nodes");
  std::vector<double> out(x.size());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    double s = x[i];
    for (NodeId j : g.neighbors(i)) s += x[j];
    out[i] = s / static_cast<double>(g.degree(i) + 1);
  }
  return out;
}

}  // namespace fbgsp
