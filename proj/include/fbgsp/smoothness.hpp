#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/spectral.hpp"

namespace fbgsp {

/// tr(X^T op X) for any operator; the building block for the energies below.
inline double quadratic_form(const SparseOperator& op, const Matrix& x) {
  return frobenius_dot(x, apply(op, x));
}

/// E_S(X) = tr(X^T L X). Only Laplacian kinds are accepted.
inline double dirichlet_energy(const SparseOperator& lap, const Matrix& x) {
  if (!is_laplacian(lap.kind()))
    throw Error(Errc::NotALaplacian, std::string(flag_name(lap.kind())) + " is an affinity operator");
  return quadratic_form(lap, x);
}

inline double dirichlet_energy(const SparseOperator& lap, std::span<const double> x) {
  return dirichlet_energy(lap, Matrix::column(x));
}

/// E(X) = tr(X^T X).
inline double signal_energy(const Matrix& x) { return frobenius_dot(x, x); }

inline double signal_energy(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

/// E_NS = E - E_S. Negative values indicate a high-frequency signal.
inline double nonsmooth_energy(const SparseOperator& lap, const Matrix& x) {
  return signal_energy(x) - dirichlet_energy(lap, x);
}

inline double nonsmooth_energy(const SparseOperator& lap, std::span<const double> x) {
  return nonsmooth_energy(lap, Matrix::column(x));
}

/// S = E_S / E. Equals lambda for an eigenvector and may exceed 1.
inline double s_value(const SparseOperator& lap, const Matrix& x) {
  const double e = signal_energy(x);
  if (!(e > 0.0)) throw Error(Errc::ZeroSignal, "signal energy is zero");
  return dirichlet_energy(lap, x) / e;
}

inline double s_value(const SparseOperator& lap, std::span<const double> x) {
  return s_value(lap, Matrix::column(x));
}

inline Matrix one_hot_labels(std::span<const std::size_t> labels, std::size_t num_classes) {
  Matrix y(labels.size(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at node " +
                                             std::to_string(i) + " >= " + std::to_string(num_classes));
    y(i, labels[i]) = 1.0;
  }
  return y;
}

/// Mean over non-isolated nodes of the same-label fraction of neighbors.
inline double node_homophily(const Graph& g, std::span<const std::size_t> labels) {
  detail::require(labels.size() == g.node_count(), Errc::DimensionMismatch, "labels length vs node count");
  double total = 0.0;
  std::size_t counted = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    std::size_t same = 0;
    for (NodeId j : nb) same += labels[j] == labels[i] ? 1 : 0;
    total += static_cast<double>(same) / static_cast<double>(nb.size());
    ++counted;
  }
  if (counted == 0) throw Error(Errc::AllNodesIsolated, "no node has a neighbor");
  return total / static_cast<double>(counted);
}

/// Fraction of edges joining same-label nodes.
inline double edge_homophily(const Graph& g, std::span<const std::size_t> labels) {
  detail::require(labels.size() == g.node_count(), Errc::DimensionMismatch, "labels length vs node count");
  if (g.edge_count() == 0) throw Error(Errc::EmptyGraph, "graph has no edges");
  std::size_t intra = 0;
  for (const Edge& e : g.edges()) intra += labels[e.u] == labels[e.v] ? 1 : 0;
  return static_cast<double>(intra) / static_cast<double>(g.edge_count());
}

struct SmoothnessReport {
  OperatorKind laplacian_kind = OperatorKind::SymNormLaplacian;
  double feature_s = 0.0;
  double label_s = 0.0;
  double diff = 0.0;  // label_s - feature_s
  double node_homophily = 0.0;
  double edge_homophily = 0.0;
  std::size_t component_count = 0;

  friend bool operator==(const SmoothnessReport&, const SmoothnessReport&) = default;
};

/// Feature and one-hot label S-values under `kind`, plus both homophily metrics.
/// Computed on the full graph as given; component_count is reported alongside.
inline SmoothnessReport smoothness_report(const Graph& g, const Matrix& features,
                                          std::span<const std::size_t> labels,
                                          std::size_t num_classes, OperatorKind kind) {
  if (!is_laplacian(kind))
    throw Error(Errc::NotALaplacian, std::string(flag_name(kind)) + " is an affinity operator");
  const SparseOperator lap = build_operator(g, kind);
  SmoothnessReport r;
  r.laplacian_kind = kind;
  r.feature_s = s_value(lap, features);
  r.label_s = s_value(lap, one_hot_labels(labels, num_classes));
  r.diff = r.label_s - r.feature_s;
  r.node_homophily = node_homophily(g, labels);
  r.edge_homophily = edge_homophily(g, labels);
  r.component_count = diagnose(g).component_count;
  return r;
}

}  // namespace fbgsp
