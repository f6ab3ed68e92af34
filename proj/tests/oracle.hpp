#pragma once

// Dense reference implementations used as test oracles. They are written
// straight from the matrix definitions and share no code with the sparse
// kernels under test beyond Matrix storage and the graph's edge list.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/spectral.hpp"

namespace fbgsp {

/// Readable gtest failure output for matrices.
inline void PrintTo(const Matrix& m, std::ostream* os) {
  *os << shape_string(m) << " [";
  for (std::size_t i = 0; i < m.rows() && i < 6; ++i) {
    *os << (i ? "; " : "");
    for (std::size_t j = 0; j < m.cols() && j < 6; ++j) *os << (j ? " " : "") << m(i, j);
  }
  *os << (m.rows() > 6 || m.cols() > 6 ? " ...]" : "]");
}

}  // namespace fbgsp

namespace oracle {

using fbgsp::Graph;
using fbgsp::Matrix;
using fbgsp::OperatorKind;

inline Matrix adjacency(const Graph& g) {
  const std::size_t n = g.node_count();
  Matrix a(n, n);
  for (const fbgsp::Edge& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

inline Matrix dense_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

/// diag(left) * m * diag(right)
inline Matrix diag_scale(const std::vector<double>& left, const Matrix& m, const std::vector<double>& right) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = left[i] * m(i, j) * right[j];
  return out;
}

inline Matrix identity_minus(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = (i == j ? 1.0 : 0.0) - m(i, j);
  return out;
}

/// Every operator kind from A and D: L = D - A, A_sym = D^-1/2 A D^-1/2,
/// A_rw = D^-1 A, renormalized forms use A + I and D + I.
inline Matrix dense_operator(const Graph& g, OperatorKind kind) {
  const std::size_t n = g.node_count();
  Matrix a = adjacency(g);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i] += a(i, j);

  const bool renorm = fbgsp::is_renormalized(kind);
  if (renorm) {
    for (std::size_t i = 0; i < n; ++i) {
      a(i, i) += 1.0;
      d[i] += 1.0;
    }
  }
  std::vector<double> inv_sqrt(n), inv(n), ones(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(d[i]);
    inv[i] = 1.0 / d[i];
  }
  switch (kind) {
    case OperatorKind::Combinatorial: {
      Matrix l = a;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? d[i] : 0.0) - a(i, j);
      return l;
    }
    case OperatorKind::SymAffinity:
    case OperatorKind::RenormSymAffinity: return diag_scale(inv_sqrt, a, inv_sqrt);
    case OperatorKind::RwAffinity:
    case OperatorKind::RenormRwAffinity: return diag_scale(inv, a, ones);
    case OperatorKind::SymNormLaplacian:
    case OperatorKind::RenormSymLaplacian: return identity_minus(diag_scale(inv_sqrt, a, inv_sqrt));
    case OperatorKind::RwNormLaplacian:
    case OperatorKind::RenormRwLaplacian: return identity_minus(diag_scale(inv, a, ones));
  }
  return a;
}

inline double trace_xt_m_x(const Matrix& m, const Matrix& x) {
  const Matrix mx = dense_matmul(m, x);
  long double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x.values()[i]) * mx.values()[i];
  return static_cast<double>(s);
}

/// Dirichlet energy as the edge sum: for L, sum over edges of ||x_i - x_j||^2;
/// for L_sym, the same with each endpoint scaled by 1/sqrt(d).
inline double edge_sum_energy(const Graph& g, const Matrix& x, bool normalized) {
  long double s = 0;
  for (const fbgsp::Edge& e : g.edges()) {
    const double su = normalized ? 1.0 / std::sqrt(static_cast<double>(g.degree(e.u))) : 1.0;
    const double sv = normalized ? 1.0 / std::sqrt(static_cast<double>(g.degree(e.v))) : 1.0;
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double diff = su * x(e.u, k) - sv * x(e.v, k);
      s += static_cast<long double>(diff) * diff;
    }
  }
  return static_cast<double>(s);
}

/// Erdos-Renyi G(n, p) from std::mt19937_64 (independent of the library RNG).
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<fbgsp::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(eng) < p) edges.push_back({static_cast<fbgsp::NodeId>(i), static_cast<fbgsp::NodeId>(j)});
  return fbgsp::build_graph(std::span<const fbgsp::Edge>(edges), n);
}

/// G(n, p) plus a random spanning path and one triangle, so the result is
/// connected and not bipartite.
inline Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), eng);
  std::vector<fbgsp::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<fbgsp::NodeId>(order[i]), static_cast<fbgsp::NodeId>(order[i + 1])});
  if (n >= 3) edges.push_back({static_cast<fbgsp::NodeId>(order[0]), static_cast<fbgsp::NodeId>(order[2])});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(eng) < p) edges.push_back({static_cast<fbgsp::NodeId>(i), static_cast<fbgsp::NodeId>(j)});
  return fbgsp::build_graph(std::span<const fbgsp::Edge>(edges), n);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = nd(eng);
  return m;
}

inline Graph path_graph(std::size_t n) {
  std::vector<fbgsp::Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({static_cast<fbgsp::NodeId>(i), static_cast<fbgsp::NodeId>(i + 1)});
  return fbgsp::build_graph(std::span<const fbgsp::Edge>(e), n);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<fbgsp::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.push_back({static_cast<fbgsp::NodeId>(i), static_cast<fbgsp::NodeId>(j)});
  return fbgsp::build_graph(std::span<const fbgsp::Edge>(e), n);
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<fbgsp::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    e.push_back({static_cast<fbgsp::NodeId>(i), static_cast<fbgsp::NodeId>((i + 1) % n)});
  return fbgsp::build_graph(std::span<const fbgsp::Edge>(e), n);
}

}  // namespace oracle
