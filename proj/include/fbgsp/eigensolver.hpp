#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/spectral.hpp"

namespace fbgsp {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // column k pairs with eigenvalues[k]
  std::size_t sweeps = 0;
};

struct JacobiOptions {
  std::size_t max_dim = 2048;
  double symmetry_tolerance = 1e-10;
  /// Stop once max |off-diagonal| <= relative_tolerance * ||A||_F.
  double relative_tolerance = 1e-11;
  /// Sweep cap is sweeps_per_dim * N.
  std::size_t sweeps_per_dim = 100;
};

/// Cyclic (row-by-row) Jacobi rotations on a dense symmetric matrix.
inline EigenDecomposition eigendecompose_symmetric(const Matrix& input, const JacobiOptions& opt = {}) {
  const std::size_t n = input.rows();
  detail::require(input.cols() == n, Errc::DimensionMismatch,
                  "eigensolver needs a square matrix, got " + shape_string(input));
  if (n > opt.max_dim)
    throw Error(Errc::MatrixTooLarge,
                "dimension " + std::to_string(n) + " exceeds cap " + std::to_string(opt.max_dim));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > opt.symmetry_tolerance)
        throw Error(Errc::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") differ beyond tolerance");

  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);

  const double threshold = opt.relative_tolerance * frobenius_norm(a);
  auto max_off_diagonal = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
  };

  const std::size_t max_sweeps = opt.sweeps_per_dim * std::max<std::size_t>(n, 1);
  std::size_t sweep = 0;
  while (max_off_diagonal() > threshold) {
    if (sweep == max_sweeps)
      throw Error(Errc::NoConvergence, "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          a(k, p) = a(p, k) = np;
          a(k, q) = a(q, k) = nq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// U^T x: coordinates of x in the eigenvector basis.
inline std::vector<double> graph_fourier_transform(const EigenDecomposition& eig, std::span<const double> x) {
  const Matrix& u = eig.eigenvectors;
  detail::require(x.size() == u.rows(), Errc::DimensionMismatch,
                  "signal length " + std::to_string(x.size()) + " vs basis " + shape_string(u));
  std::vector<double> out(u.cols(), 0.0);
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t k = 0; k < u.cols(); ++k) out[k] += u(i, k) * x[i];
  return out;
}

/// Columns D^-1/2 u_sym for an eigendecomposition of L_sym. Each column is
/// checked against L_rw u = lambda u before returning.
inline Matrix rw_eigenvectors_from_sym(const Graph& g, const EigenDecomposition& sym_eig,
                                       double residual_tolerance = 1e-8) {
  const std::size_t n = g.node_count();
  detail::require(sym_eig.eigenvectors.rows() == n, Errc::DimensionMismatch,
                  "eigenbasis does not match graph size");
  for (std::size_t i = 0; i < n; ++i)
    if (g.degree(static_cast<NodeId>(i)) == 0)
      throw Error(Errc::IsolatedNode, "node " + std::to_string(i) + " is isolated");

  Matrix u = sym_eig.eigenvectors;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = 1.0 / std::sqrt(static_cast<double>(g.degree(static_cast<NodeId>(i))));
    for (double& x : u.row(i)) x *= s;
  }

  const Matrix lu = apply(build_operator(g, OperatorKind::RwNormLaplacian), u);
  for (std::size_t k = 0; k < u.cols(); ++k) {
    double res = 0.0;
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res = std::max(res, std::abs(lu(i, k) - sym_eig.eigenvalues[k] * u(i, k)));
      nrm = std::max(nrm, std::abs(u(i, k)));
    }
    if (res > residual_tolerance * std::max(1.0, nrm))
      throw Error(Errc::InvalidArgument, "column " + std::to_string(k) +
                                             " is not an L_rw eigenvector; was the input from L_sym?");
  }
  return u;
}

/// Ascending spectrum of any operator kind. Non-symmetric kinds never reach
/// the eigensolver: they are similar to their symmetric counterpart.
inline std::vector<double> operator_spectrum(const Graph& g, OperatorKind kind, const JacobiOptions& opt = {}) {
  if (g.node_count() > opt.max_dim)
    throw Error(Errc::MatrixTooLarge, "dimension " + std::to_string(g.node_count()) +
                                          " exceeds cap " + std::to_string(opt.max_dim));
  const SparseOperator op = build_operator(g, symmetric_counterpart(kind));
  return eigendecompose_symmetric(op.to_dense(), opt).eigenvalues;
}

}  // namespace fbgsp
