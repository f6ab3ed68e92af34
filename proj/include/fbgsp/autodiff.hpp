#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/spectral.hpp"

namespace fbgsp::ad {

class Tape;

/// Handle to a node on a Tape. Valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in execution order and replays them in reverse.
///
/// Leaves created with requires_grad accumulate gradients across backward
/// calls until zero_grad(). Interior gradients are recomputed on every pass.
class Tape {
 public:
  /// Gradient buffers handed to each op's backward function.
  class GradSink {
   public:
    /// Buffer for node `id`, or nullptr when that node needs no gradient.
    Matrix* target(std::size_t id) {
      if (!tape_->nodes_[id].requires_grad) return nullptr;
      Matrix& g = work_[id];
      if (g.empty() && !tape_->nodes_[id].value.empty()) g = Matrix(tape_->nodes_[id].value.rows(), tape_->nodes_[id].value.cols());
      return &g;
    }

   private:
    friend class Tape;
    GradSink(Tape* tape, std::size_t n) : tape_(tape), work_(n) {}
    Tape* tape_;
    std::vector<Matrix> work_;
  };

  using BackwardFn = std::function<void(const Matrix& upstream, GradSink& sink)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Matrix value, bool requires_grad = false) {
    check_finite(value, "leaf");
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.is_leaf = true;
    n.op = "leaf";
    nodes_.push_back(std::move(n));
    return Tensor(this, nodes_.size() - 1);
  }

  Tensor scalar(double v, bool requires_grad = false) { return leaf(Matrix(1, 1, v), requires_grad); }

  /// Appends an interior node. `parents` must already be on this tape.
  Tensor record(std::string_view op, Matrix value, std::vector<std::size_t> parents, BackwardFn fn) {
    check_finite(value, op);
    Node n;
    n.value = std::move(value);
    n.op = op;
    for (std::size_t p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    n.parents = std::move(parents);
    n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Tensor(this, nodes_.size() - 1);
  }

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Accumulated gradient of a leaf (zeros before any backward).
  Matrix grad(const Tensor& t) const {
    const Node& n = nodes_[t.id()];
    if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }

  /// Visits nodes in strict reverse recording order from `loss`.
  void backward(const Tensor& loss) {
    detail::require(loss.tape() == this, Errc::InvalidArgument, "loss belongs to another tape");
    const Matrix& lv = nodes_[loss.id()].value;
    if (lv.rows() != 1 || lv.cols() != 1)
      throw Error(Errc::LossNotScalar, "loss has shape " + shape_string(lv));
    if (!nodes_[loss.id()].requires_grad) return;

    GradSink sink(this, loss.id() + 1);
    sink.work_[loss.id()] = Matrix(1, 1, 1.0);
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      Matrix& g = sink.work_[id];
      if (!n.requires_grad || g.empty()) continue;
      if (n.is_leaf) {
        if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
        add_inplace(n.grad, g);
      } else {
        n.backward(g, sink);
      }
      g = Matrix();
    }
  }

  void zero_grad() {
    for (Node& n : nodes_)
      if (!n.grad.empty()) std::fill(n.grad.values().begin(), n.grad.values().end(), 0.0);
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool is_leaf = false;
    std::string_view op;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };

  static void check_finite(const Matrix& m, std::string_view op) {
    if (!all_finite(m)) throw Error(Errc::NonFiniteValue, "non-finite value produced by " + std::string(op));
  }

  // deque keeps value references stable while the tape grows.
  std::deque<Node> nodes_;
};

inline const Matrix& Tensor::value() const { return tape_->value(id_); }

namespace detail_ad {

inline Tape& same_tape(const Tensor& a, const Tensor& b) {
  detail::require(a.valid() && a.tape() == b.tape(), Errc::InvalidArgument, "tensors on different tapes");
  return *a.tape();
}

}  // namespace detail_ad

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = detail_ad::same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("matmul", fbgsp::matmul(a.value(), b.value()), {ia, ib},
                  [&t, ia, ib](const Matrix& up, Tape::GradSink& sink) {
                    if (Matrix* ga = sink.target(ia)) add_inplace(*ga, fbgsp::matmul_bt(up, t.value(ib)));
                    if (Matrix* gb = sink.target(ib)) add_inplace(*gb, fbgsp::matmul_at(t.value(ia), up));
                  });
}

/// a * b^T.
inline Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  Tape& t = detail_ad::same_tape(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("matmul_bt", fbgsp::matmul_bt(a.value(), b.value()), {ia, ib},
                  [&t, ia, ib](const Matrix& up, Tape::GradSink& sink) {
                    if (Matrix* ga = sink.target(ia)) add_inplace(*ga, fbgsp::matmul(up, t.value(ib)));
                    if (Matrix* gb = sink.target(ib)) add_inplace(*gb, fbgsp::matmul_at(up, t.value(ia)));
                  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  Tape& t = detail_ad::same_tape(a, b);
  detail::require(a.value().same_shape(b.value()), Errc::ShapeMismatch,
                  "add " + shape_string(a.value()) + " + " + shape_string(b.value()));
  Matrix out = a.value();
  add_inplace(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("add", std::move(out), {ia, ib}, [ia, ib](const Matrix& up, Tape::GradSink& sink) {
    if (Matrix* ga = sink.target(ia)) add_inplace(*ga, up);
    if (Matrix* gb = sink.target(ib)) add_inplace(*gb, up);
  });
}

/// s * a for a 1x1 tensor s.
inline Tensor scale(const Tensor& a, const Tensor& s) {
  Tape& t = detail_ad::same_tape(a, s);
  detail::require(s.rows() == 1 && s.cols() == 1, Errc::ShapeMismatch, "scale factor must be 1x1");
  const std::size_t ia = a.id(), is = s.id();
  return t.record("scale", fbgsp::scaled(a.value(), s.value()(0, 0)), {ia, is},
                  [&t, ia, is](const Matrix& up, Tape::GradSink& sink) {
                    if (Matrix* ga = sink.target(ia)) add_inplace(*ga, up, t.value(is)(0, 0));
                    if (Matrix* gs = sink.target(is)) (*gs)(0, 0) += frobenius_dot(up, t.value(ia));
                  });
}

inline Tensor relu(const Tensor& a) {
  Tape& t = *a.tape();
  Matrix out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const std::size_t ia = a.id();
  return t.record("relu", std::move(out), {ia}, [&t, ia](const Matrix& up, Tape::GradSink& sink) {
    Matrix* ga = sink.target(ia);
    if (!ga) return;
    const auto& x = t.value(ia).values();
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] > 0.0) ga->values()[k] += up.values()[k];
  });
}

namespace detail_ad {

inline double logistic(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

}  // namespace detail_ad

/// Elementwise logistic function; used on the 1x1 mixing parameters.
inline Tensor sigmoid(const Tensor& a) {
  Tape& t = *a.tape();
  Matrix out = a.value();
  for (double& v : out.values()) v = detail_ad::logistic(v);
  const std::size_t ia = a.id();
  return t.record("sigmoid", std::move(out), {ia}, [&t, ia](const Matrix& up, Tape::GradSink& sink) {
    Matrix* ga = sink.target(ia);
    if (!ga) return;
    const auto& x = t.value(ia).values();
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double s = detail_ad::logistic(x[k]);
      ga->values()[k] += up.values()[k] * s * (1.0 - s);
    }
  });
}

/// A sparse operator paired with its transpose, built once per graph.
struct PropagationOperator {
  SparseOperator forward;
  SparseOperator adjoint;

  explicit PropagationOperator(SparseOperator op) : forward(std::move(op)), adjoint(forward.transpose()) {}
  PropagationOperator(const Graph& g, OperatorKind kind) : PropagationOperator(build_operator(g, kind)) {}

  OperatorKind kind() const noexcept { return forward.kind(); }
  std::size_t dim() const noexcept { return forward.dim(); }
};

/// op * h. The backward pass applies op^T. `op` must outlive the tape.
inline Tensor sparse_apply(const PropagationOperator& op, const Tensor& h) {
  Tape& t = *h.tape();
  detail::require(op.dim() == h.rows(), Errc::DimensionMismatch,
                  "operator dim " + std::to_string(op.dim()) + " vs " + shape_string(h.value()));
  const std::size_t ih = h.id();
  const SparseOperator* adj = &op.adjoint;
  return t.record("sparse_apply", fbgsp::apply(op.forward, h.value()), {ih},
                  [adj, ih](const Matrix& up, Tape::GradSink& sink) {
                    if (Matrix* gh = sink.target(ih)) add_inplace(*gh, fbgsp::apply(*adj, up));
                  });
}

enum class Channel { LowPass, HighPass };

/// Node-level neighborhood combination with fixed weights w_ij = 1/(D_ii+1):
///   low pass:  out_i = sum_{j in N(i) u {i}} w_ij (h_i + h_j)
///   high pass: out_i = sum_{j in N(i) u {i}} w_ij (h_i - h_j)
/// `g` must outlive the tape.
inline Tensor neighborhood_combine(const Graph& g, const Tensor& h, Channel channel) {
  Tape& t = *h.tape();
  const std::size_t n = g.node_count();
  detail::require(h.rows() == n, Errc::ShapeMismatch,
                  "signal " + shape_string(h.value()) + " on " + std::to_string(n) + " nodes");
  const double sign = channel == Channel::LowPass ? 1.0 : -1.0;
  const Matrix& x = h.value();
  const std::size_t f = x.cols();
  Matrix out(n, f);
  for (NodeId i = 0; i < n; ++i) {
    const double w = 1.0 / static_cast<double>(g.degree(i) + 1);
    const auto xi = x.row(i);
    auto oi = out.row(i);
    auto accumulate = [&](NodeId j) {
      const auto xj = x.row(j);
      for (std::size_t k = 0; k < f; ++k) oi[k] += w * (xi[k] + sign * xj[k]);
    };
    accumulate(i);
    for (NodeId j : g.neighbors(i)) accumulate(j);
  }
  const std::size_t ih = h.id();
  const Graph* gp = &g;
  return t.record(channel == Channel::LowPass ? "aggregate" : "diversify", std::move(out), {ih},
                  [gp, ih, sign](const Matrix& up, Tape::GradSink& sink) {
                    Matrix* gh = sink.target(ih);
                    if (!gh) return;
                    const std::size_t f = up.cols();
                    for (NodeId i = 0; i < gp->node_count(); ++i) {
                      const double w = 1.0 / static_cast<double>(gp->degree(i) + 1);
                      const auto ui = up.row(i);
                      auto gi = gh->row(i);
                      auto spread = [&](NodeId j) {
                        auto gj = gh->row(j);
                        for (std::size_t k = 0; k < f; ++k) {
                          gi[k] += w * ui[k];
                          gj[k] += sign * w * ui[k];
                        }
                      };
                      spread(i);
                      for (NodeId j : gp->neighbors(i)) spread(j);
                    }
                  });
}

inline Tensor sum(const Tensor& a) {
  Tape& t = *a.tape();
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  return t.record("sum", Matrix(1, 1, s), {ia}, [ia](const Matrix& up, Tape::GradSink& sink) {
    if (Matrix* ga = sink.target(ia))
      for (double& v : ga->values()) v += up(0, 0);
  });
}

/// ||a||_F^2.
inline Tensor sum_squares(const Tensor& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record("sum_squares", Matrix(1, 1, frobenius_dot(a.value(), a.value())), {ia},
                  [&t, ia](const Matrix& up, Tape::GradSink& sink) {
                    if (Matrix* ga = sink.target(ia)) add_inplace(*ga, t.value(ia), 2.0 * up(0, 0));
                  });
}

/// Row-wise softmax probabilities with max subtraction.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double denom = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) denom += (p(i, c) = std::exp(z[c] - m));
    for (std::size_t c = 0; c < z.size(); ++c) p(i, c) /= denom;
  }
  return p;
}

/// Mean over masked rows of -log softmax(logits)[label].
inline Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels,
                                    std::span<const std::size_t> mask) {
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  if (mask.empty()) throw Error(Errc::EmptyMask, "cross entropy over an empty node set");
  detail::require(labels.size() == z.rows(), Errc::ShapeMismatch,
                  "labels length " + std::to_string(labels.size()) + " vs logits " + shape_string(z));
  double loss = 0.0;
  for (std::size_t i : mask) {
    detail::require(i < z.rows(), Errc::IndexOutOfRange, "mask index " + std::to_string(i));
    detail::require(labels[i] < z.cols(), Errc::LabelOutOfRange, "label " + std::to_string(labels[i]));
    const auto row = z.row(i);
    double m = row[0];
    for (double v : row) m = std::max(m, v);
    double denom = 0.0;
    for (double v : row) denom += std::exp(v - m);
    loss += m + std::log(denom) - row[labels[i]];
  }
  const double inv = 1.0 / static_cast<double>(mask.size());
  std::vector<std::size_t> mask_copy(mask.begin(), mask.end());
  std::vector<std::size_t> label_copy(labels.begin(), labels.end());
  const std::size_t iz = logits.id();
  return t.record("softmax_cross_entropy", Matrix(1, 1, loss * inv), {iz},
                  [&t, iz, inv, mask_copy = std::move(mask_copy), label_copy = std::move(label_copy)](
                      const Matrix& up, Tape::GradSink& sink) {
                    Matrix* gz = sink.target(iz);
                    if (!gz) return;
                    const Matrix& zz = t.value(iz);
                    const double s = up(0, 0) * inv;
                    for (std::size_t i : mask_copy) {
                      const auto row = zz.row(i);
                      double m = row[0];
                      for (double v : row) m = std::max(m, v);
                      double denom = 0.0;
                      for (double v : row) denom += std::exp(v - m);
                      auto gr = gz->row(i);
                      for (std::size_t c = 0; c < row.size(); ++c) {
                        const double p = std::exp(row[c] - m) / denom;
                        gr[c] += s * (p - (c == label_copy[i] ? 1.0 : 0.0));
                      }
                    }
                  });
}

}  // namespace fbgsp::ad
