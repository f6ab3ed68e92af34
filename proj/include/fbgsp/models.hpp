#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbgsp/autodiff.hpp"
#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/random.hpp"
#include "fbgsp/spectral.hpp"

namespace fbgsp {

enum class Architecture { Gcn, FbSpectral, FbSpatial };
enum class Transform { Linear, Nonlinear };
enum class Activation { Relu, Identity };

/// One cell of the channels x transform ablation grid.
struct AblationCell {
  std::size_t channels = 2;
  Transform transform = Transform::Nonlinear;
  friend bool operator==(const AblationCell&, const AblationCell&) = default;
};

inline constexpr AblationCell kAblationGrid[4] = {
    {1, Transform::Linear}, {1, Transform::Nonlinear}, {2, Transform::Linear}, {2, Transform::Nonlinear}};

inline std::string cell_name(AblationCell c) {
  return std::to_string(c.channels) + "ch-" + (c.transform == Transform::Linear ? "linear" : "nonlinear");
}

inline void validate_filter_pair(OperatorKind lp, OperatorKind hp) {
  if (is_laplacian(lp) || complement(lp) != hp)
    throw Error(Errc::InvalidArgument, std::string(flag_name(lp)) + " / " + std::string(flag_name(hp)) +
                                           " is not a low-pass / high-pass complementary pair");
}

/// Per-layer shape and filter pair.
struct LayerConfig {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  OperatorKind lp_kind = OperatorKind::RenormRwAffinity;
  OperatorKind hp_kind = OperatorKind::RenormRwLaplacian;
};

/// LP and HP propagation operators (with transposes) for one graph.
struct FilterBank {
  ad::PropagationOperator lp;
  ad::PropagationOperator hp;

  FilterBank(const Graph& g, OperatorKind lp_kind = OperatorKind::RenormRwAffinity,
             OperatorKind hp_kind = OperatorKind::RenormRwLaplacian)
      : lp(checked(g, lp_kind, hp_kind), lp_kind), hp(g, hp_kind) {}

 private:
  static const Graph& checked(const Graph& g, OperatorKind lp_kind, OperatorKind hp_kind) {
    validate_filter_pair(lp_kind, hp_kind);
    return g;
  }
};

/// Parameter tensors of one layer as bound on a tape. The alphas are the
/// mixing weights themselves (already passed through the sigmoid).
struct BoundLayer {
  ad::Tensor w_lp;
  std::optional<ad::Tensor> w_hp;
  std::optional<ad::Tensor> alpha_lp;
  std::optional<ad::Tensor> alpha_hp;
};

namespace detail_models {

inline ad::Tensor activate(const ad::Tensor& x, Activation f) {
  return f == Activation::Relu ? ad::relu(x) : x;
}

}  // namespace detail_models

/// Single-channel layer: L_LP f(H W) (nonlinear) or L_LP (H W) (linear).
inline ad::Tensor one_channel_forward(const ad::PropagationOperator& lp, const ad::Tensor& w,
                                      const ad::Tensor& h, Transform transform = Transform::Nonlinear,
                                      Activation f = Activation::Relu) {
  detail::require(h.cols() == w.rows(), Errc::ShapeMismatch,
                  "layer input " + shape_string(h.value()) + " vs weight " + shape_string(w.value()));
  ad::Tensor z = ad::matmul(h, w);
  if (transform == Transform::Nonlinear) z = detail_models::activate(z, f);
  return ad::sparse_apply(lp, z);
}

/// Two-channel spectral layer:
///   H_L = L_LP f(H W_L),  H_H = L_HP f(H W_H),  out = a_L H_L + a_H H_H.
/// With Transform::Linear the inner f is dropped.
inline ad::Tensor spectral_fb_forward(const FilterBank& bank, const BoundLayer& layer, const ad::Tensor& h,
                                      Transform transform = Transform::Nonlinear,
                                      Activation f = Activation::Relu) {
  detail::require(layer.w_hp && layer.alpha_lp && layer.alpha_hp, Errc::InvalidArgument,
                  "two-channel layer needs W_H and both mixing weights");
  const ad::Tensor low = one_channel_forward(bank.lp, layer.w_lp, h, transform, f);
  const ad::Tensor high = one_channel_forward(bank.hp, *layer.w_hp, h, transform, f);
  return ad::add(ad::scale(low, *layer.alpha_lp), ad::scale(high, *layer.alpha_hp));
}

/// Two-channel message-passing layer with fixed weights w_ij = 1/(D_ii+1).
/// Weights are F_l x F_{l-1}, applied per node as f(W h_i).
inline ad::Tensor spatial_fb_forward(const Graph& g, const BoundLayer& layer, const ad::Tensor& h,
                                     Activation f = Activation::Relu) {
  detail::require(layer.w_hp && layer.alpha_lp && layer.alpha_hp, Errc::InvalidArgument,
                  "two-channel layer needs W_H and both mixing weights");
  detail::require(h.cols() == layer.w_lp.cols() && h.cols() == layer.w_hp->cols(), Errc::ShapeMismatch,
                  "layer input " + shape_string(h.value()) + " vs weight " + shape_string(layer.w_lp.value()));
  const ad::Tensor hat_low = detail_models::activate(ad::matmul_bt(h, layer.w_lp), f);
  const ad::Tensor hat_high = detail_models::activate(ad::matmul_bt(h, *layer.w_hp), f);
  const ad::Tensor low = ad::neighborhood_combine(g, hat_low, ad::Channel::LowPass);
  const ad::Tensor high = ad::neighborhood_combine(g, hat_high, ad::Channel::HighPass);
  return ad::add(ad::scale(low, *layer.alpha_lp), ad::scale(high, *layer.alpha_hp));
}

/// Two-layer GCN: Â_rw ReLU(Â_rw X W0) W1. Softmax is left to the loss.
inline ad::Tensor gcn_forward(const ad::PropagationOperator& a_rw, const ad::Tensor& w0, const ad::Tensor& w1,
                              const ad::Tensor& x) {
  detail::require(x.cols() == w0.rows() && w0.cols() == w1.rows(), Errc::ShapeMismatch,
                  "gcn shapes " + shape_string(x.value()) + ", " + shape_string(w0.value()) + ", " +
                      shape_string(w1.value()));
  const ad::Tensor hidden = ad::relu(ad::sparse_apply(a_rw, ad::matmul(x, w0)));
  return ad::sparse_apply(a_rw, ad::matmul(hidden, w1));
}

/// Stack of spectral layers for one ablation cell. No activation is applied
/// between layers; the last layer's output is the logits.
inline ad::Tensor ablation_forward(const FilterBank& bank, std::span<const BoundLayer> layers, const ad::Tensor& x,
                                   AblationCell cell, Activation f = Activation::Relu) {
  detail::require(cell.channels == 1 || cell.channels == 2, Errc::InvalidArgument, "channels must be 1 or 2");
  ad::Tensor h = x;
  for (const BoundLayer& layer : layers) {
    h = cell.channels == 2 ? spectral_fb_forward(bank, layer, h, cell.transform, f)
                           : one_channel_forward(bank.lp, layer.w_lp, h, cell.transform, f);
  }
  return h;
}

struct ModelConfig {
  Architecture architecture = Architecture::FbSpectral;
  /// Only meaningful for FbSpectral.
  AblationCell cell{};
  /// {F, hidden..., C}. GCN requires exactly {F, hidden, C}.
  std::vector<std::size_t> dims;
  OperatorKind lp_kind = OperatorKind::RenormRwAffinity;
  OperatorKind hp_kind = OperatorKind::RenormRwLaplacian;

  std::size_t layer_count() const { return dims.empty() ? 0 : dims.size() - 1; }
  bool two_channel() const {
    return architecture == Architecture::FbSpatial ||
           (architecture == Architecture::FbSpectral && cell.channels == 2);
  }

  std::string name() const {
    switch (architecture) {
      case Architecture::Gcn: return "gcn";
      case Architecture::FbSpatial: return "fb-spatial";
      case Architecture::FbSpectral:
        return cell == AblationCell{} ? "fb-spectral" : "fb-spectral-" + cell_name(cell);
    }
    return "?";
  }

  void validate() const {
    detail::require(dims.size() >= 2, Errc::InvalidArgument, "model needs at least input and output dims");
    for (std::size_t d : dims) detail::require(d >= 1, Errc::InvalidArgument, "layer width must be positive");
    if (architecture == Architecture::Gcn)
      detail::require(dims.size() == 3, Errc::InvalidArgument, "GCN baseline has exactly two layers");
    detail::require(cell.channels == 1 || cell.channels == 2, Errc::InvalidArgument, "channels must be 1 or 2");
    validate_filter_pair(lp_kind, hp_kind);
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline ModelConfig gcn_config(std::size_t in, std::size_t hidden, std::size_t classes) {
  return {Architecture::Gcn, {}, {in, hidden, classes}};
}

inline ModelConfig fb_spectral_config(std::vector<std::size_t> dims, AblationCell cell = {}) {
  return {Architecture::FbSpectral, cell, std::move(dims)};
}

inline ModelConfig fb_spatial_config(std::vector<std::size_t> dims) {
  return {Architecture::FbSpatial, {}, std::move(dims)};
}

struct Parameter {
  std::string name;
  Matrix value;
  /// Weight decay applies to weight matrices only, never to mixing scalars.
  bool decay = true;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Graph-side inputs for a forward pass, built once per (graph, model config).
struct ModelContext {
  const Graph* graph;
  FilterBank filters;

  ModelContext(const Graph& g, const ModelConfig& cfg) : graph(&g), filters(g, cfg.lp_kind, cfg.hp_kind) {}
};

/// Parameters plus architecture. Forward passes bind parameters to a tape.
class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    layout();
    Rng rng(seed);
    for (Parameter& p : params_) {
      if (!p.decay) continue;  // mixing scalars start at 0, i.e. alpha = 0.5
      const double fan_in = static_cast<double>(config_.architecture == Architecture::FbSpatial ? p.value.cols() : p.value.rows());
      const double fan_out = static_cast<double>(config_.architecture == Architecture::FbSpatial ? p.value.rows() : p.value.cols());
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : p.value.values()) v = rng.uniform(-bound, bound);
    }
  }

  /// Rebuilds a model from stored parameters (checkpoint loading).
  Model(ModelConfig config, std::vector<Parameter> params) : config_(std::move(config)) {
    config_.validate();
    layout();
    detail::require(params.size() == params_.size(), Errc::ShapeMismatch, "parameter count does not match config");
    for (std::size_t i = 0; i < params.size(); ++i) {
      detail::require(params[i].name == params_[i].name && params[i].value.same_shape(params_[i].value),
                      Errc::ShapeMismatch, "parameter " + params[i].name + " does not match config");
      params_[i].value = std::move(params[i].value);
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Parameter& p : params_) n += p.value.size();
    return n;
  }

  /// (alpha_L, alpha_H) per layer; empty for one-channel models.
  std::vector<std::pair<double, double>> alphas() const {
    std::vector<std::pair<double, double>> out;
    if (!config_.two_channel()) return out;
    for (std::size_t l = 0; l < config_.layer_count(); ++l) {
      const double a = params_[4 * l + 2].value(0, 0);
      const double b = params_[4 * l + 3].value(0, 0);
      out.emplace_back(ad::detail_ad::logistic(a), ad::detail_ad::logistic(b));
    }
    return out;
  }

  /// Places every parameter on the tape as a leaf, in parameter order.
  std::vector<ad::Tensor> bind(ad::Tape& tape, bool requires_grad = true) const {
    std::vector<ad::Tensor> out;
    out.reserve(params_.size());
    for (const Parameter& p : params_) out.push_back(tape.leaf(p.value, requires_grad));
    return out;
  }

  ad::Tensor forward(const ModelContext& ctx, const ad::Tensor& x, std::span<const ad::Tensor> bound) const {
    detail::require(bound.size() == params_.size(), Errc::InvalidArgument, "bound parameter count mismatch");
    detail::require(x.cols() == config_.dims.front(), Errc::ShapeMismatch,
                    "input has " + std::to_string(x.cols()) + " features, model expects " +
                        std::to_string(config_.dims.front()));
    if (config_.architecture == Architecture::Gcn) return gcn_forward(ctx.filters.lp, bound[0], bound[1], x);

    const std::vector<BoundLayer> layers = bind_layers(bound);
    if (config_.architecture == Architecture::FbSpatial) {
      ad::Tensor h = x;
      for (const BoundLayer& layer : layers) h = spatial_fb_forward(*ctx.graph, layer, h);
      return h;
    }
    return ablation_forward(ctx.filters, layers, x, config_.cell);
  }

  /// Logits without recording gradients.
  Matrix predict(const ModelContext& ctx, const Matrix& features) const {
    ad::Tape tape;
    const auto bound = bind(tape, false);
    return forward(ctx, tape.leaf(features), bound).value();
  }

  std::vector<BoundLayer> bind_layers(std::span<const ad::Tensor> bound) const {
    std::vector<BoundLayer> layers;
    if (config_.architecture == Architecture::Gcn) return layers;
    if (!config_.two_channel()) {
      for (const ad::Tensor& w : bound) layers.push_back({w, std::nullopt, std::nullopt, std::nullopt});
      return layers;
    }
    for (std::size_t l = 0; l < config_.layer_count(); ++l) {
      const ad::Tensor& w_l = bound[4 * l];
      const ad::Tensor& w_h = bound[4 * l + 1];
      layers.push_back({w_l, w_h, ad::sigmoid(bound[4 * l + 2]), ad::sigmoid(bound[4 * l + 3])});
    }
    return layers;
  }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  void layout() {
    params_.clear();
    const auto& d = config_.dims;
    if (config_.architecture == Architecture::Gcn) {
      params_.push_back({"W0", Matrix(d[0], d[1]), true});
      params_.push_back({"W1", Matrix(d[1], d[2]), true});
      return;
    }
    const bool spatial = config_.architecture == Architecture::FbSpatial;
    for (std::size_t l = 0; l + 1 < d.size(); ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      const Matrix w = spatial ? Matrix(d[l + 1], d[l]) : Matrix(d[l], d[l + 1]);
      params_.push_back({prefix + "W_L", w, true});
      if (!config_.two_channel()) continue;
      params_.push_back({prefix + "W_H", w, true});
      params_.push_back({prefix + "a_L_raw", Matrix(1, 1), false});
      params_.push_back({prefix + "a_H_raw", Matrix(1, 1), false});
    }
  }

  ModelConfig config_;
  std::vector<Parameter> params_;
};

inline std::size_t parameter_count(const Model& m) { return m.parameter_count(); }

}  // namespace fbgsp
