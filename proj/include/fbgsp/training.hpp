#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fbgsp/autodiff.hpp"
#include "fbgsp/dataset.hpp"
#include "fbgsp/error.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/models.hpp"
#include "fbgsp/random.hpp"

namespace fbgsp {

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;
};

/// Node indices of each part, ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  friend bool operator==(const Split&, const Split&) = default;
};

/// Per class: seeded shuffle, then floor(train*n) and floor(val*n) nodes for
/// the first two parts and the remainder for test.
inline Split stratified_split(std::span<const std::size_t> labels, std::size_t num_classes, const SplitSpec& spec) {
  const double total = spec.train + spec.val + spec.test;
  detail::require(spec.train >= 0 && spec.val >= 0 && spec.test >= 0 && std::abs(total - 1.0) <= 1e-9,
                  Errc::InvalidArgument, "split fractions must be non-negative and sum to 1");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at node " + std::to_string(i));
    members[labels[i]].push_back(i);
  }
  Rng rng(spec.seed);
  Split out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = members[c];
    if (m.empty()) throw Error(Errc::EmptyClass, "class " + std::to_string(c) + " has no nodes");
    rng.shuffle(std::span<std::size_t>(m));
    const double n = static_cast<double>(m.size());
    // The small slack keeps exact products such as 0.6 * 5 from flooring to 2.
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train * n + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val * n + 1e-9));
    out.train.insert(out.train.end(), m.begin(), m.begin() + n_train);
    out.val.insert(out.val.end(), m.begin() + n_train, m.begin() + n_train + n_val);
    out.test.insert(out.test.end(), m.begin() + n_train + n_val, m.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step = 0;
};

/// Bias-corrected Adam with decoupled weight decay on parameters marked `decay`.
inline void adam_step(std::span<Parameter> params, std::span<const Matrix> grads, AdamState& state,
                      const AdamConfig& cfg) {
  detail::require(params.size() == grads.size(), Errc::ShapeMismatch, "one gradient per parameter");
  if (state.first_moment.empty()) {
    for (const Parameter& p : params) {
      state.first_moment.emplace_back(p.value.rows(), p.value.cols());
      state.second_moment.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  detail::require(state.first_moment.size() == params.size(), Errc::ShapeMismatch, "optimizer state size");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k].value.values();
    const auto& g = grads[k].values();
    auto& m = state.first_moment[k].values();
    auto& v = state.second_moment[k].values();
    detail::require(g.size() == w.size() && m.size() == w.size(), Errc::ShapeMismatch,
                    "gradient shape for " + params[k].name);
    const double decay = params[k].decay ? cfg.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double step = (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
      w[i] -= cfg.learning_rate * (step + decay * w[i]);
    }
  }
}

/// Fraction of masked rows whose argmax (lowest index on ties) is the label.
inline double evaluate(const Matrix& logits, std::span<const std::size_t> labels, std::span<const std::size_t> mask) {
  if (mask.empty()) throw Error(Errc::EmptyMask, "accuracy over an empty node set");
  std::size_t correct = 0;
  for (std::size_t i : mask) {
    const auto row = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += best == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

inline double evaluate(const Model& model, const ModelContext& ctx, const Matrix& features,
                       std::span<const std::size_t> labels, std::span<const std::size_t> mask) {
  return evaluate(model.predict(ctx, features), labels, mask);
}

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::size_t max_epochs = 500;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  std::size_t eval_interval = 1;

  void validate() const {
    detail::require(learning_rate > 0 && weight_decay >= 0, Errc::InvalidArgument, "rates must be positive");
    detail::require(max_epochs >= 1 && patience >= 1 && eval_interval >= 1, Errc::InvalidArgument,
                    "epochs, patience and eval interval must be at least 1");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct AlphaRecord {
  std::size_t epoch = 0;
  std::size_t layer = 0;
  double alpha_lp = 0.0;
  double alpha_hp = 0.0;
  friend bool operator==(const AlphaRecord&, const AlphaRecord&) = default;
};

struct TrainResult {
  std::string model;
  std::vector<EpochRecord> history;
  std::vector<AlphaRecord> alphas;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double best_val_loss = 0.0;
  double test_accuracy = 0.0;
  /// Excluded from equality; every other field is deterministic.
  double wall_seconds = 0.0;

  std::size_t epochs_run() const noexcept { return history.size(); }

  friend bool operator==(const TrainResult& a, const TrainResult& b) {
    return a.model == b.model && a.history == b.history && a.alphas == b.alphas && a.best_epoch == b.best_epoch &&
           a.best_val_accuracy == b.best_val_accuracy && a.best_val_loss == b.best_val_loss &&
           a.test_accuracy == b.test_accuracy;
  }
};

/// Full-batch Adam on the train mask with early stopping on validation
/// accuracy (validation loss breaks ties). Each epoch's metrics and alphas are
/// those of the parameters before that epoch's update. On return `model`
/// holds the best-validation parameters and test accuracy is measured there.
inline TrainResult train(Model& model, const Graph& g, const Matrix& features, std::span<const std::size_t> labels,
                         const Split& split, const TrainConfig& cfg) {
  cfg.validate();
  detail::require(features.rows() == g.node_count() && labels.size() == g.node_count(),
                  Errc::InconsistentNodeCount, "features/labels do not match the graph");
  if (split.train.empty() || split.val.empty() || split.test.empty())
    throw Error(Errc::EmptyMask, "every split part must be non-empty");

  const auto start = std::chrono::steady_clock::now();
  const ModelContext ctx(g, model.config());
  const AdamConfig adam{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay};
  AdamState state;

  TrainResult result;
  result.model = model.config().name();
  std::vector<Parameter> best = model.parameters();
  bool have_best = false;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ad::Tape tape;
    const auto bound = model.bind(tape, true);
    const ad::Tensor x = tape.leaf(features);
    const ad::Tensor logits = model.forward(ctx, x, bound);
    const ad::Tensor loss = ad::softmax_cross_entropy(logits, labels, split.train);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss.value()(0, 0);
    rec.train_accuracy = evaluate(logits.value(), labels, split.train);
    const auto alphas = model.alphas();
    for (std::size_t l = 0; l < alphas.size(); ++l)
      result.alphas.push_back({epoch, l, alphas[l].first, alphas[l].second});

    if (epoch % cfg.eval_interval == 0 || epoch + 1 == cfg.max_epochs) {
      ad::Tape vt;
      const double vloss = ad::softmax_cross_entropy(vt.leaf(logits.value()), labels, split.val).value()(0, 0);
      const double vacc = evaluate(logits.value(), labels, split.val);
      rec.val_loss = vloss;
      rec.val_accuracy = vacc;
      if (!have_best || vacc > result.best_val_accuracy ||
          (vacc == result.best_val_accuracy && vloss < result.best_val_loss)) {
        have_best = true;
        result.best_epoch = epoch;
        result.best_val_accuracy = vacc;
        result.best_val_loss = vloss;
        best = model.parameters();
      }
    }
    result.history.push_back(rec);
    if (epoch - result.best_epoch >= cfg.patience) break;

    tape.backward(loss);
    std::vector<Matrix> grads;
    grads.reserve(bound.size());
    for (const ad::Tensor& p : bound) grads.push_back(tape.grad(p));
    adam_step(model.parameters(), grads, state, adam);
  }

  model.parameters() = std::move(best);
  result.test_accuracy = evaluate(model, ctx, features, labels, split.test);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

struct NamedModel {
  std::string name;
  ModelConfig config;
};

struct SuiteOptions {
  std::size_t n_splits = 10;
  std::uint64_t seed = 0;
  SplitSpec fractions{};
  TrainConfig train{};
  std::size_t threads = 1;
};

struct TrialRun {
  std::string model;
  std::size_t split_index = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
  TrainResult result;
  friend bool operator==(const TrialRun&, const TrialRun&) = default;
};

struct SuiteRow {
  std::string model;
  std::vector<double> test_accuracies;  // ordered by split index
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  /// mean - baseline mean; the first model is the baseline and has none.
  std::optional<double> delta;
  friend bool operator==(const SuiteRow&, const SuiteRow&) = default;
};

struct TrialSuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<TrialRun> runs;  // model-major, then split index
  friend bool operator==(const TrialSuiteResult&, const TrialSuiteResult&) = default;
};

/// Seeds for split i: the split shuffle and the weight init are both derived
/// from the base seed, so every model sees the same splits and init stream.
inline std::uint64_t split_seed_for(std::uint64_t base, std::size_t i) { return mix_seed(base + i); }
inline std::uint64_t init_seed_for(std::uint64_t base, std::size_t i) { return mix_seed(split_seed_for(base, i)); }

inline std::pair<double, double> mean_and_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

/// Trains every model on n_splits stratified splits. Runs may execute on
/// `threads` workers; results are assembled by (model, split) index so the
/// output does not depend on completion order.
inline TrialSuiteResult run_trial_suite(std::span<const NamedModel> models, const Dataset& data,
                                        const SuiteOptions& opt) {
  detail::require(opt.n_splits >= 1, Errc::InvalidArgument, "n_splits must be at least 1");
  detail::require(!models.empty(), Errc::InvalidArgument, "no models to run");
  data.validate();

  std::vector<Split> splits;
  for (std::size_t i = 0; i < opt.n_splits; ++i) {
    SplitSpec spec = opt.fractions;
    spec.seed = split_seed_for(opt.seed, i);
    splits.push_back(stratified_split(data.labels, data.num_classes, spec));
  }

  const std::size_t jobs = models.size() * opt.n_splits;
  std::vector<TrialRun> runs(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        const std::size_t m = j / opt.n_splits;
        const std::size_t s = j % opt.n_splits;
        TrialRun& run = runs[j];
        run.model = models[m].name;
        run.split_index = s;
        run.split_seed = split_seed_for(opt.seed, s);
        run.init_seed = init_seed_for(opt.seed, s);
        Model model(models[m].config, run.init_seed);
        TrainConfig tc = opt.train;
        tc.seed = run.init_seed;
        run.result = train(model, data.graph, data.features, data.labels, splits[s], tc);
        run.result.model = models[m].name;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(opt.threads, 1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  TrialSuiteResult out;
  out.runs = std::move(runs);
  for (std::size_t m = 0; m < models.size(); ++m) {
    SuiteRow row;
    row.model = models[m].name;
    for (std::size_t s = 0; s < opt.n_splits; ++s)
      row.test_accuracies.push_back(out.runs[m * opt.n_splits + s].result.test_accuracy);
    std::tie(row.mean, row.std) = mean_and_std(row.test_accuracies);
    if (m > 0) row.delta = row.mean - out.rows.front().mean;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace fbgsp
