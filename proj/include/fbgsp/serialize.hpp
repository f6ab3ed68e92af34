#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fbgsp/data_io.hpp"
#include "fbgsp/error.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/models.hpp"
#include "fbgsp/smoothness.hpp"
#include "fbgsp/spectral.hpp"
#include "fbgsp/training.hpp"

namespace fbgsp {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail_json {

inline Json header(std::string_view type) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = type;
  return j;
}

inline void check_header(const Json& j, std::string_view type) {
  if (!j.is_object()) throw Error(Errc::ParseError, "expected a JSON object");
  if (j.value("schema_version", -1) != kSchemaVersion)
    throw Error(Errc::ParseError, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  if (j.value("type", std::string{}) != type)
    throw Error(Errc::ParseError, "expected document type '" + std::string(type) + "'");
}

/// Wraps nlohmann's type and key errors as ParseError.
template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> read_optional(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail_json

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(Json(std::vector<double>(r.begin(), r.end())));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline Matrix matrix_from_json(const Json& j) {
  return detail_json::guarded([&] {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const Json& data = j.at("data");
    if (!data.is_array() || data.size() != rows) throw Error(Errc::ParseError, "matrix row count mismatch");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto r = data[i].get<std::vector<double>>();
      if (r.size() != cols) throw Error(Errc::ParseError, "matrix column count mismatch");
      for (std::size_t k = 0; k < cols; ++k) m(i, k) = r[k];
    }
    return m;
  });
}

// ---- smoothness ----

inline Json report_fields(const SmoothnessReport& r) {
  return Json{{"laplacian", flag_name(r.laplacian_kind)},
              {"feature_s", r.feature_s},
              {"label_s", r.label_s},
              {"diff", r.diff},
              {"node_homophily", r.node_homophily},
              {"edge_homophily", r.edge_homophily},
              {"component_count", r.component_count}};
}

inline SmoothnessReport report_from_fields(const Json& j) {
  return detail_json::guarded([&] {
    SmoothnessReport r;
    r.laplacian_kind = parse_operator_kind(j.at("laplacian").get<std::string>());
    r.feature_s = j.at("feature_s").get<double>();
    r.label_s = j.at("label_s").get<double>();
    r.diff = j.at("diff").get<double>();
    r.node_homophily = j.at("node_homophily").get<double>();
    r.edge_homophily = j.at("edge_homophily").get<double>();
    r.component_count = j.at("component_count").get<std::size_t>();
    return r;
  });
}

inline Json to_json(const SmoothnessReport& r) {
  Json j = detail_json::header("smoothness_report");
  j.update(report_fields(r));
  return j;
}

// ---- training ----

inline Json train_result_fields(const TrainResult& r) {
  Json history = Json::array();
  for (const EpochRecord& e : r.history)
    history.push_back(Json{{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"train_accuracy", e.train_accuracy},
                           {"val_loss", detail_json::optional_number(e.val_loss)},
                           {"val_accuracy", detail_json::optional_number(e.val_accuracy)}});
  Json alphas = Json::array();
  for (const AlphaRecord& a : r.alphas)
    alphas.push_back(Json{{"epoch", a.epoch}, {"layer", a.layer}, {"alpha_L", a.alpha_lp}, {"alpha_H", a.alpha_hp}});
  return Json{{"model", r.model},
              {"best_epoch", r.best_epoch},
              {"best_val_accuracy", r.best_val_accuracy},
              {"best_val_loss", r.best_val_loss},
              {"test_accuracy", r.test_accuracy},
              {"epochs_run", r.history.size()},
              {"history", std::move(history)},
              {"alphas", std::move(alphas)}};
}

inline TrainResult train_result_from_fields(const Json& j) {
  return detail_json::guarded([&] {
    TrainResult r;
    r.model = j.at("model").get<std::string>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_val_accuracy = j.at("best_val_accuracy").get<double>();
    r.best_val_loss = j.at("best_val_loss").get<double>();
    r.test_accuracy = j.at("test_accuracy").get<double>();
    for (const Json& e : j.at("history"))
      r.history.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                           e.at("train_accuracy").get<double>(), detail_json::read_optional(e.at("val_loss")),
                           detail_json::read_optional(e.at("val_accuracy"))});
    for (const Json& a : j.at("alphas"))
      r.alphas.push_back({a.at("epoch").get<std::size_t>(), a.at("layer").get<std::size_t>(),
                          a.at("alpha_L").get<double>(), a.at("alpha_H").get<double>()});
    return r;
  });
}

/// wall_seconds is deliberately not serialized so output is reproducible.
inline Json to_json(const TrainResult& r) {
  Json j = detail_json::header("train_result");
  j.update(train_result_fields(r));
  return j;
}

inline Json suite_row_fields(const SuiteRow& row) {
  return Json{{"model", row.model},
              {"mean", row.mean},
              {"std", row.std},
              {"delta", detail_json::optional_number(row.delta)},
              {"test_accuracies", row.test_accuracies}};
}

/// With include_runs the per-run histories are embedded; otherwise only
/// per-run summaries are written.
inline Json to_json(const TrialSuiteResult& s, bool include_runs = true) {
  Json j = detail_json::header("trial_suite");
  Json rows = Json::array();
  for (const SuiteRow& r : s.rows) rows.push_back(suite_row_fields(r));
  j["rows"] = std::move(rows);
  Json runs = Json::array();
  for (const TrialRun& run : s.runs) {
    Json rj{{"model", run.model},
            {"split_index", run.split_index},
            {"split_seed", run.split_seed},
            {"init_seed", run.init_seed}};
    if (include_runs) {
      rj["result"] = train_result_fields(run.result);
    } else {
      rj["best_epoch"] = run.result.best_epoch;
      rj["best_val_accuracy"] = run.result.best_val_accuracy;
      rj["test_accuracy"] = run.result.test_accuracy;
    }
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  return j;
}

// ---- models ----

inline std::string_view architecture_name(Architecture a) {
  switch (a) {
    case Architecture::Gcn: return "gcn";
    case Architecture::FbSpectral: return "fb-spectral";
    case Architecture::FbSpatial: return "fb-spatial";
  }
  return "?";
}

inline Architecture parse_architecture(std::string_view s) {
  if (s == "gcn") return Architecture::Gcn;
  if (s == "fb-spectral") return Architecture::FbSpectral;
  if (s == "fb-spatial") return Architecture::FbSpatial;
  throw Error(Errc::InvalidArgument, "unknown model '" + std::string(s) + "' (gcn, fb-spectral, fb-spatial)");
}

inline Json model_config_fields(const ModelConfig& c) {
  return Json{{"architecture", architecture_name(c.architecture)},
              {"channels", c.cell.channels},
              {"transform", c.cell.transform == Transform::Linear ? "linear" : "nonlinear"},
              {"dims", c.dims},
              {"lp", flag_name(c.lp_kind)},
              {"hp", flag_name(c.hp_kind)}};
}

inline ModelConfig model_config_from_fields(const Json& j) {
  return detail_json::guarded([&] {
    ModelConfig c;
    c.architecture = parse_architecture(j.at("architecture").get<std::string>());
    c.cell.channels = j.at("channels").get<std::size_t>();
    const auto t = j.at("transform").get<std::string>();
    if (t != "linear" && t != "nonlinear") throw Error(Errc::ParseError, "bad transform '" + t + "'");
    c.cell.transform = t == "linear" ? Transform::Linear : Transform::Nonlinear;
    c.dims = j.at("dims").get<std::vector<std::size_t>>();
    c.lp_kind = parse_operator_kind(j.at("lp").get<std::string>());
    c.hp_kind = parse_operator_kind(j.at("hp").get<std::string>());
    return c;
  });
}

namespace detail_json {

/// "layer3.W_L" -> (3, "W_L"); GCN's "W0"/"W1" -> (0|1, "W").
inline std::pair<std::size_t, std::string> split_param_name(const std::string& name) {
  if (name.rfind("layer", 0) == 0) {
    const auto dot = name.find('.');
    return {std::stoul(name.substr(5, dot - 5)), name.substr(dot + 1)};
  }
  return {std::stoul(name.substr(1)), "W"};
}

}  // namespace detail_json

/// Checkpoint: config header plus one object per layer holding that layer's
/// matrices (W_L, W_H; "W" for the GCN baseline) and raw mixing scalars.
inline Json checkpoint_to_json(const Model& m) {
  Json j = detail_json::header("checkpoint");
  j["config"] = model_config_fields(m.config());
  Json layers = Json::array();
  for (const Parameter& p : m.parameters()) {
    const auto [layer, key] = detail_json::split_param_name(p.name);
    if (layers.size() <= layer) layers.push_back(Json{{"index", layer}});
    if (p.value.size() == 1 && !p.decay)
      layers[layer][key] = p.value(0, 0);
    else
      layers[layer][key] = matrix_to_json(p.value);
  }
  j["layers"] = std::move(layers);
  return j;
}

inline Model checkpoint_from_json(const Json& j) {
  detail_json::check_header(j, "checkpoint");
  return detail_json::guarded([&] {
    ModelConfig cfg = model_config_from_fields(j.at("config"));
    // Use a freshly laid-out model for names, order and decay flags.
    std::vector<Parameter> params = Model(cfg, std::uint64_t{0}).parameters();
    const Json& layers = j.at("layers");
    for (Parameter& p : params) {
      const auto [layer, key] = detail_json::split_param_name(p.name);
      if (!layers.is_array() || layer >= layers.size() || layers[layer].at("index").get<std::size_t>() != layer)
        throw Error(Errc::ParseError, "checkpoint is missing layer " + std::to_string(layer));
      const Json& v = layers[layer].at(key);
      if (v.is_number())
        p.value = Matrix(1, 1, v.get<double>());
      else
        p.value = matrix_from_json(v);
    }
    return Model(std::move(cfg), std::move(params));
  });
}

// ---- data ----

inline Json to_json(const CsbmParams& p) {
  Json j = detail_json::header("csbm_params");
  j.update(Json{{"n", p.n},
                {"classes", p.classes},
                {"p_in", p.p_in},
                {"p_out", p.p_out},
                {"feature_dim", p.feature_dim},
                {"mu", p.mu},
                {"sigma", p.sigma},
                {"seed", p.seed}});
  return j;
}

inline CsbmParams csbm_params_from_json(const Json& j) {
  detail_json::check_header(j, "csbm_params");
  return detail_json::guarded([&] {
    CsbmParams p;
    p.n = j.at("n").get<std::size_t>();
    p.classes = j.at("classes").get<std::size_t>();
    p.p_in = j.at("p_in").get<double>();
    p.p_out = j.at("p_out").get<double>();
    p.feature_dim = j.at("feature_dim").get<std::size_t>();
    p.mu = j.at("mu").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
  });
}

// ---- typed loaders ----

inline SmoothnessReport smoothness_report_from_json(const Json& j) {
  detail_json::check_header(j, "smoothness_report");
  return report_from_fields(j);
}

inline TrainResult train_result_from_json(const Json& j) {
  detail_json::check_header(j, "train_result");
  return train_result_from_fields(j);
}

inline TrialSuiteResult trial_suite_from_json(const Json& j) {
  detail_json::check_header(j, "trial_suite");
  return detail_json::guarded([&] {
    TrialSuiteResult s;
    for (const Json& r : j.at("rows")) {
      SuiteRow row;
      row.model = r.at("model").get<std::string>();
      row.mean = r.at("mean").get<double>();
      row.std = r.at("std").get<double>();
      row.delta = detail_json::read_optional(r.at("delta"));
      row.test_accuracies = r.at("test_accuracies").get<std::vector<double>>();
      s.rows.push_back(std::move(row));
    }
    for (const Json& r : j.at("runs")) {
      TrialRun run;
      run.model = r.at("model").get<std::string>();
      run.split_index = r.at("split_index").get<std::size_t>();
      run.split_seed = r.at("split_seed").get<std::uint64_t>();
      run.init_seed = r.at("init_seed").get<std::uint64_t>();
      if (!r.contains("result")) throw Error(Errc::ParseError, "trial suite saved without run histories");
      run.result = train_result_from_fields(r.at("result"));
      s.runs.push_back(std::move(run));
    }
    return s;
  });
}

// ---- files ----

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed JSON: ") + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  detail_io::write_file(path, j.dump(2) + "\n");
}

template <class T>
void save_report(const std::filesystem::path& path, const T& value) {
  write_json_file(path, to_json(value));
}

inline SmoothnessReport load_smoothness_report(const std::filesystem::path& path) {
  return smoothness_report_from_json(read_json_file(path));
}

inline TrainResult load_train_result(const std::filesystem::path& path) {
  return train_result_from_json(read_json_file(path));
}

inline TrialSuiteResult load_trial_suite(const std::filesystem::path& path) {
  return trial_suite_from_json(read_json_file(path));
}

inline void save_checkpoint(const std::filesystem::path& path, const Model& m) {
  write_json_file(path, checkpoint_to_json(m));
}

inline Model load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

/// Writes params.json next to a generated bundle.
inline void write_csbm_bundle(const CsbmParams& p, const Dataset& d, const std::filesystem::path& dir) {
  write_generic_bundle(d, dir);
  write_json_file(dir / "params.json", to_json(p));
}

/// Alpha trajectories as CSV: model,split,epoch,layer,alpha_L,alpha_H.
inline std::string alpha_csv(const TrialSuiteResult& s) {
  std::string out = "model,split,epoch,layer,alpha_L,alpha_H\n";
  for (const TrialRun& run : s.runs)
    for (const AlphaRecord& a : run.result.alphas)
      out += run.model + "," + std::to_string(run.split_index) + "," + std::to_string(a.epoch) + "," +
             std::to_string(a.layer) + "," + detail_io::format_double(a.alpha_lp) + "," +
             detail_io::format_double(a.alpha_hp) + "\n";
  return out;
}

}  // namespace fbgsp
