// fbgsp: smoothness analysis, spectra, dataset generation and filterbank
// GNN training from the command line.
//
// stdout carries exactly one JSON document; tables and progress go to stderr.
// Exit codes: 0 ok, 1 usage, 2 input (load/write), 3 computation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbgsp/fbgsp.hpp"

namespace {

using namespace fbgsp;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

/// An error tagged with the exit code it maps to.
struct Failure {
  int code;
  std::string message;
};

struct InputOptions {
  std::string data;
  std::string format = "auto";
  std::string preset;
  bool csbm = false;
  CsbmParams params{};
  std::vector<std::string> overridden;
};

struct TrainOptions {
  std::size_t splits = 10;
  std::size_t hidden = 64;
  TrainConfig train{};
  std::string alpha_csv;
  std::string save_model;
  bool full_history = false;
};

std::optional<CsbmParams> preset_params(const std::string& name) {
  CsbmParams p;
  p.n = 500;
  p.classes = 2;
  p.feature_dim = 64;
  p.mu = 1.0;
  p.sigma = 1.0;
  if (name == "homophily") {
    p.p_in = 0.2;
    p.p_out = 0.02;
  } else if (name == "heterophily") {
    p.p_in = 0.02;
    p.p_out = 0.2;
  } else if (name == "cliques") {
    p.n = 60;
    p.p_in = 1.0;
    p.p_out = 0.0;
  } else if (name == "bipartite") {
    p.n = 60;
    p.p_in = 0.0;
    p.p_out = 1.0;
  } else {
    return std::nullopt;
  }
  return p;
}

/// Registers --data/--format and the synthetic generator flags on `cmd`.
void add_input_options(CLI::App* cmd, InputOptions& in, bool allow_data = true) {
  CLI::Option* data = nullptr;
  if (allow_data) {
    data = cmd->add_option("--data", in.data, "Dataset directory (generic bundle or WebKB layout)");
    cmd->add_option("--format", in.format, "auto, generic or webkb")
        ->check(CLI::IsMember({"auto", "generic", "webkb"}));
  }
  auto* preset = cmd->add_option("--preset", in.preset, "homophily, heterophily, cliques or bipartite")
                     ->check(CLI::IsMember({"homophily", "heterophily", "cliques", "bipartite"}));
  auto* csbm = cmd->add_flag("--csbm", in.csbm, "Generate a contextual SBM from the flags below");
  auto track = [&](CLI::Option* o, const char* name) {
    o->each([&in, name](const std::string&) { in.overridden.emplace_back(name); });
    if (data) o->excludes(data);
  };
  track(cmd->add_option("--n", in.params.n, "cSBM node count"), "n");
  track(cmd->add_option("--classes", in.params.classes, "cSBM class count"), "classes");
  track(cmd->add_option("--p-in", in.params.p_in, "cSBM intra-class edge probability"), "p_in");
  track(cmd->add_option("--p-out", in.params.p_out, "cSBM inter-class edge probability"), "p_out");
  track(cmd->add_option("--feature-dim", in.params.feature_dim, "cSBM feature dimension"), "feature_dim");
  track(cmd->add_option("--mu", in.params.mu, "cSBM class-mean strength"), "mu");
  track(cmd->add_option("--sigma", in.params.sigma, "cSBM feature noise"), "sigma");
  if (data) {
    preset->excludes(data);
    csbm->excludes(data);
  }
}

/// Applies the preset (if any), then the explicit cSBM flags on top of it.
CsbmParams resolve_csbm(const InputOptions& in, std::uint64_t seed) {
  CsbmParams p = in.params;
  if (!in.preset.empty()) {
    CsbmParams base = *preset_params(in.preset);
    for (const std::string& k : in.overridden) {
      if (k == "n") base.n = p.n;
      if (k == "classes") base.classes = p.classes;
      if (k == "p_in") base.p_in = p.p_in;
      if (k == "p_out") base.p_out = p.p_out;
      if (k == "feature_dim") base.feature_dim = p.feature_dim;
      if (k == "mu") base.mu = p.mu;
      if (k == "sigma") base.sigma = p.sigma;
    }
    p = base;
  }
  p.seed = seed;
  return p;
}

Dataset load_input(const InputOptions& in, std::uint64_t seed) {
  const bool synthetic = in.csbm || !in.preset.empty() || !in.overridden.empty();
  if (in.data.empty() && !synthetic)
    throw Failure{kExitUsage, "need an input: --data DIR, --preset NAME or --csbm"};
  try {
    if (!in.data.empty()) return load_dataset(in.data, parse_data_format(in.format));
    const CsbmParams p = resolve_csbm(in, seed);
    Dataset d = generate_csbm(p);
    d.name = in.preset.empty() ? "csbm" : "csbm-" + in.preset;
    return d;
  } catch (const Error& e) {
    throw Failure{e.code() == Errc::InvalidArgument && in.data.empty() ? kExitUsage : kExitInput, e.what()};
  }
}

Json dataset_summary(const Dataset& d) {
  const GraphDiagnostics diag = diagnose(d.graph);
  return Json{{"name", d.name},
              {"nodes", d.node_count()},
              {"edges", d.graph.edge_count()},
              {"features", d.feature_dim()},
              {"classes", d.num_classes},
              {"dropped_self_loops", d.dropped_self_loops},
              {"connected", diag.is_connected},
              {"bipartite", diag.is_bipartite},
              {"components", diag.component_count},
              {"isolated_nodes", diag.isolated_node_count}};
}

std::vector<OperatorKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<OperatorKind> kinds;
  for (const std::string& n : names) {
    try {
      kinds.push_back(parse_operator_kind(n));
    } catch (const Error& e) {
      throw Failure{kExitUsage, e.what()};
    }
  }
  return kinds;
}

void emit(const Json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2);
  std::cout << text << '\n';
  std::cout.flush();
  if (!out_path.empty()) {
    try {
      write_json_file(out_path, doc);
    } catch (const Error& e) {
      throw Failure{kExitInput, e.what()};
    }
  }
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::size_t thread_count() {
  const char* env = std::getenv("FBGSP_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  return (end != env && v > 0) ? static_cast<std::size_t>(v) : 1;
}

// ---- subcommands ----

int cmd_analyze(const InputOptions& in, std::uint64_t seed, const std::vector<std::string>& laps,
                const std::string& out) {
  const Dataset d = load_input(in, seed);
  auto kinds = parse_kinds(laps);
  // S-values need a Laplacian; an affinity name selects its complement.
  for (OperatorKind& k : kinds) {
    if (is_laplacian(k)) continue;
    const OperatorKind lap = *complement(k);
    std::cerr << "note: --lap " << flag_name(k) << " measured with its Laplacian " << flag_name(lap) << '\n';
    k = lap;
  }
  Json reports = Json::array();
  std::cerr << "dataset " << d.name << ": " << d.node_count() << " nodes, " << d.graph.edge_count() << " edges\n";
  std::cerr << "laplacian        feature_s  label_s    diff      h_node   h_edge\n";
  try {
    for (OperatorKind k : kinds) {
      const SmoothnessReport r = smoothness_report(d.graph, d.features, d.labels, d.num_classes, k);
      std::cerr << std::string(flag_name(k)) + std::string(17 - std::min<std::size_t>(16, flag_name(k).size()), ' ')
                << fixed(r.feature_s) << "     " << fixed(r.label_s) << "     " << fixed(r.diff) << "   "
                << fixed(r.node_homophily) << "   " << fixed(r.edge_homophily) << '\n';
      reports.push_back(report_fields(r));
    }
  } catch (const Error& e) {
    throw Failure{kExitCompute, e.what()};
  }
  Json doc = detail_json::header("analyze");
  doc["dataset"] = dataset_summary(d);
  doc["reports"] = std::move(reports);
  emit(doc, out);
  return 0;
}

std::vector<NamedModel> build_models(const std::vector<std::string>& names, const Dataset& d, std::size_t hidden) {
  std::vector<NamedModel> models;
  for (const std::string& n : names) {
    Architecture a;
    try {
      a = parse_architecture(n);
    } catch (const Error& e) {
      throw Failure{kExitUsage, e.what()};
    }
    const std::vector<std::size_t> dims{d.feature_dim(), hidden, d.num_classes};
    switch (a) {
      case Architecture::Gcn: models.push_back({n, gcn_config(dims[0], dims[1], dims[2])}); break;
      case Architecture::FbSpectral: models.push_back({n, fb_spectral_config(dims)}); break;
      case Architecture::FbSpatial: models.push_back({n, fb_spatial_config(dims)}); break;
    }
  }
  return models;
}

void print_suite_table(const TrialSuiteResult& s) {
  std::cerr << "model                       mean(std)          delta\n";
  for (const SuiteRow& r : s.rows) {
    std::string name = r.model;
    name.resize(std::max<std::size_t>(name.size(), 28), ' ');
    std::cerr << name << fixed(100 * r.mean, 2) << "(" << fixed(100 * r.std, 2) << ")";
    if (r.delta) std::cerr << "     (" << (*r.delta >= 0 ? "+" : "") << fixed(100 * *r.delta, 2) << ")";
    std::cerr << '\n';
  }
}

int run_suite_command(const std::string& type, std::uint64_t seed,
                      const std::vector<NamedModel>& models, const Dataset& d, const TrainOptions& t,
                      const std::string& out) {
  SuiteOptions opt;
  opt.n_splits = t.splits;
  opt.seed = seed;
  opt.train = t.train;
  opt.threads = thread_count();
  TrialSuiteResult suite;
  try {
    std::cerr << "training " << models.size() << " model(s) x " << t.splits << " split(s) on " << d.name << '\n';
    suite = run_trial_suite(models, d, opt);
  } catch (const Error& e) {
    throw Failure{kExitCompute, e.what()};
  }
  print_suite_table(suite);

  try {
    if (!t.alpha_csv.empty()) detail_io::write_file(t.alpha_csv, alpha_csv(suite));
    if (!t.save_model.empty()) {
      // Split 0 is retrained; training is deterministic so this reproduces the logged run.
      std::filesystem::create_directories(t.save_model);
      SplitSpec spec;
      spec.seed = split_seed_for(seed, 0);
      const Split split = stratified_split(d.labels, d.num_classes, spec);
      for (const NamedModel& m : models) {
        Model model(m.config, init_seed_for(seed, 0));
        train(model, d.graph, d.features, d.labels, split, t.train);
        save_checkpoint(std::filesystem::path(t.save_model) / (m.name + ".json"), model);
      }
    }
  } catch (const Error& e) {
    throw Failure{e.code() == Errc::IoError ? kExitInput : kExitCompute, e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    throw Failure{kExitInput, e.what()};
  }

  Json doc = detail_json::header(type);
  doc["dataset"] = dataset_summary(d);
  doc["seed"] = seed;
  doc["train"] = Json{{"learning_rate", t.train.learning_rate},
                      {"weight_decay", t.train.weight_decay},
                      {"max_epochs", t.train.max_epochs},
                      {"patience", t.train.patience},
                      {"eval_interval", t.train.eval_interval},
                      {"hidden", t.hidden},
                      {"splits", t.splits}};
  Json sj = to_json(suite, t.full_history);
  doc["rows"] = std::move(sj["rows"]);
  doc["runs"] = std::move(sj["runs"]);
  emit(doc, out);
  return 0;
}

int cmd_train(const InputOptions& in, std::uint64_t seed, const std::vector<std::string>& names,
              const TrainOptions& t, const std::string& out) {
  const Dataset d = load_input(in, seed);
  return run_suite_command("train", seed, build_models(names, d, t.hidden), d, t, out);
}

int cmd_ablate(const InputOptions& in, std::uint64_t seed, const TrainOptions& t, const std::string& out) {
  const Dataset d = load_input(in, seed);
  std::vector<NamedModel> models;
  for (AblationCell cell : kAblationGrid)
    models.push_back({cell_name(cell), fb_spectral_config({d.feature_dim(), t.hidden, d.num_classes}, cell)});
  return run_suite_command("ablate", seed, models, d, t, out);
}

int cmd_gen(const InputOptions& in, std::uint64_t seed, const std::string& out_dir) {
  InputOptions synth = in;
  synth.csbm = true;
  const CsbmParams p = resolve_csbm(synth, seed);
  Dataset d;
  try {
    d = generate_csbm(p);
  } catch (const Error& e) {
    throw Failure{kExitUsage, e.what()};
  }
  d.name = std::filesystem::path(out_dir).filename().string();
  try {
    write_csbm_bundle(p, d, out_dir);
  } catch (const Error& e) {
    throw Failure{kExitInput, e.what()};
  }
  Json doc = detail_json::header("gen");
  doc["out"] = out_dir;
  doc["params"] = to_json(p);
  doc["dataset"] = dataset_summary(d);
  if (d.graph.edge_count() > 0) doc["edge_homophily"] = edge_homophily(d.graph, d.labels);
  doc["expected_edge_homophily"] = csbm_expected_edge_homophily(p);
  std::cerr << "wrote " << d.node_count() << " nodes, " << d.graph.edge_count() << " edges to " << out_dir << '\n';
  emit(doc, "");
  return 0;
}

int cmd_eig(const InputOptions& in, std::uint64_t seed, const std::string& lap, bool fourier, bool per_feature,
            const std::string& out) {
  const Dataset d = load_input(in, seed);
  const OperatorKind kind = parse_kinds({lap}).front();
  Json doc = detail_json::header("spectrum");
  doc["dataset"] = dataset_summary(d);
  doc["operator"] = flag_name(kind);
  try {
    const JacobiOptions opt{};
    if (d.node_count() > opt.max_dim)
      throw Error(Errc::MatrixTooLarge,
                  "dimension " + std::to_string(d.node_count()) + " exceeds cap " + std::to_string(opt.max_dim));
    const OperatorKind basis_kind = symmetric_counterpart(kind);
    const EigenDecomposition eig = eigendecompose_symmetric(build_operator(d.graph, basis_kind).to_dense(), opt);
    doc["eigenvalues"] = eig.eigenvalues;
    std::cerr << "operator " << flag_name(kind) << ": " << eig.eigenvalues.size() << " eigenvalues in ["
              << fixed(eig.eigenvalues.front(), 6) << ", " << fixed(eig.eigenvalues.back(), 6) << "], "
              << eig.sweeps << " sweeps\n";
    if (fourier || per_feature) {
      // Coefficients in the orthonormal basis of the symmetric counterpart.
      const Matrix coeff = matmul_at(eig.eigenvectors, d.features);
      doc["fourier_basis"] = flag_name(basis_kind);
      std::vector<double> total(coeff.rows(), 0.0);
      for (std::size_t i = 0; i < coeff.rows(); ++i)
        for (double c : coeff.row(i)) total[i] += c * c;
      doc["fourier_energy"] = total;
      if (per_feature) {
        Json cols = Json::array();
        for (std::size_t k = 0; k < coeff.cols(); ++k) {
          std::vector<double> e(coeff.rows());
          for (std::size_t i = 0; i < coeff.rows(); ++i) e[i] = coeff(i, k) * coeff(i, k);
          cols.push_back(std::move(e));
        }
        doc["fourier_energy_per_feature"] = std::move(cols);
      }
    }
  } catch (const Error& e) {
    throw Failure{kExitCompute, e.what()};
  }
  emit(doc, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph smoothness analysis and filterbank GNN training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fbgsp 0.1.0");

  std::uint64_t seed = 0;
  std::string out;
  InputOptions in;
  TrainOptions t;
  std::vector<std::string> laps{"sym", "renorm-sym"};
  std::vector<std::string> model_names{"gcn", "fb-spectral"};
  std::string eig_lap = "sym";
  bool fourier = false;
  bool per_feature = false;
  std::string gen_out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed for generation, splits and initialization");
    cmd->add_option("--out", out, "Also write the JSON document to this file");
  };
  auto add_training = [&](CLI::App* cmd) {
    cmd->add_option("--splits", t.splits, "Number of random 60/20/20 splits")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden", t.hidden, "Hidden layer width")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", t.train.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--weight-decay", t.train.weight_decay, "Decoupled weight decay on weight matrices")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--epochs", t.train.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--patience", t.train.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--eval-interval", t.train.eval_interval, "Validate every k epochs")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha-csv", t.alpha_csv, "Write alpha trajectories as CSV");
    cmd->add_option("--save-model", t.save_model, "Directory for split-0 checkpoints, one per model");
    cmd->add_flag("--full-history", t.full_history, "Embed per-epoch histories in the JSON output");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "S-values and homophily per Laplacian kind");
  add_input_options(analyze, in);
  add_common(analyze);
  analyze->add_option("--lap", laps, "Comma-separated Laplacian kinds")->delimiter(',');

  CLI::App* train_cmd = app.add_subcommand("train", "Train models over random splits");
  add_input_options(train_cmd, in);
  add_common(train_cmd);
  add_training(train_cmd);
  train_cmd->add_option("--model", model_names, "Comma-separated: gcn, fb-spectral, fb-spatial")->delimiter(',');

  CLI::App* ablate = app.add_subcommand("ablate", "Channels x transform grid for the spectral filterbank");
  add_input_options(ablate, in);
  add_common(ablate);
  add_training(ablate);

  CLI::App* gen = app.add_subcommand("gen", "Write a contextual SBM dataset as a generic bundle");
  add_input_options(gen, in, false);
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  CLI::App* eig = app.add_subcommand("eig", "Operator spectrum and optional Fourier energy profile");
  add_input_options(eig, in);
  add_common(eig);
  eig->add_option("--lap", eig_lap, "Operator kind");
  eig->add_flag("--fourier", fourier, "Energy of the features summed per eigenvector");
  eig->add_flag("--per-feature", per_feature, "Energy profile of each feature column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*analyze) return cmd_analyze(in, seed, laps, out);
    if (*train_cmd) return cmd_train(in, seed, model_names, t, out);
    if (*ablate) return cmd_ablate(in, seed, t, out);
    if (*gen) return cmd_gen(in, seed, gen_out);
    if (*eig) return cmd_eig(in, seed, eig_lap, fourier, per_feature, out);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitUsage;
}
