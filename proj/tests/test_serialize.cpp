#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "fbgsp/serialize.hpp"
#include "oracle.hpp"
#include "tempdir.hpp"

using namespace fbgsp;

namespace {

TrainConfig short_run() {
  TrainConfig cfg;
  cfg.max_epochs = 25;
  cfg.patience = 10;
  cfg.eval_interval = 3;
  return cfg;
}

TrialSuiteResult small_suite() {
  const Dataset d = generate_csbm({60, 3, 0.2, 0.05, 5, 1.0, 1.0, 4});
  const std::vector<NamedModel> models{{"gcn", gcn_config(5, 4, 3)},
                                       {"fb-spectral", fb_spectral_config({5, 4, 3})}};
  SuiteOptions opt;
  opt.n_splits = 2;
  opt.seed = 8;
  opt.train = short_run();
  return run_trial_suite(models, d, opt);
}

}  // namespace

TEST(Serialize, SmoothnessReportRoundTrip) {
  testfs::TempDir dir;
  const Dataset d = generate_csbm({50, 2, 0.2, 0.05, 3, 1.0, 1.0, 1});
  for (OperatorKind k : {OperatorKind::SymNormLaplacian, OperatorKind::RenormRwLaplacian}) {
    const SmoothnessReport r = smoothness_report(d.graph, d.features, d.labels, 2, k);
    save_report(dir / "r.json", r);
    EXPECT_EQ(load_smoothness_report(dir / "r.json"), r);
  }
}

TEST(Serialize, TrainResultRoundTrip) {
  testfs::TempDir dir;
  const Dataset d = generate_csbm({60, 2, 0.2, 0.05, 4, 1.0, 1.0, 2});
  Model m(fb_spectral_config({4, 3, 2}), 5);
  const TrainResult r = train(m, d.graph, d.features, d.labels, stratified_split(d.labels, 2, {}), short_run());
  // Some epochs have no validation entry, exercising the null fields.
  ASSERT_FALSE(r.history.at(1).val_accuracy.has_value());
  save_report(dir / "t.json", r);
  const TrainResult back = load_train_result(dir / "t.json");
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.wall_seconds, 0.0);
}

TEST(Serialize, TrialSuiteRoundTrip) {
  testfs::TempDir dir;
  const TrialSuiteResult s = small_suite();
  save_report(dir / "s.json", s);
  EXPECT_EQ(load_trial_suite(dir / "s.json"), s);

  write_json_file(dir / "summary.json", to_json(s, false));
  EXPECT_THROW(load_trial_suite(dir / "summary.json"), Error);
}

TEST(Serialize, JsonIsStableAcrossRewrites) {
  const TrialSuiteResult s = small_suite();
  const std::string once = to_json(s).dump(2);
  EXPECT_EQ(to_json(trial_suite_from_json(parse_json(once))).dump(2), once);
}

TEST(Serialize, CheckpointRoundTripPreservesPredictions) {
  testfs::TempDir dir;
  const Graph g = oracle::random_connected_graph(12, 0.3, 1);
  const Matrix x = oracle::random_matrix(12, 5, 2);
  for (const ModelConfig& cfg :
       {gcn_config(5, 4, 3), fb_spectral_config({5, 4, 3}), fb_spatial_config({5, 4, 3}),
        fb_spectral_config({5, 4, 4, 3}, {1, Transform::Linear}), fb_spectral_config({5, 4, 3}, {2, Transform::Linear})}) {
    Model m(cfg, 9);
    // Perturb the mixing scalars so they are not all at their initial value.
    for (Parameter& p : m.parameters())
      if (!p.decay) p.value(0, 0) = 0.37;
    save_checkpoint(dir / "m.json", m);
    const Model back = load_checkpoint(dir / "m.json");
    EXPECT_EQ(back, m) << cfg.name();
    const ModelContext ctx(g, cfg);
    EXPECT_EQ(back.predict(ctx, x), m.predict(ctx, x)) << cfg.name();
  }
}

TEST(Serialize, CheckpointLayout) {
  const Json j = checkpoint_to_json(Model(fb_spectral_config({5, 4, 3}), 0));
  ASSERT_EQ(j.at("layers").size(), 2u);
  const Json& l0 = j["layers"][0];
  EXPECT_EQ(l0.at("W_L").at("rows"), 5);
  EXPECT_EQ(l0.at("W_H").at("cols"), 4);
  EXPECT_EQ(l0.at("a_L_raw"), 0.0);
  EXPECT_TRUE(checkpoint_to_json(Model(gcn_config(5, 4, 3), 0))["layers"][1].contains("W"));
}

TEST(Serialize, CsbmParamsRoundTrip) {
  const CsbmParams p{123, 4, 0.125, 0.3, 17, 2.5, 0.75, 99};
  EXPECT_EQ(csbm_params_from_json(parse_json(to_json(p).dump())), p);
}

TEST(Serialize, AlphaCsv) {
  TrialSuiteResult s;
  TrialRun run;
  run.model = "fb";
  run.split_index = 3;
  run.result.alphas = {{0, 0, 0.5, 0.5}, {1, 1, 0.25, 0.875}};
  s.runs.push_back(run);
  EXPECT_EQ(alpha_csv(s), "model,split,epoch,layer,alpha_L,alpha_H\nfb,3,0,0,0.5,0.5\nfb,3,1,1,0.25,0.875\n");
}

TEST(Serialize, Errors) {
  testfs::TempDir dir;
  const auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no exception";
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code([] { parse_json("{\"a\": "); }), Errc::ParseError);

  testfs::write(dir / "bad.json", "{not json");
  EXPECT_EQ(code([&] { load_smoothness_report(dir / "bad.json"); }), Errc::ParseError);

  const SmoothnessReport r{};
  Json j = to_json(r);
  j["schema_version"] = 2;
  EXPECT_EQ(code([&] { smoothness_report_from_json(j); }), Errc::ParseError);
  j = to_json(r);
  j["type"] = "train_result";
  EXPECT_EQ(code([&] { smoothness_report_from_json(j); }), Errc::ParseError);
  j = to_json(r);
  j.erase("label_s");
  EXPECT_EQ(code([&] { smoothness_report_from_json(j); }), Errc::ParseError);
  j = to_json(r);
  j["label_s"] = "high";
  EXPECT_EQ(code([&] { smoothness_report_from_json(j); }), Errc::ParseError);

  Json ck = checkpoint_to_json(Model(fb_spectral_config({5, 4, 3}), 0));
  ck["layers"].erase(1);
  EXPECT_EQ(code([&] { checkpoint_from_json(ck); }), Errc::ParseError);

  EXPECT_EQ(code([&] { load_train_result(dir / "missing.json"); }), Errc::IoError);
  testfs::write(dir / "file", "x");
  EXPECT_EQ(code([&] { save_report(dir / "file" / "r.json", r); }), Errc::IoError);
}
