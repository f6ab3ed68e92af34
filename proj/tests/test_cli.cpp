#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "fbgsp/serialize.hpp"
#include "tempdir.hpp"

#ifndef FBGSP_CLI_PATH
#error "FBGSP_CLI_PATH must name the CLI binary"
#endif

using namespace fbgsp;

namespace {

cli::Result run(const std::string& args) { return cli::run(FBGSP_CLI_PATH, args); }

Json run_json(const std::string& args) {
  const cli::Result r = run(args);
  EXPECT_EQ(r.exit_code, 0) << args;
  return parse_json(r.out);
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

void write_p3(const std::filesystem::path& dir, const std::string& features, const std::string& labels) {
  testfs::write(dir / "edges.tsv", "0\t1\n1\t2\n");
  testfs::write(dir / "features.csv", features);
  testfs::write(dir / "labels.txt", labels);
}

const std::string kSmallTrain = " --n 60 --feature-dim 6 --splits 2 --epochs 20 --patience 10 --hidden 4";

}  // namespace

TEST(Cli, EverySubcommandIsDeterministic) {
  testfs::TempDir dir;
  const std::vector<std::string> commands{
      "analyze --preset heterophily --seed 3 --lap sym,renorm-sym,comb",
      "train --preset heterophily --csbm --seed 3 --model gcn,fb-spectral,fb-spatial" + kSmallTrain,
      "ablate --preset homophily --csbm --seed 3" + kSmallTrain,
      "eig --preset cliques --seed 3 --lap sym --fourier",
  };
  for (const std::string& c : commands) {
    const cli::Result a = run(c);
    const cli::Result b = run(c);
    EXPECT_EQ(a.exit_code, 0) << c;
    EXPECT_FALSE(a.out.empty()) << c;
    EXPECT_EQ(a.out, b.out) << c;
    EXPECT_NO_THROW(parse_json(a.out)) << c;
  }
  const cli::Result g1 = run("gen --preset homophily --n 50 --seed 4 --out " + q(dir / "g1"));
  const cli::Result g2 = run("gen --preset homophily --n 50 --seed 4 --out " + q(dir / "g2"));
  EXPECT_EQ(g1.exit_code, 0);
  for (const char* f : {"edges.tsv", "features.csv", "labels.txt", "params.json"})
    EXPECT_EQ(testfs::read(dir / "g1" / f), testfs::read(dir / "g2" / f)) << f;
}

TEST(Cli, GenThenLoadMatchesGenerator) {
  testfs::TempDir dir;
  const Json j = run_json("gen --csbm --n 70 --classes 3 --p-in 0.3 --p-out 0.05 --feature-dim 5 --mu 2 --sigma 0.5 "
                          "--seed 12 --out " + q(dir / "b"));
  const CsbmParams p{70, 3, 0.3, 0.05, 5, 2.0, 0.5, 12};
  EXPECT_EQ(csbm_params_from_json(read_json_file(dir / "b" / "params.json")), p);
  Dataset expect = generate_csbm(p);
  const Dataset got = load_dataset(dir / "b");
  expect.name = got.name;
  EXPECT_EQ(got, expect);
  EXPECT_DOUBLE_EQ(j.at("edge_homophily").get<double>(), edge_homophily(expect.graph, expect.labels));
}

TEST(Cli, AnalyzeP3ConstantSignalsAreZero) {
  testfs::TempDir dir;
  write_p3(dir.path(), "2\n2\n2\n", "0\n0\n0\n");
  const Json j = run_json("analyze --data " + q(dir.path()) + " --lap comb");
  ASSERT_EQ(j.at("reports").size(), 1u);
  const SmoothnessReport r = smoothness_report_from_json(
      [&] { Json d = j["reports"][0]; d["schema_version"] = kSchemaVersion; d["type"] = "smoothness_report"; return d; }());
  EXPECT_EQ(r.feature_s, 0.0);
  EXPECT_EQ(r.label_s, 0.0);
  EXPECT_EQ(r.edge_homophily, 1.0);
}

TEST(Cli, AnalyzePresets) {
  EXPECT_EQ(run_json("analyze --preset cliques --lap sym")["reports"][0]["edge_homophily"], 1.0);
  EXPECT_EQ(run_json("analyze --preset bipartite --lap sym")["reports"][0]["edge_homophily"], 0.0);
  const Json h = run_json("analyze --preset homophily --lap sym,renorm-sym");
  ASSERT_EQ(h["reports"].size(), 2u);
  EXPECT_LT(h["reports"][0]["label_s"].get<double>(), h["reports"][0]["feature_s"].get<double>());
  // Affinity names select the complementary Laplacian.
  EXPECT_EQ(h["reports"][1]["laplacian"], "renorm-lap-sym");
}

TEST(Cli, AnalyzeWritesOutFile) {
  testfs::TempDir dir;
  const cli::Result r = run("analyze --preset cliques --lap sym --out " + q(dir / "a.json"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(parse_json(testfs::read(dir / "a.json")), parse_json(r.out));
}

TEST(Cli, EigSpectra) {
  testfs::TempDir dir;
  write_p3(dir.path(), "1\n0\n-1\n", "0\n1\n0\n");
  const auto ev = run_json("eig --data " + q(dir.path()) + " --lap comb")["eigenvalues"].get<std::vector<double>>();
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], 0.0, 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], 3.0, 1e-12);

  testfs::write(dir / "edges.tsv", "0\t1\n1\t2\n0\t2\n");
  const auto k3 = run_json("eig --data " + q(dir.path()) + " --lap sym")["eigenvalues"].get<std::vector<double>>();
  ASSERT_EQ(k3.size(), 3u);
  EXPECT_NEAR(k3[0], 0.0, 1e-12);
  EXPECT_NEAR(k3[1], 1.5, 1e-12);
  EXPECT_NEAR(k3[2], 1.5, 1e-12);

  const Json f = run_json("eig --preset homophily --lap sym --fourier");
  const auto big = f["eigenvalues"].get<std::vector<double>>();
  EXPECT_TRUE(std::is_sorted(big.begin(), big.end()));
  EXPECT_LT(big.back(), 2.0);
  EXPECT_EQ(f["fourier_energy"].size(), big.size());
}

TEST(Cli, TrainAndAblateShapes) {
  testfs::TempDir dir;
  const std::string base = "--preset heterophily --csbm --seed 1" + kSmallTrain;
  const Json t = run_json("train " + base + " --model gcn,fb-spectral --alpha-csv " + q(dir / "a.csv") +
                          " --save-model " + q(dir / "models"));
  ASSERT_EQ(t["rows"].size(), 2u);
  EXPECT_TRUE(t["rows"][0]["delta"].is_null());
  EXPECT_NEAR(t["rows"][1]["delta"].get<double>(),
              t["rows"][1]["mean"].get<double>() - t["rows"][0]["mean"].get<double>(), 1e-15);
  EXPECT_EQ(testfs::read(dir / "a.csv").rfind("model,split,epoch,layer,alpha_L,alpha_H\n", 0), 0u);
  EXPECT_NO_THROW(load_checkpoint(dir / "models" / "fb-spectral.json"));
  EXPECT_NO_THROW(load_checkpoint(dir / "models" / "gcn.json"));

  const Json a = run_json("ablate " + base);
  ASSERT_EQ(a["rows"].size(), 4u);
  const std::vector<std::string> names{"1ch-linear", "1ch-nonlinear", "2ch-linear", "2ch-nonlinear"};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a["rows"][i]["model"], names[i]);
  // The full cell is the same code path as the plain spectral model.
  EXPECT_EQ(a["rows"][3]["test_accuracies"], t["rows"][1]["test_accuracies"]);
}

TEST(Cli, ExitCodes) {
  testfs::TempDir dir;
  EXPECT_EQ(run("").exit_code, 1);
  EXPECT_EQ(run("bogus").exit_code, 1);
  EXPECT_EQ(run("analyze --preset cliques --no-such-flag").exit_code, 1);
  EXPECT_EQ(run("analyze --preset cliques --lap nope").exit_code, 1);
  EXPECT_EQ(run("analyze --data " + q(dir.path()) + " --preset cliques").exit_code, 1);
  EXPECT_EQ(run("gen --preset cliques").exit_code, 1);

  EXPECT_EQ(run("analyze --data " + q(dir / "missing")).exit_code, 2);
  write_p3(dir / "bad", "1\n2\n", "0\n0\n0\n");
  EXPECT_EQ(run("train --data " + q(dir / "bad")).exit_code, 2);
  testfs::write(dir / "file", "x");
  EXPECT_EQ(run("gen --preset cliques --out " + q(dir / "file" / "sub")).exit_code, 2);

  // Edgeless graph: the normalized Laplacian is undefined at isolated nodes.
  EXPECT_EQ(run("analyze --csbm --n 10 --p-in 0 --p-out 0 --lap sym").exit_code, 3);
  EXPECT_EQ(run("eig --csbm --n 2100 --p-in 0 --p-out 0.001 --feature-dim 1 --lap comb").exit_code, 3);
}
