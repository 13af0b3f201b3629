#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tnc/checkpoint.hpp"
#include "tnc/cli/cli.hpp"
#include "tnc/io/dataset_file.hpp"
#include "tnc/trainer.hpp"

namespace fs = std::filesystem;
using tnc::cli::kExitOk;
using tnc::cli::kExitUsage;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = tnc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tnc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string small_dataset() {
    const auto p = path("small.tncd");
    const auto r = run({"simulate", "--out", p, "--instances", "6", "--length", "400", "--seed", "3"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateShapeAndDeterminism) {
  const auto a = run({"simulate", "--out", path("a.tncd"), "--instances", "10", "--length", "300", "--seed", "7"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto data = tnc::io::load_dataset(path("a.tncd"));
  EXPECT_EQ(data.n_instances(), 10u);
  EXPECT_EQ(data.n_features(), 3u);
  EXPECT_EQ(data.length(), 300u);
  EXPECT_TRUE(data.has_labels());
  EXPECT_TRUE(fs::exists(path("a.tncd.config.json")));
  ASSERT_EQ(run({"simulate", "--out", path("b.tncd"), "--instances", "10", "--length", "300", "--seed", "7"}).code, kExitOk);
  EXPECT_EQ(slurp(path("a.tncd")), slurp(path("b.tncd")));
  ASSERT_EQ(run({"simulate", "--out", path("c.tncd"), "--instances", "10", "--length", "300", "--seed", "8"}).code, kExitOk);
  EXPECT_NE(slurp(path("a.tncd")), slurp(path("c.tncd")));
}

TEST_F(Cli, TrainWithZeroLearningRateKeepsInitialization) {
  const auto data = small_dataset();
  const auto r = run({"train", "--dataset", data, "--out-dir", path("run"), "--epochs", "1", "--delta", "20",
                      "--hidden-size", "8", "--encoding-size", "4", "--anchors", "2", "--samples", "3",
                      "--batch", "2", "--lr", "0", "--seed", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("epoch=1"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("run/history.csv")));
  EXPECT_TRUE(fs::exists(path("run/config.json")));
  const auto ck = tnc::model::load_checkpoint(path("run/checkpoint.tnc"));
  tnc::train::TrainConfig c;
  c.delta = 20;
  c.hidden_size = 8;
  c.encoding_size = 4;
  c.seed = 5;
  const auto init = tnc::model::initial_checkpoint(c.encoder_config(3), c.discriminator_config(), 5);
  EXPECT_EQ(ck.encoder, init.encoder);
  EXPECT_EQ(ck.discriminator, init.discriminator);
}

TEST_F(Cli, MissingDatasetIsUsageError) {
  const auto missing = path("nope.tncd");
  const auto r = run({"train", "--dataset", missing, "--out-dir", path("run")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("nope.tncd"), std::string::npos) << r.err;
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"train", "--epochs", "many"}).code, kExitUsage);
}

TEST_F(Cli, EvalReportsAndShapeMismatch) {
  const auto data = small_dataset();
  ASSERT_EQ(run({"train", "--dataset", data, "--out-dir", path("run"), "--epochs", "1", "--delta", "20",
                 "--hidden-size", "8", "--encoding-size", "4", "--anchors", "2", "--samples", "3", "--batch", "2"})
                .code,
            kExitOk);
  const auto ck = path("run/checkpoint.tnc");
  const auto cl = run({"eval", "--dataset", data, "--checkpoint", ck, "--mode", "cluster", "--out-dir", path("e1")});
  ASSERT_EQ(cl.code, kExitOk) << cl.err;
  const auto metrics = slurp(path("e1/metrics.txt"));
  for (const char* key : {"mode=cluster", "silhouette=", "davies_bouldin=", "raw_silhouette=", "k=4"})
    EXPECT_NE(metrics.find(key), std::string::npos) << key;
  EXPECT_TRUE(fs::exists(path("e1/report.txt")));

  const auto pr = run({"eval", "--dataset", data, "--checkpoint", ck, "--mode", "classify", "--out-dir", path("e2")});
  ASSERT_EQ(pr.code, kExitOk) << pr.err;
  EXPECT_NE(slurp(path("e2/metrics.txt")).find("auprc="), std::string::npos);

  const auto tr = run({"eval", "--dataset", data, "--checkpoint", ck, "--mode", "trajectory", "--out-dir", path("e3"),
                       "--instances", "0", "2"});
  ASSERT_EQ(tr.code, kExitOk) << tr.err;
  EXPECT_TRUE(fs::exists(path("e3/trajectory_2.csv")));
  EXPECT_FALSE(fs::exists(path("e3/trajectory_1.csv")));
  EXPECT_NE(slurp(path("e3/metrics.txt")).find("transition_rate="), std::string::npos);
  EXPECT_EQ(slurp(path("e3/trajectory_0.csv")).substr(0, 27), "t,z_1,z_2,z_3,z_4,state_lab");

  const auto wrong = path("wide.tncd");
  ASSERT_EQ(run({"convert", "--from-csv", path("x.csv"), "--out", wrong}).code, kExitUsage);
  std::ofstream(path("x.csv")) << "a,b\n1,2\n3,4\n";
  const auto mismatch = run({"eval", "--from-csv", path("x.csv"), "--checkpoint", ck, "--mode", "cluster",
                             "--out-dir", path("e4")});
  EXPECT_EQ(mismatch.code, kExitUsage);
  EXPECT_NE(mismatch.err.find("3"), std::string::npos) << mismatch.err;
  EXPECT_NE(mismatch.err.find("2"), std::string::npos) << mismatch.err;
}

TEST_F(Cli, AdfOnCsvColumns) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::ofstream f(path("series.csv"));
  f << "noise,walk\n";
  double walk = 0;
  for (int i = 0; i < 500; ++i) {
    walk += g(rng);
    f << g(rng) << ',' << walk << '\n';
  }
  f.close();
  auto p_value = [](const std::string& out) {
    const auto pos = out.find("p_value=");
    return pos == std::string::npos ? std::nan("") : std::stod(out.substr(pos + 8));
  };
  const auto noise = run({"adf", "--csv", path("series.csv"), "--column", "noise"});
  ASSERT_EQ(noise.code, kExitOk) << noise.err;
  EXPECT_LT(p_value(noise.out), 0.05);
  const auto rw = run({"adf", "--csv", path("series.csv"), "--column", "1"});
  ASSERT_EQ(rw.code, kExitOk) << rw.err;
  EXPECT_GT(p_value(rw.out), 0.05);
  EXPECT_NE(rw.out.find("statistic="), std::string::npos);
  const auto bad = run({"adf", "--csv", path("series.csv"), "--column", "missing"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("noise"), std::string::npos) << bad.err;
}
