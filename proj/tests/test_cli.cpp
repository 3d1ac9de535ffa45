#include "cli.hpp"

#include <danr/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace fs = std::filesystem;
using danr::cli::run;
using danr::io::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("danr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "danr_cli");
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string config(const std::string& name, const std::string& text) const {
    danr::io::write_file(dir_ / name, text);
    return path(name);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

const char* kSmallNet =
    "communities = 2\nnodes_per_community = 6\np_intra = 0.6\np_inter = 0.1\ndim = 3\n";

}  // namespace

TEST_F(Cli, GenThenSolve) {
  const auto gen_cfg = config("gen.cfg", kSmallNet);
  ASSERT_EQ(call({"gen", "--config", gen_cfg, "--seed", "2", "--out", path("net")}), 0) << err_.str();
  for (const char* f : {"graph.json", "test.json", "truth.json"}) EXPECT_TRUE(fs::exists(dir_ / "net" / f)) << f;

  const auto cfg = config("solve.cfg", "lambda = 0.5\nmu = 0.8\n");
  ASSERT_EQ(call({"solve", "--config", cfg, "--input", path("net/graph.json"), "--out", path("solved")}), 0)
      << err_.str();
  const auto report = json::parse(danr::io::read_file(dir_ / "solved" / "report.json"));
  EXPECT_EQ(report.at("models").size(), 12u);
  EXPECT_TRUE(report.at("converged").get<bool>());
  EXPECT_TRUE(fs::exists(dir_ / "solved" / "trace.csv"));
}

TEST_F(Cli, SolvePointsWithHeldOutMse) {
  std::string train = "id,x1,x2,f,target\n";
  std::string test = "id,x1,x2,f,target\n";
  for (int i = 0; i < 20; ++i) {
    const double x = 0.1 * i;
    train += "p" + std::to_string(i) + "," + std::to_string(x) + ",0," + std::to_string(1 + i % 3) + "," +
             std::to_string(2.0 * (1 + i % 3)) + "\n";
    if (i % 4 == 0) test += "q" + std::to_string(i) + "," + std::to_string(x + 0.01) + ",0,1,2\n";
  }
  danr::io::write_file(dir_ / "train.csv", train);
  danr::io::write_file(dir_ / "test.csv", test);
  const auto cfg = config("solve.cfg", "loss = ridge\nc_ridge = 0.01\nknn = 3\nlambda = 0.1\nmu = 0.9\n");
  ASSERT_EQ(call({"solve", "--config", cfg, "--points", path("train.csv"), "--test", path("test.csv"), "--out",
                  path("o")}),
            0)
      << err_.str();
  const auto report = json::parse(danr::io::read_file(dir_ / "o" / "report.json"));
  EXPECT_LT(report.at("test_mse").get<double>(), 0.05);
}

TEST_F(Cli, SweepAndPlot) {
  const auto cfg = config("sweep.cfg", std::string(kSmallNet) +
                                           "seeds = 1\nlambda_start = 0.1\nlambda_ratio = 10\nlambda_end = 10\n"
                                           "mu_start = 0.6\nmu_step = 0.3\nmu_end = 0.9\n");
  ASSERT_EQ(call({"sweep", "--config", cfg, "--out", path("sweep")}), 0) << err_.str();
  for (const char* f : {"results.csv", "summary.csv", "accuracy_vs_lambda.svg", "accuracy_vs_mu.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / f)) << f;
  }
  ASSERT_EQ(call({"plot", "--input", path("sweep/results.csv"), "--kind", "accuracy_vs_lambda", "--out",
                  path("plots")}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "plots" / "accuracy_vs_lambda.svg"));
  // a sweep has no temporal rows
  EXPECT_EQ(call({"plot", "--input", path("sweep/results.csv"), "--kind", "mse_vs_snapshot", "--out",
                  path("plots")}),
            1);
}

TEST_F(Cli, TemporalFromDirectories) {
  const auto gen_cfg = config("drift.cfg", "train_nodes = 20\ntest_nodes = 8\nsnapshots = 3\nchange_point = 2\n");
  ASSERT_EQ(call({"gen", "--kind", "drift", "--config", gen_cfg, "--out", path("drift")}), 0) << err_.str();
  const auto cfg = config("t.cfg", "variants = none, st_danr\nlambda1 = 0.2\nlambda2 = 0.5\n");
  ASSERT_EQ(call({"temporal", "--config", cfg, "--input", path("drift/train"), "--test", path("drift/test"), "--out",
                  path("t")}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "t" / "models" / "standardization.json"));
  EXPECT_TRUE(fs::exists(dir_ / "t" / "models" / "st_danr" / "snapshot_0002.json"));
  const auto metrics = danr::io::read_file(dir_ / "t" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "snapshot,mse_or_accuracy,temporal_variant");
}

TEST_F(Cli, Scale) {
  const auto cfg = config("s.cfg", "sizes = 50, 100\ndegree = 6\nlambda = 0.5\nmu = 0.8\n");
  ASSERT_EQ(call({"scale", "--config", cfg, "--out", path("s")}), 0) << err_.str();
  const auto csv = danr::io::read_file(dir_ / "s" / "scale.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(Cli, InvalidInputExitsWithOne) {
  EXPECT_EQ(call({"solve", "--input", path("missing.json"), "--out", path("o")}), 1);
  EXPECT_NE(err_.str().find("missing.json"), std::string::npos);
  const auto typo = config("typo.cfg", "lamda = 1\n");
  EXPECT_EQ(call({"gen", "--config", typo, "--out", path("o")}), 1);
  EXPECT_EQ(call({"frobnicate"}), 1);
  EXPECT_EQ(call({"gen", "--jobs", "0"}), 1);
  EXPECT_EQ(call({"solve", "--out", path("o")}), 1);
  EXPECT_EQ(call({"gen", "--mode", "lasso", "--out", path("o")}), 1);
}

TEST_F(Cli, StrictNonConvergenceExitsWithTwo) {
  const auto gen_cfg = config("gen.cfg", kSmallNet);
  ASSERT_EQ(call({"gen", "--config", gen_cfg, "--out", path("net")}), 0);
  const auto cfg = config("short.cfg", "lambda = 1\nmu = 0.7\nmax_outer_iters = 2\n");
  EXPECT_EQ(call({"solve", "--config", cfg, "--input", path("net/graph.json"), "--out", path("a")}), 0);
  EXPECT_EQ(call({"solve", "--strict", "--config", cfg, "--input", path("net/graph.json"), "--out", path("b")}), 2);
}

TEST_F(Cli, HelpExitsWithZero) {
  EXPECT_EQ(call({"--help"}), 0);
  EXPECT_NE(out_.str().find("sweep"), std::string::npos);
}
