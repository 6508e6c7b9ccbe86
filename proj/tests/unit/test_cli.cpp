#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "komatsu/examples.hpp"
#include "komatsu/serialize.hpp"

using namespace komatsu;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("komatsu_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--out", dir_.string()});
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  Json report(const std::string& name) { return Json::parse(read_file((dir_ / name).string())); }

  std::string file(const std::string& name) { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

}  // namespace

TEST_F(Cli, WeightsAxioms) {
  const Outcome r = run({"weights", "--gevrey", "1", "--check-axioms", "--kmax", "50"});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = report("weights.json");
  EXPECT_EQ(j.at("schema"), 1);
  EXPECT_EQ(j.at("metadata").at("schema"), 1);
  for (const auto& a : j.at("result").at("axioms").at("results")) EXPECT_TRUE(a.at("pass").get<bool>());
}

TEST_F(Cli, WeightsAssociated) {
  const Outcome r = run({"weights", "--gevrey", "2", "--associated", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.386294\n");
  EXPECT_TRUE(std::filesystem::exists(file("associated.csv")));
}

TEST_F(Cli, WeightsBadCustom) {
  std::filesystem::create_directories(dir_);
  write_file(file("bad.json"), "[1, 1, 0.1, 5, 100]");
  const Outcome r = run({"weights", "--custom", file("bad.json")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("LC        FAIL  first failure at k = 1"), std::string::npos) << r.out;
}

TEST_F(Cli, WeightsConfigErrors) {
  EXPECT_EQ(run({"weights"}).code, 2);
  EXPECT_EQ(run({"weights", "--gevrey", "0.5"}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
}

TEST_F(Cli, DiophConvergents) {
  const Outcome r = run({"dioph", "--alpha-factorial", "--convergents", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "p0/q0 = 10\np1/q1 = 1001/100\np2/q2 = 1001000010/100000001\n");
}

TEST_F(Cli, DiophScan) {
  const Outcome r = run({"dioph", "--scan", "--group", "t1xs3", "--cutoff", "500", "--q0", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("smallest nonzero |sigma| = 0.005"), std::string::npos) << r.out;
  const std::string csv = read_file(file("shells.csv"));
  EXPECT_EQ(csv.rfind("shell,min_denominator", 0), 0u);
}

TEST_F(Cli, DiophCertify) {
  const Outcome r = run({"dioph", "--certify", "--gevrey", "1", "--N", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(consistent)"), std::string::npos);
  const Json j = report("dioph.json");
  EXPECT_GT(j.at("result").at("condition2").at(0).at("C_N").get<double>(), 0.0);
}

TEST_F(Cli, ExampleAnalyzeWithPropertyExit) {
  const Outcome r = run({"--property", "GS-Roumieu", "example", "t1s3_La", "--analyze", "--gevrey", "1", "--cutoff", "1000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("GH: refuted\n"), std::string::npos);
  EXPECT_NE(r.out.find("GS-Gevrey: consistent\n"), std::string::npos);
  EXPECT_NE(r.out.find("GS-smooth: refuted\n"), std::string::npos);
  const Outcome gh = run({"--property", "GH-Roumieu:gevrey(s=1)", "example", "t1s3_La", "--analyze", "--gevrey", "1",
                      "--cutoff", "500"});
  EXPECT_EQ(gh.code, 1);
  const Outcome missing = run({"--property", "GH-Nothing", "example", "t1s3_La", "--analyze", "--cutoff", "200"});
  EXPECT_EQ(missing.code, 2);
}

TEST_F(Cli, SolveFromSpecFile) {
  std::filesystem::create_directories(dir_);
  write_file(file("la.json"), R"({"schema": 1, "name": "la", "groups": "t1xs3",
    "a": [{"coef": "alpha"}, {"coef": 1, "x1": "sin_t"}]})");
  const Outcome r = run({"solve", "--spec", file("la.json"), "--manufactured", "--lmax", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = report("solve_report.json");
  EXPECT_LT(j.at("result").at("report").at("residual").get<double>(), 1e-6);
  EXPECT_TRUE(std::filesystem::exists(file("solution.csv")));
  EXPECT_TRUE(std::filesystem::exists(file("decay.csv")));
}

TEST_F(Cli, SolveRhsFileRoundTrip) {
  std::filesystem::create_directories(dir_);
  const Spectrum u0 = random_spectrum(GroupKind::Torus, 2, GroupKind::SU2, 2, 3);
  write_file(file("f.csv"), spectrum_csv(manufactured_rhs(make_example("t1s3_La"), u0)));
  const Outcome r = run({"solve", "--example", "t1s3_La", "--rhs", file("f.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, SolveNotInJ) {
  const Outcome r = run({"solve", "--example", "t1s3_La", "--lmax", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NotInJ"), std::string::npos);
}

TEST_F(Cli, AnalyzeConfig) {
  std::filesystem::create_directories(dir_);
  write_file(file("job.json"), R"({"schema": 1, "example": "t1s3_Laq_half_i", "weights": [{"gevrey": 1}],
    "cutoffs": [100, 200, 400], "N_grid": [0.5, 1]})");
  const Outcome r = run({"--property", "GH-Roumieu", "analyze", "--config", file("job.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  write_file(file("bad.json"), R"({"schema": 1, "example": "t1s3_La", "unknown": 1})");
  EXPECT_EQ(run({"analyze", "--config", file("bad.json")}).code, 2);
}

TEST_F(Cli, ClassifySynthetic) {
  const Outcome r = run({"classify", "--synthetic", "1,2", "--lmax", "16"});
  EXPECT_EQ(r.code, 0);
  const Json j = report("classify.json");
  EXPECT_NEAR(j.at("result").at("report").at("fitted_rate").get<double>(), 1.0, 0.25);
}

TEST_F(Cli, DeterministicReports) {
  run({"dioph", "--scan", "--cutoff", "100"});
  const std::string a = read_file(file("dioph.json"));
  run({"dioph", "--scan", "--cutoff", "100"});
  EXPECT_EQ(a, read_file(file("dioph.json")));
}
