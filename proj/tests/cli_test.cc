#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "sagerel/cli/commands.h"
#include "sagerel/cli/problem_file.h"
#include "sagerel/sage.h"

namespace sagerel::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string DataPath(const std::string& name) {
  const char* dir = std::getenv("SAGEREL_DATA");
  return std::string(dir ? dir : "tests/data") + "/" + name;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sagerel");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sagerel_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Temp(const std::string& name) const { return (dir_ / name).string(); }

  std::string WriteProblem(const std::string& name, const std::string& text) const {
    const std::string path = Temp(name);
    std::ofstream(path) << text;
    return path;
  }

  fs::path dir_;
};

const std::vector<std::string> kProblems = {"tight_six_term.json",      "gap_six_term.json", "convex_constraint.json",
                                            "nonconvex_constraint.json",      "perturbed_exponents.json", "tight_six_term_box.json",
                                            "weighted_mean.json",      "squared_form.json", "posynomial.json"};

TEST(ProblemFileTest, RoundTrip) {
  for (const auto& name : kProblems) {
    const ProblemFile p = ReadProblemFile(DataPath(name));
    const std::string text = SerializeProblem(p);
    const ProblemFile again = ParseProblem(text);
    EXPECT_TRUE(again == p) << name;
    EXPECT_EQ(SerializeProblem(again), text) << name;
  }
}

TEST(ProblemFileTest, FieldsAndBox) {
  const ProblemFile p = ReadProblemFile(DataPath("tight_six_term_box.json"));
  EXPECT_EQ(p.n, 3);
  EXPECT_EQ(p.objective.num_terms(), 7);
  ASSERT_TRUE(p.box.has_value());
  EXPECT_DOUBLE_EQ(p.box->upper, std::exp(3.0));
  EXPECT_EQ(p.Program().constraints.size(), 14u);
  EXPECT_EQ(ReadProblemFile(DataPath("convex_constraint.json")).constraints.size(), 1u);
}

TEST(ProblemFileTest, RejectsMalformedDocuments) {
  const std::vector<std::string> bad = {
      "not json",
      "[]",
      R"({"objective": {"terms": [{"c": 1, "alpha": [0]}]}})",
      R"({"n": 0, "objective": {"terms": [{"c": 1, "alpha": []}]}})",
      R"({"n": 1, "objective": {"terms": []}})",
      R"({"n": 1, "objective": {"terms": [{"c": "x", "alpha": [0]}]}})",
      R"({"n": 1, "objective": {"terms": [{"alpha": [0]}]}})",
      R"({"n": 2, "objective": {"terms": [{"c": 1, "alpha": [1]}]}})",
      R"({"n": 1, "objective": {"terms": [{"c": 1, "alpha": [0]}]}, "constraints": {}})",
      R"({"n": 1, "objective": {"terms": [{"c": 1, "alpha": [0]}]}, "box": {"U": 1, "L": 2}})",
      R"({"n": 1, "objective": {"terms": [{"c": 1, "alpha": [0]}]}, "box": {"U": 1, "L": 0}})",
  };
  for (const auto& text : bad) EXPECT_THROW(ParseProblem(text), ParseError) << text;
  EXPECT_THROW(ReadProblemFile("/nonexistent/problem.json"), ParseError);
}

TEST_F(CliTest, CertifyVerdictsAndExitCodes) {
  const CliRun notsage = Invoke({"certify", DataPath("squared_form.json")});
  EXPECT_EQ(notsage.code, kExitNegative);
  EXPECT_NE(notsage.out.find("NOT-SAGE"), std::string::npos);

  const CliRun posy = Invoke({"certify", DataPath("posynomial.json")});
  EXPECT_EQ(posy.code, kExitOk);
  EXPECT_NE(posy.out.find("verdict: SAGE"), std::string::npos);

  const CliRun malformed = Invoke({"certify", DataPath("malformed.json")});
  EXPECT_EQ(malformed.code, kExitParse);
  EXPECT_FALSE(malformed.err.empty());

  EXPECT_EQ(Invoke({"certify", DataPath("convex_constraint.json")}).code, kExitParse);
}

TEST_F(CliTest, CertifyReportsWeights) {
  const CliRun r = Invoke({"--json", "certify", DataPath("weighted_mean.json")});
  ASSERT_EQ(r.code, kExitOk);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc.at("verdict"), "SAGE");
  EXPECT_GT(doc.at("margin").get<double>(), 0.0);
  const json& nus = doc.at("certificate").at("nus");
  const std::vector<double> nu = nus.at(2).get<std::vector<double>>();
  EXPECT_NEAR(nu[0] / -nu[2], 0.6, 1e-6);
  EXPECT_NEAR(nu[1] / -nu[2], 0.4, 1e-6);

  const CliRun text = Invoke({"certify", DataPath("weighted_mean.json")});
  EXPECT_NE(text.out.find("nu=(0.6"), std::string::npos) << text.out;
}

TEST_F(CliTest, EmittedCertificateVerifies) {
  const std::string cert_path = Temp("cert.json");
  ASSERT_EQ(Invoke({"--quiet", "--emit", cert_path, "certify", DataPath("weighted_mean.json")}).code,
            kExitOk);
  const json doc = json::parse(ReadText(cert_path));
  SageCertificate cert;
  const auto rows = doc.at("exponents").get<std::vector<std::vector<double>>>();
  cert.exponents.resize(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t k = 0; k < rows[i].size(); ++k) cert.exponents(i, k) = rows[i][k];
  for (const auto& part : doc.at("parts")) {
    const auto v = part.get<std::vector<double>>();
    cert.parts.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  }
  for (const auto& nu : doc.at("nus")) {
    const auto v = nu.get<std::vector<double>>();
    cert.nus.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  }
  EXPECT_TRUE(VerifyCertificate(cert, ReadProblemFile(DataPath("weighted_mean.json")).objective, 1e-7));
}

TEST_F(CliTest, MinimizeExamples) {
  const CliRun tight = Invoke({"--json", "minimize", DataPath("tight_six_term.json"), "--p", "0"});
  ASSERT_EQ(tight.code, kExitOk);
  const json dt = json::parse(tight.out);
  EXPECT_NEAR(dt.at("lower_bound").get<double>(), -0.9747, 1e-3);
  EXPECT_EQ(dt.at("verdict"), "Tight");

  const CliRun convex = Invoke({"--json", "minimize", DataPath("convex_constraint.json")});
  ASSERT_EQ(convex.code, kExitOk);
  const json dc = json::parse(convex.out);
  EXPECT_EQ(dc.at("q"), 1);
  EXPECT_NEAR(dc.at("lower_bound").get<double>(), -0.6147, 1e-3);

  const CliRun gap = Invoke({"minimize", DataPath("gap_six_term.json")});
  EXPECT_EQ(gap.code, kExitOk);
  EXPECT_NE(gap.out.find("verdict: Gap"), std::string::npos);

  const CliRun emit = Invoke({"--quiet", "--emit", Temp("m.json"), "minimize", DataPath("nonconvex_constraint.json")});
  EXPECT_EQ(emit.code, kExitOk);
  EXPECT_TRUE(emit.out.empty());
  const json cert = json::parse(ReadText(Temp("m.json")));
  EXPECT_EQ(cert.at("multipliers").size(), 2u);
}

TEST_F(CliTest, MinimizeErrors) {
  EXPECT_EQ(Invoke({"minimize", DataPath("convex_constraint.json"), "--q", "0"}).code, kExitParse);
  EXPECT_EQ(Invoke({"minimize", DataPath("malformed.json")}).code, kExitParse);
  const std::string unbounded = WriteProblem(
      "unbounded.json",
      R"({"n": 1, "objective": {"terms": [{"c": 1, "alpha": [0]}, {"c": -1, "alpha": [2]}]}})");
  const CliRun r = Invoke({"minimize", unbounded});
  EXPECT_EQ(r.code, kExitNegative);
  EXPECT_NE(r.out.find("MinusInfinity"), std::string::npos);
}

TEST_F(CliTest, ArgumentErrors) {
  EXPECT_EQ(Invoke({}).code, kExitParse);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitParse);
  EXPECT_EQ(Invoke({"minimize"}).code, kExitParse);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, RegionCsvFormatAndVerdicts) {
  const std::string out = Temp("region.csv");
  const CliRun r = Invoke({"--quiet", "region", "--amin", "1", "--amax", "1.7", "--bmin", "0",
                        "--bmax", "0.5", "--step", "0.5", "--out", out});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_FALSE(fs::exists(out + ".tmp"));
  std::istringstream csv(ReadText(out));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "a,b,verdict,margin");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(csv, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    ASSERT_EQ(fields.size(), 4u) << line;
    rows.push_back(fields);
  }
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "1");
  EXPECT_EQ(rows[1][1], "0.5");
  EXPECT_EQ(rows[1][2], "SAGE");
  const double margin = std::stod(rows[1][3]);
  std::ostringstream printed;
  printed.precision(17);
  printed << margin;
  EXPECT_EQ(rows[1][3], printed.str());
}

TEST_F(CliTest, RegionPointAgreesWithLineMinimum) {
  // f_{a,b}(x + t·1) = e^t·f_{a,b}(x), so nonnegativity reduces to the line x2 = 0.
  const double d = std::numbers::pi / 4.0;
  auto line_min = [&](double a, double b) {
    double best = INFINITY;
    for (int i = 0; i <= 40000; ++i) {
      const double s = -20.0 + 1e-3 * i;
      best = std::min(best, std::exp(s) + 1.0 - a * std::exp(d * s) - b * std::exp((1 - d) * s));
    }
    return best;
  };
  EXPECT_GT(line_min(1.0, 0.5), 0.0);
  const std::string out = Temp("point.csv");
  ASSERT_EQ(Invoke({"--quiet", "region", "--amin", "1", "--amax", "1", "--bmin", "0.5", "--bmax",
                    "0.5", "--step", "1", "--out", out})
                .code,
            kExitOk);
  EXPECT_NE(ReadText(out).find("1,0.5,SAGE,"), std::string::npos);
}

TEST_F(CliTest, RegionIsDeterministicAcrossThreads) {
  const std::vector<std::string> grid = {"region", "--amin", "0",    "--amax", "2",
                                         "--bmin", "0",      "--bmax", "2",    "--step", "0.25"};
  auto run = [&](const std::string& threads, const std::string& name) {
    std::vector<std::string> args = {"--quiet", "--threads", threads};
    args.insert(args.end(), grid.begin(), grid.end());
    args.push_back("--out");
    args.push_back(Temp(name));
    EXPECT_EQ(Invoke(args).code, kExitOk);
    return ReadText(Temp(name));
  };
  const std::string one = run("1", "t1.csv");
  EXPECT_EQ(one, run("4", "t4.csv"));
  EXPECT_EQ(one, run("1", "t1b.csv"));
}

TEST_F(CliTest, RegionRejectsBadGridWithoutWriting) {
  const std::string out = Temp("bad.csv");
  EXPECT_EQ(Invoke({"region", "--step", "0", "--out", out}).code, kExitParse);
  EXPECT_EQ(Invoke({"region", "--amin", "2", "--amax", "1", "--out", out}).code, kExitParse);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(out + ".tmp"));
}

TEST_F(CliTest, BinaryExitCodes) {
  const char* bin = std::getenv("SAGEREL_CLI");
  if (bin == nullptr) GTEST_SKIP() << "SAGEREL_CLI not set";
  auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(bin) + " --quiet " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status("certify " + DataPath("posynomial.json")), kExitOk);
  EXPECT_EQ(status("certify " + DataPath("squared_form.json")), kExitNegative);
  EXPECT_EQ(status("certify " + DataPath("malformed.json")), kExitParse);
}

}  // namespace
}  // namespace sagerel::cli
