#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

CliRun kfut(const std::string& args) {
  const std::string base = ::testing::TempDir() + "kfut_cli_" + std::to_string(::getpid());
  const std::string cmd = std::string(KFUT_BIN) + " " + args + " > " + base + ".out 2> " + base + ".err";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

const std::string kData = KFUT_DATA_DIR;

}  // namespace

TEST(Cli, ComputeOnRoundSphere) {
  const CliRun r = kfut("compute --manifold cp1 --field rot --json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& rep = j["reports"][0];
  EXPECT_EQ(rep["field"], "rot");
  EXPECT_LT(std::abs(rep["F_omega"]["value"].get<double>()), 1e-12);
  EXPECT_NEAR(rep["vol"]["value"].get<double>(), 4.0 * std::numbers::pi, 1e-10);
}

TEST(Cli, ReportsAreByteIdentical) {
  const std::string a = ::testing::TempDir() + "a.json", b = ::testing::TempDir() + "b.json";
  ASSERT_EQ(kfut("compute --spec " + kData + "/cp1_bumped.json --field boost_x --out " + a).code, 0);
  ASSERT_EQ(kfut("compute --spec " + kData + "/cp1_bumped.json --field boost_x --out " + b).code, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(kfut("list suites").code, 0);
  EXPECT_EQ(kfut("verify --suite bianchi --manifold cp2").code, 0);
  // Any tolerance below the rounding level must fail the suite.
  EXPECT_EQ(kfut("verify --suite bianchi --manifold cp2 --tol 1e-300").code, 1);
  EXPECT_EQ(kfut("verify --suite nope --manifold cp1").code, 2);
  EXPECT_EQ(kfut("compute --manifold nope").code, 2);
  EXPECT_EQ(kfut("compute --manifold cp1 --jet-order 4").code, 2);
  EXPECT_EQ(kfut("compute --manifold cp1 --spec x.json").code, 2);
  EXPECT_EQ(kfut("").code, 2);
}

TEST(Cli, MalformedSpecGivesLineDiagnostic) {
  const std::string path = write_temp("malformed.json", "{\n  \"name\": \"x\",\n  \"complex_dim\": 1\n  \"potential\": \"0\"\n}\n");
  const CliRun r = kfut("compute --spec " + path);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("malformed.json:4:"), std::string::npos) << r.err;
}

TEST(Cli, BadFieldIsRejectedWithResidualCode) {
  std::string text = slurp(kData + "/cp1_round.json");
  const std::string good = "\"-2 / (1 + x1^2 + x2^2)\"";
  ASSERT_NE(text.find(good), std::string::npos);
  text.replace(text.find(good), good.size(), "\"-3 / (1 + x1^2 + x2^2)\"");
  const CliRun r = kfut("compute --spec " + write_temp("bad_field.json", text));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("invalid_field"), std::string::npos) << r.err;
}
