#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using thurston::test::fixture;

namespace {

struct CliRun {
  int exit_code = -1;
  json report;
  std::string raw;
};

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "thurston_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CliRun run(const std::string& args, const std::string& tag) {
  const fs::path out = scratch() / (tag + ".json");
  fs::remove(out);
  const std::string cmd = std::string(THURSTON_EXE) + " --json-out " + out.string() + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(out)) {
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.raw = ss.str();
    r.report = json::parse(r.raw);
  }
  return r;
}

std::string write_json(const json& j, const std::string& name) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

}  // namespace

TEST(Cli, CheckWithoutCurvesIsUnobstructed) {
  const CliRun r = run("check " + fixture("portraits/basilica.json"), "check_empty");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["summary"], "no obstruction among supplied systems");
}

TEST(Cli, CheckLevyCycleIsObstructed) {
  const CliRun r = run("check " + fixture("portraits/rabbit.json") + " --curves " + fixture("curves/levy.json"), "check_levy");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.report["result"]["verdict"], "Obstructed");
}

TEST(Cli, CheckTwoCurveSystemEnclosesOne) {
  const CliRun r =
      run("check " + fixture("portraits/rabbit.json") + " --curves " + fixture("curves/pair_obstructed.json"), "check_pair");
  EXPECT_EQ(r.exit_code, 1);
  const json& s = r.report["result"]["systems"][0];
  EXPECT_LE(s["perron_lo"]["approx"].get<double>(), 1.0);
  EXPECT_GE(s["perron_hi"]["approx"].get<double>(), 1.0);
}

TEST(Cli, CheckReportsUniversalK) {
  const CliRun r = run("check " + fixture("portraits/rabbit.json") + " --curves " + fixture("curves/half.json") + " " +
                        fixture("curves/pair_unobstructed.json"),
                    "check_k");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["systems"][0]["universal_k"], 2);
  EXPECT_EQ(r.report["result"]["systems"][1]["universal_k"], 4);
}

TEST(Cli, MalformedInputExitsTwo) {
  const std::string bad = write_json(json{{"degree", 2}, {"oops", true}}, "bad_portrait.json");
  const CliRun r = run("check " + bad, "check_bad");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.report["error"]["kind"], "ParseError");
}

TEST(Cli, InvalidConfigExitsTwo) {
  const std::string cfg = write_json(json{{"tol", -1.0}}, "negative_tol_config.json");
  const CliRun r = run("--config " + cfg + " check " + fixture("portraits/basilica.json"), "bad_config");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.report["error"]["kind"], "InvalidArgument");
}

TEST(Cli, RealizeBasilica) {
  const CliRun r = run("realize " + fixture("portraits/basilica.json") + " --init " + fixture("init/basilica.json"), "rz_basilica");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["outcome"], "Converged");
  EXPECT_NEAR(r.report["result"]["monic_centered"][0]["re"].get<double>(), -1.0, 1e-10);
  EXPECT_NEAR(r.report["result"]["monic_centered"][0]["im"].get<double>(), 0.0, 1e-10);
}

TEST(Cli, RealizeObstructedMatingExitsThree) {
  const CliRun r = run("realize " + fixture("portraits/mating_obstructed.json") + " --init " +
                        fixture("init/mating_obstructed.json"),
                    "rz_mating");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.report["result"]["outcome"], "Degenerated");
  EXPECT_LT(r.report["result"]["certificate_b"].get<double>(), 1e-6);
}

TEST(Cli, ReportsEmbedConfigAndDigestsAndAreReproducible) {
  const std::string args = "--seed 5 realize " + fixture("portraits/rabbit.json") + " --init " + fixture("init/rabbit.json");
  const CliRun a = run(args, "rz_a");
  const CliRun b = run(args, "rz_b");
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_EQ(a.report["config"]["seed"], 5);
  EXPECT_EQ(a.report["inputs"]["portrait"]["digest"].get<std::string>().size(), 16u);
}

TEST(Cli, AuditBasilicaHasEmptyCotangentSpace) {
  run("realize " + fixture("portraits/basilica.json") + " --init " + fixture("init/basilica.json"), "audit_b_in");
  const CliRun r = run("audit " + (scratch() / "audit_b_in.json").string() + " --portrait " + fixture("portraits/basilica.json"),
                    "audit_b");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["pushforward"]["norm_estimate"], 0.0);
  EXPECT_NEAR(r.report["result"]["certificate"]["b"].get<double>(), std::sqrt(2.0), 1e-12);
}

TEST(Cli, AuditRabbitContracts) {
  run("realize " + fixture("portraits/rabbit.json") + " --init " + fixture("init/rabbit.json"), "audit_r_in");
  const CliRun r = run("audit " + (scratch() / "audit_r_in.json").string() + " --portrait " + fixture("portraits/rabbit.json"),
                    "audit_r");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["result"]["pushforward"]["src_dimension"], 1);
  const double norm = r.report["result"]["pushforward"]["norm_estimate"];
  EXPECT_GT(norm, 0.0);
  EXPECT_LT(norm, 1.0);
}

TEST(Cli, AuditAttractingQuadraticVerifiesRings) {
  run("realize " + fixture("portraits/lambda_half.json") + " --init " + fixture("init/lambda_half.json"), "audit_l_in");
  const CliRun r = run("audit " + (scratch() / "audit_l_in.json").string() + " --portrait " +
                        fixture("portraits/lambda_half.json"),
                    "audit_l");
  EXPECT_EQ(r.exit_code, 0);
  const json& rings = r.report["result"]["rings"];
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_TRUE(rings[0]["verification"]["passed"].get<bool>());
  for (const auto& b : rings[0]["verification"]["bullets"])
    if (!b["margin"].is_null()) EXPECT_GT(b["margin"].get<double>(), 0.0);
  for (const auto& n : rings[0]["norm_decrease"]) EXPECT_TRUE(n["holds"].get<bool>());
}

TEST(Cli, AuditRejectsMapForOtherPortrait) {
  run("realize " + fixture("portraits/basilica.json") + " --init " + fixture("init/basilica.json"), "audit_x_in");
  const std::string doc = (scratch() / "audit_x_in.json").string();
  const CliRun r = run("audit " + doc + " --portrait " + fixture("portraits/lambda_half.json"), "audit_x");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, QdPushAndNorm) {
  const CliRun push = run("qd push --map " + fixture("maps/square.json") + " " + fixture("qd/odd.json"), "qd_push");
  EXPECT_EQ(push.exit_code, 0);
  for (const auto& c : push.report["result"]["qd"]["coeffs"]) EXPECT_LT(std::hypot(c["re"].get<double>(), c["im"].get<double>()), 1e-12);
  const CliRun norm = run("qd norm " + fixture("qd/even.json"), "qd_norm");
  EXPECT_EQ(norm.exit_code, 0);
  EXPECT_GT(norm.report["result"]["l1_norm"].get<double>(), 0.0);
}

TEST(Cli, QdPairingIdentity) {
  const CliRun r = run("qd pair " + fixture("pairings/newton.json"), "qd_pair");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_LT(r.report["result"]["relative_difference"].get<double>(), 1e-6);
}

TEST(Cli, GeomCommands) {
  const std::string ms = write_json(
      json{{"points", {{{"re", 0}, {"im", 0}}, {{"re", 1}, {"im", 0}}, "inf", {{"re", 0}, {"im", 1}}}}}, "square_pts.json");
  const CliRun cert = run("geom cert " + ms, "geom_cert");
  EXPECT_NEAR(cert.report["result"]["certificate"]["b"].get<double>(), std::sqrt(2.0), 1e-12);
  const CliRun len = run("geom length " + fixture("marked/cluster.json") + " --inner 0 1 --outer 2 3", "geom_len");
  EXPECT_EQ(len.exit_code, 0);
  EXPECT_TRUE(len.report["result"]["respects_basic2"].get<bool>());
  const CliRun scan = run("geom scan --weights 0.5 5.0 --a-min 1 --width 2", "geom_scan");
  EXPECT_DOUBLE_EQ(scan.report["result"]["gap"]["b"].get<double>(), 3.0);
}

TEST(Cli, RingsBuildThenVerify) {
  const CliRun build = run("rings build --map " + fixture("maps/lambda_half.json") + " --cycle 0.25,0 --lambda 0.5,0", "rings_b");
  EXPECT_EQ(build.exit_code, 0);
  const CliRun verify =
      run("rings verify --map " + fixture("maps/lambda_half.json") + " " + (scratch() / "rings_b.json").string(), "rings_v");
  EXPECT_EQ(verify.exit_code, 0);
  EXPECT_TRUE(verify.report["result"]["verification"]["passed"].get<bool>());
}

TEST(Cli, RingsMultiplierMismatchExitsTwo) {
  const CliRun r = run("rings build --map " + fixture("maps/lambda_half.json") + " --cycle 0.25,0 --lambda 0.4,0", "rings_bad");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.report["error"]["kind"], "MultiplierMismatch");
}
