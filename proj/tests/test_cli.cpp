#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pshlab/cli.hpp"
#include "pshlab/errors.hpp"

using namespace pshlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path source_dir() { return fs::path(PSHLAB_SOURCE_DIR); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pshlab_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

json small_quad_check() {
  return {{"command", "quad-check"}, {"quadrature", {{"radial_n", 16}, {"angular_n", 32}}}, {"max_moment", 6}};
}

json divergent_truncation() {
  return {{"command", "truncation"},
          {"quadrature", {{"levels", 20}}},
          {"phi", {{"op", "logabs"}, {"coeffs", {{1, 0}}}, {"scale", 2.5}}},
          {"psi", {{"op", "logabs"}, {"coeffs", {{1, 0}}}, {"scale", 2.6}}},
          {"f", {{"coeffs", {{{"alpha", {0}}, {"re", 1}, {"im", 0}}}}}},
          {"j_list", {1, 2, 4}}};
}

}  // namespace

TEST(Config, ShippedConfigsRoundTrip) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(source_dir() / "configs")) {
    if (entry.path().extension() != ".json") continue;
    const ExperimentConfig c = load_config(entry.path());
    const ExperimentConfig back = parse_config(serialize_config(c));
    EXPECT_EQ(back, c) << entry.path();
    EXPECT_EQ(serialize_config(back), serialize_config(c));
    ++seen;
  }
  EXPECT_GE(seen, 7);
}

TEST(Config, UnknownKeysNameTheirLocation) {
  json doc = small_quad_check();
  doc["quadrature"]["radial_m"] = 4;
  try {
    parse_config(doc);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("config.quadrature"), std::string::npos) << msg;
    EXPECT_NE(msg.find("radial_m"), std::string::npos) << msg;
  }
  json top = small_quad_check();
  top["colour"] = "red";
  EXPECT_THROW(parse_config(top), InputError);
}

TEST(Config, TypeErrorsAndMissingFields) {
  json doc = small_quad_check();
  doc["max_moment"] = "ten";
  EXPECT_THROW(parse_config(doc), InputError);
  EXPECT_THROW(parse_config(json{{"command", "truncation"}}), InputError);
  EXPECT_THROW(parse_config(json{{"command", "launch"}}), InputError);
  EXPECT_THROW(parse_config(json::object()), InputError);
  json bad_weight = divergent_truncation();
  bad_weight["phi"]["op"] = "exp";
  try {
    parse_config(bad_weight);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("config.phi"), std::string::npos);
  }
}

TEST(Config, OverridesEditTheDocument) {
  json doc = small_quad_check();
  apply_override(doc, "quadrature.radial_n=24");
  apply_override(doc, "output_dir=results/run1");
  apply_override(doc, "epsilon_factor=1.5");
  const ExperimentConfig c = parse_config(doc);
  EXPECT_EQ(c.quad.radial_n, 24);
  EXPECT_EQ(c.output_dir, "results/run1");
  EXPECT_DOUBLE_EQ(c.epsilon_factor, 1.5);
  json lists = divergent_truncation();
  apply_override(lists, "j_list.1=3");
  EXPECT_EQ(lists["j_list"][1], 3);
  EXPECT_THROW(apply_override(lists, "j_list.9=3"), InputError);
  EXPECT_THROW(apply_override(lists, "noequals"), InputError);
  EXPECT_THROW(apply_override(lists, "j_list.0.x=1"), InputError);
}

TEST(Config, HashIsStableAndSensitive) {
  const ExperimentConfig a = parse_config(small_quad_check());
  const ExperimentConfig b = parse_config(small_quad_check());
  EXPECT_EQ(config_hash(a), config_hash(b));
  json doc = small_quad_check();
  doc["max_moment"] = 7;
  EXPECT_NE(config_hash(a), config_hash(parse_config(doc)));
  EXPECT_EQ(hex(0xabcull), "0000000000000abc");
}

TEST(Plotdata, SweepRowsSortDescendingInEpsilon) {
  const json report = {{"report_type", "sweep"},
                       {"result", {{"rows", {{{"epsilon", 0.1}, {"delta", 0.5}}, {{"epsilon", 0.4}, {"delta", 0.7}}}}}}};
  EXPECT_EQ(emit_plotdata(report), "epsilon,delta\n0.40000000000000002,0.69999999999999996\n0.10000000000000001,0.5\n");
}

TEST(Plotdata, TruncationAndEmptyReports) {
  const json trunc = {{"report_type", "truncation"},
                      {"result", {{"rows", {{{"j", 1}, {"coeff_cauchy", 0.25}}, {{"j", 2}, {"coeff_cauchy", 0.125}}}}}}};
  EXPECT_EQ(emit_plotdata(trunc), "j,coeff_cauchy\n1,0.25\n2,0.125\n");
  const json empty = {{"report_type", "sweep"}, {"result", {{"rows", json::array()}}}};
  EXPECT_EQ(emit_plotdata(empty), "epsilon,delta\n");
  EXPECT_THROW(emit_plotdata(json{{"report_type", "remark"}}), InputError);
  EXPECT_THROW(emit_plotdata(json::object()), InputError);
}

TEST(Run, PassingCommandWritesReportCsvAndManifest) {
  const fs::path dir = scratch("pass");
  ASSERT_EQ(run(parse_config(small_quad_check()), {dir, false}), 0);
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_TRUE(manifest.contains("start_time"));
  for (const auto& f : manifest["files"]) EXPECT_TRUE(fs::exists(f.get<std::string>())) << f;
  EXPECT_EQ(manifest["files"].size(), 3u);
  const json report = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["report_type"], "quad-check");
  EXPECT_EQ(report["config_hash"], manifest["config_hash"]);
  EXPECT_FALSE(fs::exists(dir / ".lock"));
}

TEST(Run, ExitCodeContract) {
  CommandOutput fabricated;
  fabricated.passed = false;
  EXPECT_EQ(exit_status(fabricated), 2);
  fabricated.passed = true;
  EXPECT_EQ(exit_status(fabricated), 0);

  json strict = small_quad_check();
  strict["moment_tolerance"] = 1e-300;
  EXPECT_EQ(run(parse_config(strict), {scratch("fail"), true}), 2);

  const fs::path div = scratch("divergent");
  EXPECT_EQ(run(parse_config(divergent_truncation()), {div, true}), 1);
  const json report = json::parse(slurp(div / "report.json"));
  EXPECT_EQ(report["error"]["kind"], "divergence");
  EXPECT_LT(report["error"]["fitted_exponent"].get<double>(), 0.0);

  json unbounded = divergent_truncation();
  unbounded["command"] = "theorem";
  unbounded.erase("j_list");
  unbounded["phi"]["scale"] = 1.5;
  unbounded["psi"]["scale"] = 1.9;
  EXPECT_EQ(run(parse_config(unbounded), {scratch("input"), true}), 1);
}

TEST(Run, CanonicalReportsAreByteIdentical) {
  const json doc = {{"command", "remark"},
                    {"shells", {{"k_max", 12}, {"radial_n", 8}, {"angular_n", 16}}},
                    {"remark_cases", {{{"epsilon", 0.5}, {"j", 3}}}}};
  const fs::path a = scratch("canon_a"), b = scratch("canon_b");
  ASSERT_EQ(run(parse_config(doc), {a, true}), 0);
  ASSERT_EQ(run(parse_config(doc), {b, true}), 0);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "remark.csv"), slurp(b / "remark.csv"));
  const json manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_FALSE(manifest.contains("start_time"));
  EXPECT_FALSE(json::parse(slurp(a / "report.json")).contains("elapsed_seconds"));
}

TEST(Run, RefusesConcurrentWriterToSameDirectory) {
  const fs::path dir = scratch("locked");
  fs::create_directories(dir);
  std::ofstream(dir / ".lock") << "";
  EXPECT_EQ(run(parse_config(small_quad_check()), {dir, true}), 1);
}
