#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrperc/errors.hpp"
#include "lrperc/harness.hpp"

using namespace lrperc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrperc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base() {
  return json::parse(R"({"schema_version": 1,
    "kernel": {"form": "pure_power", "d": 1, "alpha": 0.5},
    "boxes": {"sides": [256]},
    "beta": {"grid": [0]},
    "replicas": 100, "seed": 3,
    "audits": {"tail": {"n_grid": [1, 2, 4]}}})");
}

std::string schema_path(const json& j) {
  try {
    parse_config(j);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST(Config, SchemaErrorsCarryPointers) {
  EXPECT_EQ(schema_path(base()), "");
  json j = base();
  j["kernel"]["colour"] = 1;
  EXPECT_EQ(schema_path(j), "/kernel/colour");
  j = base();
  j.erase("replicas");
  EXPECT_EQ(schema_path(j), "/replicas");
  j = base();
  j["boxes"]["sides"] = {256, -4};
  EXPECT_EQ(schema_path(j), "/boxes/sides/1");
  j = base();
  j["schema_version"] = 2;
  EXPECT_EQ(schema_path(j), "/schema_version");
}

TEST(Config, RunIdIgnoresWorkersAndOutput) {
  json a = base();
  json b = base();
  b["workers"] = 3;
  b["output_dir"] = "elsewhere";
  EXPECT_EQ(run_id(parse_config(a)), run_id(parse_config(b)));
  b["seed"] = 4;
  EXPECT_NE(run_id(parse_config(a)), run_id(parse_config(b)));
  const auto c = parse_config(a);
  EXPECT_EQ(run_id(parse_config(to_json(c))), run_id(c));
}

TEST(Run, EmptyConfigurationsAndResume) {
  const fs::path dir = scratch("smoke");
  json j = base();
  j["output_dir"] = dir.string();
  const auto cfg = parse_config(j);
  std::ostringstream log;
  const auto s = run(cfg, Stage::Audit, log);
  EXPECT_TRUE(s.ok());
  const std::string tail = slurp(dir / "tail.csv");
  EXPECT_NE(tail.find("256,0.0,1,1.0,"), std::string::npos) << tail;
  EXPECT_NE(tail.find("256,0.0,2,0.0,"), std::string::npos) << tail;
  for (const auto& f : expected_files(cfg)) EXPECT_TRUE(fs::exists(dir / f)) << f;

  const std::string results = slurp(dir / "results.jsonl");
  const fs::path reps = dir / "replicas_L256_b0.jsonl";
  const std::string full = slurp(reps);
  run(cfg, Stage::Audit, log);
  EXPECT_EQ(slurp(dir / "results.jsonl"), results);

  // A torn write: drop the last line and half of the one before it.
  std::string torn = full.substr(0, full.size() - 1);
  torn = torn.substr(0, torn.rfind('\n'));
  torn = torn.substr(0, torn.size() - 20);
  std::ofstream(reps, std::ios::binary | std::ios::trunc) << torn;
  run(cfg, Stage::Audit, log);
  EXPECT_EQ(slurp(reps), full);
  EXPECT_EQ(slurp(dir / "results.jsonl"), results);

  json other = j;
  other["seed"] = 9;
  EXPECT_THROW(run(parse_config(other), Stage::Audit, log), SchemaError);
}

TEST(Report, MissingFiles) {
  const fs::path dir = scratch("empty");
  fs::create_directories(dir);
  try {
    report(dir.string());
    FAIL();
  } catch (const MissingFilesError& e) {
    EXPECT_FALSE(e.files().empty());
  }
}

TEST(Report, OracleRun) {
  const fs::path dir = scratch("oracle");
  json j = base();
  j["output_dir"] = dir.string();
  j["boxes"]["sides"] = {64};
  j["replicas"] = 1;
  j["audits"] = {{"oracle", {{"max_exhaustive_vertices", 4}, {"random_graphs", 5}}}};
  std::ostringstream log;
  const auto s = run_oracle(parse_config(j), log);
  EXPECT_EQ(s.oracle_violations, 0u);
  EXPECT_NE(report(dir.string()).find("0 violations / "), std::string::npos);
}

TEST(Report, ExponentTable) {
  const fs::path dir = scratch("exponents");
  json j = base();
  j["output_dir"] = dir.string();
  j["beta"] = {{"grid", {1.4}}};
  j["replicas"] = 60;
  j["audits"] = {{"tail", true}, {"two_point", true}};
  j["bootstrap"] = {{"resamples", 100}};
  std::ostringstream log;
  run(parse_config(j), Stage::Audit, log);
  const std::string r = report(dir.string());
  EXPECT_NE(r.find("tail_exponent"), std::string::npos) << r;
  EXPECT_NE(r.find("0.2000"), std::string::npos) << r;
  EXPECT_NE(r.find("0.3333"), std::string::npos) << r;
}
