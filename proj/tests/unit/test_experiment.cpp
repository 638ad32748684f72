#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oddvar/errors.hpp"
#include "oddvar/experiment.hpp"

using namespace oddvar;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return {{"name", "small"},
          {"model", {{"name", "fbm"}, {"params", {{"H", 0.3}}}}},
          {"grid", {{"T", 1}, {"n", 256}, {"ladder_log2", {3, 4, 5}}}},
          {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
          {"n_paths", 200},
          {"seed", 5}};
}

std::string validation_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("oddvar_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse a minimal config") {
  auto c = parse_config(small_config());
  CHECK(c.name == "small");
  CHECK(c.steps == 256);
  CHECK(c.ladder == std::vector<double>{0.125, 0.0625, 0.03125});
  CHECK(c.n_paths == 200);
  CHECK(c.seed == 5);
  CHECK_FALSE(c.quadrature);
  CHECK(c.output_dir == fs::path("out/small"));
  CHECK(c.resolved["functional"]["t"] == 1.0);
}

TEST_CASE("config validation names the field") {
  auto doc = small_config();
  doc.erase("seed");
  CHECK(validation_message(doc).find("seed") != std::string::npos);

  doc = small_config();
  doc["grid"]["ladder"] = {0.0123};
  doc["grid"].erase("ladder_log2");
  const auto msg = validation_message(doc);
  CHECK(msg.find("grid.ladder") != std::string::npos);
  CHECK(msg.find("0.0123") != std::string::npos);

  doc = small_config();
  doc["model"]["name"] = "nope";
  CHECK(validation_message(doc).find("fbm") != std::string::npos);

  doc = small_config();
  doc["model"]["params"]["H"] = 1.5;
  CHECK(validation_message(doc).find("model.params.H") != std::string::npos);

  doc = small_config();
  doc["extra"] = 1;
  CHECK(validation_message(doc).find("unknown key 'extra'") != std::string::npos);

  doc = small_config();
  doc["functional"]["m"] = -1;
  CHECK(validation_message(doc).find("functional.m") != std::string::npos);

  doc = small_config();
  doc["expect"] = {{"telescoping", {{"tol", 1e-12}}}};
  CHECK(validation_message(doc).find("expect.telescoping") != std::string::npos);
}

TEST_CASE("n_paths = 0 means quadrature only") {
  auto doc = small_config();
  doc["n_paths"] = 0;
  auto c = parse_config(doc);
  CHECK(c.quadrature);

  doc["quadrature"] = {{"enabled", false}};
  CHECK(validation_message(doc).find("n_paths") != std::string::npos);

  auto mart = small_config();
  mart["model"] = {{"name", "martingale_cos"}, {"params", {{"H", 0.3}}}};
  mart["n_paths"] = 0;
  CHECK(validation_message(mart).find("quadrature-only") != std::string::npos);
}

TEST_CASE("load_config errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), UsageError);
  auto dir = scratch("bad_json");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ValidationError);
}

TEST_CASE("every preset parses") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    auto configs = preset_configs(name, "out");
    CHECK_FALSE(configs.empty());
  }
  CHECK_THROWS_AS(preset_configs("nope", "out"), UsageError);
}

TEST_CASE("run_config writes reports") {
  auto doc = small_config();
  const auto dir = scratch("run");
  doc["output_dir"] = dir.string();
  doc["quadrature"] = {{"enabled", true}, {"resolution", 256}};
  doc["conditions"] = {{{"check", "little_o"}}};
  auto r = run_config(parse_config(doc), {.workers = 1});
  REQUIRE(r.ladder);
  CHECK(r.ladder->records.size() == 3);
  CHECK(r.quadrature.size() == 3);
  CHECK(r.verdicts.size() == 1);
  for (const char* f : {"ladder.json", "ladder.csv", "theory.json", "theory.csv", "conditions.json", "manifest.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / f));
  }
  auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config"]["seed"] == 5);
  CHECK(manifest.contains("versions"));
  CHECK(manifest.contains("wall_time_seconds"));
  const auto csv = slurp(dir / "ladder.csv");
  CHECK(csv.find("log_eps") != std::string::npos);
  CHECK(csv.find("log_msq") != std::string::npos);
  CHECK(csv.find("se") != std::string::npos);
  CHECK(json::parse(slurp(dir / "conditions.json")).contains("matrix"));
}

TEST_CASE("ladder csv is independent of the worker count") {
  auto doc = small_config();
  doc["output_dir"] = scratch("workers").string();
  const auto c = parse_config(doc);
  const auto a = run_config(c, {.workers = 1, .write_files = false});
  const auto b = run_config(c, {.workers = 2, .write_files = false});
  const auto d = run_config(c, {.workers = 5, .write_files = false});
  CHECK(a.ladder_csv == b.ladder_csv);
  CHECK(a.ladder_csv == d.ladder_csv);
}

TEST_CASE("quadrature-only report") {
  auto doc = small_config();
  doc["n_paths"] = 0;
  const auto dir = scratch("quad");
  doc["output_dir"] = dir.string();
  auto r = run_config(parse_config(doc));
  CHECK_FALSE(r.ladder);
  CHECK(r.quadrature.size() == 3);
  auto j = json::parse(slurp(dir / "ladder.json"));
  CHECK(j["quadrature_only"] == true);
  CHECK(j["monte_carlo"].is_null());
  CHECK_FALSE(fs::exists(dir / "ensemble.bin"));
}

TEST_CASE("ensemble dumps") {
  auto doc = small_config();
  doc["n_paths"] = 3;
  const auto dir = scratch("dump");
  doc["output_dir"] = dir.string();
  run_config(parse_config(doc), {.dump_binary = true, .dump_csv = true});
  CHECK(fs::exists(dir / "ensemble.bin"));
  const auto csv = slurp(dir / "ensemble.csv");
  CHECK(csv.rfind("t,x0,x1,x2\n", 0) == 0);
}

TEST_CASE("expectations: failing status makes all_passed false") {
  auto doc = small_config();
  doc["expect"] = {{"bounded_ratio", {{"max", 1e-9}}}};
  auto r = run_config(parse_config(doc), {.write_files = false});
  REQUIRE(r.expectations.size() == 1);
  CHECK_FALSE(r.all_passed());
  doc["expect"] = {{"bounded_ratio", {{"max", 1e9}}}};
  CHECK(run_config(parse_config(doc), {.write_files = false}).all_passed());
}

TEST_CASE("conditions with expected status") {
  auto doc = small_config();
  doc["model"]["params"]["H"] = 0.1;
  doc["conditions"] = {{{"check", "little_o"}}};
  doc["expect"] = {{"conditions", {{"little_o_delta", "fail"}}}};
  auto r = run_config(parse_config(doc), {.mode = RunMode::conditions, .write_files = false});
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].status == Status::fail);
  CHECK(r.all_passed());
}

TEST_CASE("condition matrix") {
  auto a = small_config();
  a["conditions"] = {{{"check", "little_o"}}};
  auto b = a;
  b["name"] = "low";
  b["model"]["params"]["H"] = 0.1;
  std::vector<RunResult> runs{run_config(parse_config(a), {.mode = RunMode::conditions, .write_files = false}),
                              run_config(parse_config(b), {.mode = RunMode::conditions, .write_files = false})};
  auto m = condition_matrix(runs);
  CHECK(m["processes"].size() == 2);
  CHECK(m["matrix"][0][0] == "pass");
  CHECK(m["matrix"][1][0] == "fail");
  CHECK(render_condition_matrix(m).find("fail") != std::string::npos);
}

TEST_CASE("registry") {
  for (const auto& name : model_names()) CHECK_FALSE(name.empty());
  auto fbm = build_model({{"name", "fbm"}, {"params", {{"H", 0.3}}}});
  CHECK(std::holds_alternative<GaussianCovariance>(fbm.process));
  CHECK(fbm.hurst == 0.3);
  auto rl = build_model({{"name", "rl_fbm"}, {"params", {{"H", 0.3}}}});
  CHECK(std::holds_alternative<GaussianVolterra>(rl.process));
  auto rl_chol = build_model({{"name", "rl_fbm"}, {"params", {{"H", 0.3}}}, {"family", "gaussian_covariance"}});
  CHECK(std::holds_alternative<GaussianCovariance>(rl_chol.process));
  CHECK_THROWS_AS(build_model({{"name", "fbm"}, {"params", {{"H", 0.3}}}, {"family", "gaussian_volterra"}}),
                  ValidationError);
  auto mart = build_model({{"name", "martingale_cos"}, {"params", {{"H", 0.3}, {"m", 3}}}});
  CHECK(std::holds_alternative<MartingaleVolterra>(mart.process));
  CHECK(mart.volatility.has_value());
  CHECK_FALSE(mart.metric.has_value());
  CHECK_THROWS_AS(build_model({{"name", "zzz"}}), ValidationError);
  CHECK(weight_function("cos")(0.0) == 1.0);
  CHECK_THROWS_AS(weight_function("zzz"), ValidationError);
  auto [f, df] = ito_function("linear");
  CHECK(f(1.0) == 3.0);
  CHECK(df(1.0) == 2.0);
}

TEST_CASE("build versions") {
  auto v = build_versions();
  CHECK(v.contains("oddvar"));
}
