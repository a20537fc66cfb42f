#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lobforge/cli.hpp"
#include "lobforge/experiments.hpp"
#include "lobforge/order_flow.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lobforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = lobforge::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lobforge_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("usage errors exit with 2 and name the flag") {
  CHECK(invoke({}).code == 2);
  const Result r = invoke({"simulate", "--reps", "many"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--reps") != std::string::npos);
  CHECK(invoke({"simulate", "--stop", "sometime"}).code == 2);
  CHECK(invoke({"compare", "--grid", "6x"}).code == 2);
  CHECK(invoke({"simulate", "--model", "no_such_model"}).code == 2);
}

TEST_CASE("domain errors exit with 1") {
  const fs::path dir = scratch("domain");
  const Result r = invoke({"kbe", "--model", "modelA", "--n", "10", "--dt", "0.01", "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("StabilityViolated") != std::string::npos);
}

TEST_CASE("clear writes the clearing result and a manifest") {
  const fs::path dir = scratch("clear");
  {
    std::ofstream(dir / "book.json") << R"({"d":4,"buy":[1,2,3,0],"sell":[0,2,1,1]})";
    std::ofstream(dir / "ev.csv") << "kind,price,size\nlimit_sell,1,1\n";
  }
  const Result r = invoke({"clear", "--book", (dir / "book.json").string(), "--events", (dir / "ev.csv").string(),
                           "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto j = read_json(dir / "clearing.json");
  CHECK(j["cleared"]["buy"] == nlohmann::json({1, 2, 0, 0}));
  CHECK(j["cleared"]["sell"] == nlohmann::json({0, 0, 1, 1}));
  const auto m = read_json(dir / "manifest_clear.json");
  CHECK(m["command"] == "clear");
  CHECK(m["version"] == lobforge::kVersion);
  CHECK(m["outputs"][0] == "clearing.json");
}

TEST_CASE("simulate output does not depend on the thread count") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::vector<std::string> base{"simulate", "--model", "modelB", "--n", "10", "--T", "0.2", "--reps", "300", "--seed", "7"};
  auto with = [&](const fs::path& dir, const std::string& threads) {
    auto args = base;
    args.insert(args.end(), {"--out", dir.string(), "--threads", threads});
    return invoke(args);
  };
  REQUIRE(with(a, "1").code == 0);
  REQUIRE(with(b, "4").code == 0);
  CHECK(slurp(a / "path.csv") == slurp(b / "path.csv"));
  CHECK(slurp(a / "estimate.json") == slurp(b / "estimate.json"));
  CHECK(read_json(a / "manifest_simulate.json")["options"]["seed"] == "7");
}

TEST_CASE("compare output parses back") {
  const fs::path dir = scratch("compare");
  const Result r = invoke({"compare", "--model", "modelB", "--n", "10", "--asks", "1,2", "--bids", "1", "--reps", "100",
                           "--seed", "3", "--eps", "1e-5", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "compare.csv");
  const auto rows = lobforge::read_compare_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].ask_depth == 2);
  CHECK(rows[0].mc.n == 100);
  CHECK(rows[0].kbe.has_value());
}

TEST_CASE("flags override a JSON config file") {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "cfg.json") << R"({"model":"modelB","n":10,"reps":50,"seed":11,"T":0.1})";
  const Result r = invoke({"simulate", "--config", (dir / "cfg.json").string(), "--reps", "20", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto m = read_json(dir / "manifest_simulate.json");
  CHECK(m["options"]["reps"] == "20");
  CHECK(m["options"]["seed"] == "11");
  CHECK(read_json(dir / "estimate.json")["n"] == 20);
}

TEST_CASE("calibrate emits a loadable model") {
  const fs::path dir = scratch("calibrate");
  const Result r = invoke({"calibrate", "--messages", std::string(LOBFORGE_TEST_DATA) + "/messages_small.csv", "--n", "10",
                           "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto model = lobforge::load_model((dir / "model.json").string());
  CHECK(model->info().kind == "modelB");
  CHECK(read_json(dir / "calibration.json")["used"] == 6);
}

TEST_CASE("validate-model and convergence run end to end") {
  const fs::path dir = scratch("validate");
  CHECK(invoke({"validate-model", "--model", "modelA", "--n", "10", "--states", "500", "--out", dir.string()}).code == 0);
  CHECK(read_json(dir / "validation.json")["violations"] == 0);
  const Result c = invoke({"kbe", "--convergence", "--model", "modelA", "--n", "10", "--eps", "1e-5", "--T", "0.05",
                           "--dts", "0.005,0.0025", "--dt-min", "0.00125", "--out", dir.string()});
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "convergence.csv").rfind("dt,value,error\n", 0) == 0);
}
