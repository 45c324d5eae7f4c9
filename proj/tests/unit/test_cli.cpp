#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include <nlohmann/json.hpp>

using nlohmann::json;
using namespace ocp::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ocp");
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ocp_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("meanfield CSV") {
  const Run r = run({"meanfield", "--a", "1", "--t-max", "10"});
  REQUIRE(r.code == kOk);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# {", 0) == 0);
  CHECK(json::parse(line.substr(2))["schema_version"] == 1);
  std::getline(lines, line);
  CHECK(line == "t,f,f_numeric");
  bool found = false;
  while (std::getline(lines, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    if (t != 1.0) continue;
    const double f = std::stod(line.substr(line.find(',') + 1));
    CHECK(std::abs(f - 0.5) < 1e-8);
    found = true;
  }
  CHECK(found);
}

TEST_CASE("zeta record at the critical scaling") {
  const Run r = run({"zeta", "--d", "3", "--p", "0.5", "--lambda", "0.6667", "--t", "1", "--replicas", "100000"});
  REQUIRE(r.code == kOk);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["command"] == "zeta");
  const double mean = j["result"]["mean"], se = j["result"]["se"], analytic = j["result"]["analytic"];
  CHECK(analytic == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(mean - analytic) <= 3 * se);
  CHECK(j["config"]["replicas"] == 100000);
  CHECK(j["config"].contains("master_seed"));
}

TEST_CASE("usage errors") {
  const Run missing = run({"zeta", "--d", "3", "--p", "0.5", "--lambda", "1"});
  CHECK(missing.code == kUsage);
  CHECK(missing.err.find("--t") != std::string::npos);
  CHECK(json::parse(missing.err)["error"] == "usage");

  const Run unknown = run({"frobnicate"});
  CHECK(unknown.code == kUsage);
  CHECK(unknown.err.find("frobnicate") != std::string::npos);

  CHECK(run({}).code == kUsage);
  CHECK(run({"meanfield", "--bogus", "1"}).code == kUsage);
  CHECK(run({"meanfield", "--help"}).code == kOk);
}

TEST_CASE("config files and flag precedence") {
  const auto cfg = scratch("meanfield.json");
  write(cfg, R"({"a": 2.0, "t_max": 1.0, "dt": 0.5})");
  const Run from_file = run({"meanfield", "--config", cfg.string()});
  REQUIRE(from_file.code == kOk);
  const json header = json::parse(from_file.out.substr(2, from_file.out.find('\n') - 2));
  CHECK(header["config"]["a"] == 2.0);
  CHECK(header["config"]["step"] == 0.001);

  const Run overridden = run({"meanfield", "--config", cfg.string(), "--a", "0.5"});
  REQUIRE(overridden.code == kOk);
  CHECK(json::parse(overridden.out.substr(2, overridden.out.find('\n') - 2))["config"]["a"] == 0.5);

  const auto blocks = scratch("blocks.json");
  write(blocks, R"({"a": 1.0, "dt": 0.25, "meanfield": {"a": 3.0, "t_max": 1.0}})");
  const Run block = run({"meanfield", "--config", blocks.string()});
  REQUIRE(block.code == kOk);
  const json block_header = json::parse(block.out.substr(2, block.out.find('\n') - 2));
  CHECK(block_header["config"]["a"] == 3.0);
  CHECK(block_header["config"]["dt"] == 0.25);
}

TEST_CASE("malformed configuration") {
  const auto bad = scratch("bad.json");
  write(bad, "{not json");
  CHECK(run({"meanfield", "--config", bad.string()}).code == kConfig);
  const auto unknown_key = scratch("unknown.json");
  write(unknown_key, R"({"a": 1.0, "t_max": 1.0, "colour": 3})");
  CHECK(run({"meanfield", "--config", unknown_key.string()}).code == kConfig);
  const auto wrong_type = scratch("type.json");
  write(wrong_type, R"({"a": "big", "t_max": 1.0})");
  CHECK(run({"meanfield", "--config", wrong_type.string()}).code == kConfig);
  CHECK(run({"meanfield", "--config", scratch("absent.json").string()}).code == kConfig);
}

TEST_CASE("module failures map to distinct exit codes") {
  const Run budget = run({"paths", "--d", "10", "--p", "0.5", "--lambda", "1", "--n", "8", "--fields", "10"});
  CHECK(budget.code == kBudget);
  const Run contract = run({"zeta", "--d", "3", "--p", "1.5", "--lambda", "1", "--t", "1", "--replicas", "10"});
  CHECK(contract.code == kContract);
  const Run bracket = run({"estimate", "--d", "4", "--p", "0.5", "--lo", "1.5", "--hi", "2", "--hi-limit", "2",
                           "--horizon", "10", "--box-radius", "15", "--replicas", "100", "--population-cap", "500"});
  CHECK(bracket.code == kBracket);
  const json e = json::parse(bracket.err);
  CHECK(e["error"] == "bracket");
  CHECK(e.contains("survival_lo"));
  CHECK(e.contains("survival_hi"));
}

TEST_CASE("results regenerate bit-exactly from their embedded config") {
  const auto first = scratch("walks.json"), second = scratch("walks2.json");
  REQUIRE(run({"walks", "--d", "2,3", "--horizons", "20,80", "--replicas", "300", "--p", "0.9", "--lambda", "2",
               "--master-seed", "17", "--out", first.string()})
              .code == kOk);
  REQUIRE(run({"walks", "--config", first.string(), "--out", second.string()}).code == kOk);
  CHECK(slurp(first) == slurp(second));

  const auto csv = scratch("sweep.csv"), csv2 = scratch("sweep2.csv");
  REQUIRE(run({"sweep", "--d", "3", "--p", "0.5", "--lambdas", "0.5,1,1.5", "--horizon", "5", "--box-radius", "10",
               "--replicas", "100", "--master-seed", "3", "--out", csv.string()})
              .code == kOk);
  REQUIRE(run({"sweep", "--config", csv.string(), "--out", csv2.string()}).code == kOk);
  CHECK(slurp(csv) == slurp(csv2));

  const auto other = scratch("walks3.json");
  REQUIRE(run({"walks", "--config", first.string(), "--master-seed", "18", "--out", other.string()}).code == kOk);
  CHECK(slurp(first) != slurp(other));
}

TEST_CASE("every subcommand embeds its resolved config") {
  const std::vector<std::vector<std::string>> calls = {
      {"simulate", "--d", "2", "--p", "0.6", "--lambda", "1", "--t", "2", "--box-radius", "5"},
      {"paths", "--d", "2", "--p", "0.5", "--n", "3", "--seeds", "50"},
      {"selfdual", "--d", "2", "--p", "0.7", "--lambda", "2", "--t", "0.5", "--replicas", "200"},
  };
  for (const auto& call : calls) {
    const Run r = run(call);
    CAPTURE(call[0]);
    REQUIRE(r.code == kOk);
    const json j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["command"] == call[0]);
    CHECK(j["config"].contains("master_seed"));
  }
}
