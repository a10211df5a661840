#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cumdamage/direct.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cumdamage;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cumdamage");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

using Table = std::vector<std::vector<std::string>>;

Table parse_csv(const std::string& text) {
  Table rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

std::string column(const Table& t, std::size_t row, const std::string& name) {
  for (std::size_t i = 0; i < t[0].size(); ++i) {
    if (t[0][i] == name) return t.at(row).at(i);
  }
  FAIL("missing column " << name);
  return {};
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cumdamage_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string read(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kConstant = test::scenario_path("constant_exp_exp");
const std::string kMailbox = test::scenario_path("mailbox");

}  // namespace

TEST_CASE("evaluate prints full-precision CSV") {
  const Run r = invoke({"--config", kConstant, "--engine", "direct", "evaluate", "--T", "20.25"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.size() == 2);
  CHECK(t[0][0] == "label");
  const double printed = std::strtod(column(t, 1, "cost_rate").c_str(), nullptr);
  const double expected = direct::cost_rate_T(load_scenario_file(kConstant), 20.25);
  CHECK(printed == expected);
  CHECK(column(t, 1, "N") == "inf");
  CHECK(column(t, 1, "Z") == "inf");
  CHECK(column(t, 1, "engine") == "direct");
  const double p = std::strtod(column(t, 1, "p_T").c_str(), nullptr) +
                   std::strtod(column(t, 1, "p_K").c_str(), nullptr);
  CHECK(p == doctest::Approx(1).epsilon(1e-8));
}

TEST_CASE("policy JSON and cost overrides") {
  const Run a = invoke({"--config", kConstant, "--engine", "direct", "evaluate", "--policy", R"({"T": 20.25})",
                     "--cK", "4"});
  const Run b = invoke({"--config", kConstant, "--engine", "direct", "evaluate", "--T", "20.25", "--cK", "4"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Table t = parse_csv(a.out);
  CHECK(std::strtod(column(t, 1, "cost_rate").c_str(), nullptr) ==
        direct::cost_rate_T(test::constant_exp_exp(4), 20.25));
  CHECK(invoke({"--config", kConstant, "evaluate", "--policy", R"({"T": 20})", "--T", "3"}).code == 2);
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"evaluate", "--T", "3"}).code == 2);
  CHECK(invoke({"--config", "/nonexistent.json", "evaluate", "--T", "3"}).code == 2);
  CHECK(invoke({"--config", kConstant, "evaluate"}).code == 2);
  CHECK(invoke({"--config", kConstant, "evaluate", "--Z", "11"}).code == 2);
  CHECK(invoke({"--config", kConstant, "--engine", "magic", "evaluate", "--T", "3"}).code == 2);
  CHECK(invoke({"--config", kConstant, "optimize", "--variables", ""}).code == 2);
  CHECK(invoke({"--config", kConstant, "optimize", "--variables", "TQ"}).code == 2);
  CHECK(invoke({"--config", kConstant, "optimize", "--variables", "TT"}).code == 2);
  CHECK(invoke({"--config", kConstant, "optimize"}).code == 2);
  CHECK(invoke({"--config", kConstant, "optimize", "--variables", "T", "--method", "newton"}).code == 2);
  CHECK(invoke({"reproduce", "table9"}).code == 2);
  CHECK(invoke({"--config", kMailbox, "--engine", "direct", "evaluate", "--T", "700"}).code == 3);
  CHECK(invoke({"--config", kMailbox, "--engine", "direct", "optimize", "--variables", "T"}).code == 3);

  const fs::path dir = temp_dir("codes");
  const std::string broken = write(dir / "broken.json", "{ \"schema\": 1, ");
  CHECK(invoke({"--config", broken, "evaluate", "--T", "3"}).code == 2);
  const std::string stuck = write(dir / "stuck.json", R"({
    "schema": 1,
    "inter_arrival": {"kind": "deterministic", "value": 1},
    "damage": {"kind": "iid", "dist": {"kind": "deterministic", "value": 0}},
    "strength": {"kind": "constant", "K": 1},
    "costs": {"c_T": 1, "c_N": 1, "c_Z": 1, "c_K": 2}
  })");
  const Run nonterminating = invoke({"--config", stuck, "--reps", "2", "evaluate", "--Z", "0.5"});
  CHECK(nonterminating.code == 4);
  CHECK(nonterminating.err.find("nonterminating") != std::string::npos);
  const std::string extra = write(dir / "extra.json", R"({
    "schema": 1,
    "inter_arrival": {"kind": "exponential", "rate": 0.5},
    "damage": {"kind": "iid", "dist": {"kind": "exponential", "rate": 1}},
    "strength": {"kind": "constant", "K": 10},
    "costs": {"c_T": 1, "c_N": 1, "c_Z": 1, "c_K": 2},
    "optimizer": {"T": [1, 60], "speed": 3}
  })");
  const Run unknown = invoke({"--config", extra, "optimize", "--variables", "T"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("optimizer.speed") != std::string::npos);
}

TEST_CASE("fixed seeds give byte-identical output for any worker count") {
  const std::vector<std::string> base{"--config", kMailbox, "--reps", "3000", "--seed", "9"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  };
  const Run a = with({"evaluate", "--T", "708.89", "--N", "183", "--Z", "3.86"});
  REQUIRE(a.code == 0);
  CHECK(with({"evaluate", "--T", "708.89", "--N", "183", "--Z", "3.86"}).out == a.out);
  CHECK(with({"--workers", "4", "evaluate", "--T", "708.89", "--N", "183", "--Z", "3.86"}).out == a.out);
  CHECK(with({"--workers", "8", "evaluate", "--T", "708.89", "--N", "183", "--Z", "3.86"}).out == a.out);
  CHECK(with({"--seed", "10", "evaluate", "--T", "708.89", "--N", "183", "--Z", "3.86"}).out != a.out);

  const Run o1 = with({"optimize", "--variables", "T", "--final-reps", "2000"});
  const Run o2 = with({"--workers", "4", "optimize", "--variables", "T", "--final-reps", "2000"});
  REQUIRE(o1.code == 0);
  CHECK(o1.out == o2.out);
}

TEST_CASE("output files and manifests") {
  const fs::path dir = temp_dir("out");
  const Run r = invoke({"--config", kConstant, "--engine", "direct", "--out", dir.string(), "optimize",
                     "--variables", "TN"});
  REQUIRE(r.code == 0);
  CHECK(read(dir / "optimize.csv") == r.out);
  CHECK(fs::exists(dir / "trace.csv"));
  const auto manifest = nlohmann::json::parse(read(dir / "optimize.manifest.json"));
  CHECK(manifest["command"] == "--config " + kConstant + " --engine direct --out " + dir.string() +
                                   " optimize --variables TN");
  CHECK(manifest["label"] == "K=10, Exp(0.5) arrivals, Exp(1) damages");
  CHECK(manifest["master_seed"] == 1);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["version"].is_string());
  CHECK(manifest["timestamp"].get<std::string>().back() == 'Z');
  CHECK(fs::exists(dir / "trace.manifest.json"));

  const Table t = parse_csv(r.out);
  CHECK(column(t, 1, "variables") == "TN");
  CHECK(column(t, 1, "Z") == "inf");
  const Table trace = parse_csv(read(dir / "trace.csv"));
  CHECK(trace[0] == std::vector<std::string>{"step", "T", "N", "Z", "value", "accepted"});
  CHECK(trace.size() > 100);
}

TEST_CASE("sweep over failure costs") {
  const Run r = invoke({"--config", kConstant, "--engine", "direct", "sweep", "--variable", "T", "--cK", "2,4,6"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.size() == 4);
  CHECK(t[0][0] == "c_K");
  double previous = 1e300;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double T = std::strtod(column(t, i, "T").c_str(), nullptr);
    CHECK(T <= previous);
    previous = T;
  }
  CHECK(column(t, 1, "value").substr(0, 5) == "0.083");
}

TEST_CASE("simulate-dump lists every replication") {
  const fs::path dir = temp_dir("dump");
  const std::string point = write(dir / "point.json", dump_scenario(test::point_mass(1)));
  const Run r = invoke({"--config", point, "--reps", "5", "simulate-dump", "--T", "10"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.size() == 6);
  CHECK(t[0] == std::vector<std::string>{"replication", "T_R", "I_R", "shocks_seen", "final_damage"});
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(t[i][1] == "3");
    CHECK(t[i][2] == "0");
    CHECK(t[i][3] == "3");
  }
}
