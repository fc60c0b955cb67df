#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ttrack/csv.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "ttrack_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path dir = work_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(TTRACK_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

std::string scenario(const char* name) {
  return std::string(TTRACK_SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("tune prints the gain table", "[cli]") {
  const CliResult res = run_cli("tune --ts 1.0");
  CHECK(res.exit_code == 0);
  CHECK_THAT(res.out, ContainsSubstring("5.8339"));
  CHECK_THAT(res.out, ContainsSubstring("34.03"));
}

TEST_CASE("tune rejects nonpositive settling times", "[cli]") {
  const CliResult res = run_cli("tune --ts -1");
  CHECK(res.exit_code == 1);
  CHECK_FALSE(res.err.empty());
}

TEST_CASE("tune --json keeps the frequency law", "[cli]") {
  const CliResult res = run_cli("tune --ts 0.5 --ts 2.0 --json");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  REQUIRE(j["rows"].size() == 2);
  const double w_fast = j["rows"][0]["omega0"].get<double>();
  const double w_slow = j["rows"][1]["omega0"].get<double>();
  CHECK(w_fast == 4.0 * w_slow);  // ts ratio 4, exactly
}

TEST_CASE("simulate runs the bundled step scenario", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "step.csv";
  const CliResult res =
      run_cli("simulate --config " + scenario("pendulum_step.json") +
              " --out " + csv.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(csv));

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == ttrack::trace_csv_header(1));

  const json summary = json::parse(res.out);
  REQUIRE(summary["joints"][0]["settled"].get<bool>());
  const double ts = summary["joints"][0]["settling_time"].get<double>();
  CHECK(std::abs(ts - 0.5) <= 0.03 * 0.5);
}

TEST_CASE("simulate writes an svg when asked", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "plot_run.csv";
  const fs::path svg = dir / "plot_run.svg";
  const CliResult res =
      run_cli("simulate --config " + scenario("pendulum_quintic.json") +
              " --out " + csv.string() + " --plot " + svg.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(svg));
  CHECK_THAT(slurp(svg), ContainsSubstring("<svg"));
}

TEST_CASE("simulate rejects a broken config with exit 1", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "broken.json";
  {
    json j = json::parse(slurp(scenario("pendulum_step.json")));
    j["sim"]["h"] = 0.5;  // larger than control_period
    std::ofstream out(cfg);
    out << j.dump();
  }
  const CliResult res = run_cli("simulate --config " + cfg.string() + " --out " +
                                (dir / "x.csv").string());
  CHECK(res.exit_code == 1);
  CHECK_THAT(res.err, ContainsSubstring("control_period"));
}

TEST_CASE("an over-tight torque limit reports as not settled", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "tight.json";
  {
    json j = json::parse(slurp(scenario("pendulum_step.json")));
    j["sim"]["torque_limit"] = 0.1;
    j["sim"]["t_end"] = 1.0;
    j["sim"]["perturbations"] = json::array();
    std::ofstream out(cfg);
    out << j.dump();
  }
  const CliResult res = run_cli("simulate --config " + cfg.string() + " --out " +
                                (dir / "tight.csv").string());
  REQUIRE(res.exit_code == 0);
  const json summary = json::parse(res.out);
  CHECK_FALSE(summary["joints"][0]["settled"].get<bool>());
  CHECK(summary["joints"][0]["settling_time"].is_null());
}

TEST_CASE("a blown-up run exits 2 and still writes the partial trace",
          "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "unstable.json";
  {
    json j = json::parse(slurp(scenario("pendulum_step.json")));
    j["controller"] = {{"ts", 0.005}};  // stiff gains, far too slow a loop
    j["sim"]["h"] = 0.01;
    j["sim"]["control_period"] = 0.1;
    j["sim"]["t_end"] = 20.0;
    j["sim"]["perturbations"] = json::array();
    std::ofstream out(cfg);
    out << j.dump();
  }
  const fs::path csv = dir / "unstable.csv";
  const CliResult res =
      run_cli("simulate --config " + cfg.string() + " --out " + csv.string());
  CHECK(res.exit_code == 2);
  REQUIRE(fs::exists(csv));
  const json summary = json::parse(res.out);
  CHECK(summary["diverged"].get<bool>());
  CHECK(summary["failure_time"].get<double>() > 0.0);
  // the partial trace holds strictly fewer rows than a full run would
  std::ifstream in(csv);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines > 1);
  CHECK(lines < 2002);
}

TEST_CASE("sweep records diverged variants without aborting", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "sweep_mixed.json";
  {
    json base = json::parse(slurp(scenario("pendulum_step.json")));
    base["controller"] = {{"ts", 1.0}};
    base["sim"]["h"] = 0.01;
    base["sim"]["control_period"] = 0.01;
    base["sim"]["t_end"] = 8.0;
    base["sim"]["perturbations"] = json::array();
    base.erase("outputs");
    const json sweep = {{"base", base},
                        {"parameter", "ts"},
                        {"values", {1.0, 0.002}}};
    std::ofstream out(cfg);
    out << sweep.dump();
  }
  const fs::path out_dir = dir / "sweep_mixed_out";
  const CliResult res =
      run_cli("sweep --config " + cfg.string() + " --out " + out_dir.string());
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(slurp(out_dir / "sweep.csv"));
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  CHECK_THAT(row1, ContainsSubstring("0.002"));
  CHECK_THAT(row1, ContainsSubstring("diverged"));
  CHECK_THAT(row2, ContainsSubstring("1,ok"));
}

TEST_CASE("missing output path is a config error", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "no_out.json";
  {
    json j = json::parse(slurp(scenario("pendulum_step.json")));
    j.erase("outputs");
    std::ofstream out(cfg);
    out << j.dump();
  }
  const CliResult res = run_cli("simulate --config " + cfg.string());
  CHECK(res.exit_code == 1);
  CHECK_THAT(res.err, ContainsSubstring("--out"));
}

TEST_CASE("validate passes on the bundled models", "[cli]") {
  const CliResult res = run_cli("validate");
  CHECK(res.exit_code == 0);
  CHECK_THAT(res.out, ContainsSubstring("[PASS]"));
  CHECK(res.out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("validate rejects an invalid model at parse time", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path model = dir / "bad_model.json";
  {
    std::ofstream out(model);
    out << R"({"gravity": 9.81, "links": [{"mass": -1.0, "length": 1.0,
               "com_distance": 0.5}]})";
  }
  const CliResult res = run_cli("validate --model " + model.string());
  CHECK(res.exit_code == 1);
  CHECK_THAT(res.err, ContainsSubstring("mass"));
}

TEST_CASE("sweep emits one ordered row per variant", "[cli]") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "sweep.json";
  {
    json base = json::parse(slurp(scenario("pendulum_step.json")));
    base["sim"]["t_end"] = 3.5;
    base["sim"]["h"] = 1e-3;
    base["sim"]["perturbations"] = json::array();
    base.erase("outputs");
    const json sweep = {{"base", base},
                        {"parameter", "ts"},
                        {"values", {1.0, 0.5}}};  // deliberately unsorted
    std::ofstream out(cfg);
    out << sweep.dump();
  }
  const fs::path out_dir = dir / "sweep_out";
  const CliResult res =
      run_cli("sweep --config " + cfg.string() + " --out " + out_dir.string());
  REQUIRE(res.exit_code == 0);
  const std::string table = slurp(out_dir / "sweep.csv");
  std::istringstream lines(table);
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  CHECK_THAT(header, ContainsSubstring("ts,status"));
  CHECK_THAT(row1, ContainsSubstring("0.5,ok"));
  CHECK_THAT(row2, ContainsSubstring("1,ok"));

  const auto settle_of = [](const std::string& row) {
    std::istringstream ss(row);
    std::string field;
    std::getline(ss, field, ',');  // value
    std::getline(ss, field, ',');  // status
    std::getline(ss, field, ',');  // settling_time1
    return std::strtod(field.c_str(), nullptr);
  };
  CHECK(std::abs(settle_of(row1) - 0.5) <= 0.03 * 0.5);
  CHECK(std::abs(settle_of(row2) - 1.0) <= 0.03 * 1.0);
}
