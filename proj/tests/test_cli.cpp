#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fgb/json_io.hpp"

namespace fs = std::filesystem;
using fgb::Json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fgb_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const Json& config) {
  fs::path path = scratch_dir() / name;
  std::ofstream out(path);
  out << config.dump(2) << "\n";
  return path;
}

RunResult run_cli(const std::string& args) {
  fs::path capture = scratch_dir() / "capture.txt";
  std::string command = std::string(FGB_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string data_path(const std::string& name) {
  return std::string(FGB_TEST_DATA_DIR) + "/" + name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("identity command certifies the three closed forms") {
  // A skewed kappa and a nontrivial fiber group exercise the full config
  // surface; the identities must still hold exactly.
  Json kappa{{"a", "1/2"}, {"A", "1/6"}, {"b", "1/6"}, {"B", "1/6"}};
  auto config = write_config("identity.json", Json{{"r", 2}, {"N", 2}, {"kappa", kappa}, {"K", 2}});
  RunResult result = run_cli("identity --config " + config.string());
  CHECK(result.exit_code == 0);
  Json report = Json::parse(result.output);
  CHECK(report.at("all_match").get<bool>());
  CHECK(report.at("results").size() == 6);  // three instances, two indices
}

TEST_CASE("identity command works at rank three") {
  auto config = write_config("identity_r3.json", Json{{"r", 3}, {"N", 2}});
  RunResult result = run_cli("identity --config " + config.string());
  CHECK(result.exit_code == 0);
  CHECK(Json::parse(result.output).at("all_match").get<bool>());
}

TEST_CASE("identity command locates an injected discrepancy") {
  Json config{{"r", 2},
              {"N", 2},
              {"inject_error",
               Json{{"instance", "TAIL"}, {"index", 1}, {"word", "ab"}, {"delta", "1/1000"}}}};
  auto path = write_config("identity_bad.json", config);
  RunResult result = run_cli("identity --config " + path.string());
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("FAIL TAIL n=1") != std::string::npos);
  CHECK(result.output.find("\"word\": \"aa\"") != std::string::npos);  // first off entry
}

TEST_CASE("identity output is byte-identical across runs") {
  auto config = write_config("identity_det.json", Json{{"r", 2}, {"N", 1}});
  fs::path out1 = scratch_dir() / "id1.json";
  fs::path out2 = scratch_dir() / "id2.json";
  CHECK(run_cli("identity --config " + config.string() + " --out " + out1.string()).exit_code == 0);
  CHECK(run_cli("identity --config " + config.string() + " --out " + out2.string()).exit_code == 0);
  std::string first = slurp(out1);
  CHECK(!first.empty());
  CHECK(first == slurp(out2));
}

TEST_CASE("converge command emits the error table") {
  Json config{{"r", 2},
              {"instance", "TAIL"},
              {"N", 3},
              {"action", data_path("z101.json")},
              {"observable", Json{{"type", "indicator"}, {"point", 0}, {"subtract_mean", true}}},
              {"target", "F2"}};
  auto path = write_config("converge.json", config);
  RunResult result = run_cli("converge --config " + path.string() + " --exact");
  CHECK(result.exit_code == 0);
  CHECK(result.output.rfind("index,sup_error,l1_error\n", 0) == 0);
  CHECK(result.output.find("1,95/606,") != std::string::npos);
  CHECK(result.output.find("3,3049/49086,") != std::string::npos);
}

TEST_CASE("converge reports zero error for invariant observables") {
  Json constant{{"type", "values"},
                {"values", Json::array({"1/2", "1/2", "1/2", "1/2", "1/2", "1/2"})}};
  Json config{{"r", 2},         {"instance", "TAIL"},
              {"N", 2},         {"action", data_path("perm6.json")},
              {"observable", constant}, {"target", "F"}};
  auto path = write_config("converge_const.json", config);
  RunResult result = run_cli("converge --config " + path.string() + " --exact");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("1,0,0") != std::string::npos);
  CHECK(result.output.find("2,0,0") != std::string::npos);
}

TEST_CASE("converge exposes the parity obstruction") {
  Json z4{{"points", 4}, {"a", Json::array({1, 2, 3, 0})}, {"b", Json::array({1, 2, 3, 0})}};
  fs::path action = scratch_dir() / "z4.json";
  {
    std::ofstream out(action);
    out << z4.dump() << "\n";
  }
  Json config{{"r", 2},
              {"instance", "TAIL"},
              {"N", 3},
              {"action", action.string()},
              {"observable", Json{{"type", "indicator"}, {"point", 0}}},
              {"target", "F"}};
  auto path = write_config("converge_parity.json", config);
  RunResult result = run_cli("converge --config " + path.string() + " --exact");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("1,5/12,") != std::string::npos);
  // Every sup error stays at or above 1/4: rows are n,p/q,... with p/q >= 1/4.
  std::istringstream lines(result.output);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    auto first_comma = line.find(',');
    auto second_comma = line.find(',', first_comma + 1);
    fgb::Rational sup = fgb::rational_from_string(
        line.substr(first_comma + 1, second_comma - first_comma - 1));
    CHECK(sup >= fgb::Rational(1, 4));
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("maximal command reports ratios for a corpus and the control family") {
  Json config{{"r", 2},
              {"instance", "TAIL"},
              {"N", 2},
              {"actions", Json::array({data_path("z101.json"), data_path("z12.json"),
                                       data_path("perm6.json")})},
              {"observable", Json{{"type", "indicator"}, {"point", 0}}}};
  auto path = write_config("maximal.json", config);
  RunResult result = run_cli("maximal --config " + path.string());
  CHECK(result.exit_code == 0);
  Json report = Json::parse(result.output);
  CHECK(report.at("actions").size() == 3);
  for (const auto& entry : report.at("actions")) {
    CHECK(fgb::rational_from_string(entry.at("weak_ratio").get<std::string>()) > 0);
  }

  Json control = config;
  control["family"] = "delta_e";
  auto control_path = write_config("maximal_control.json", control);
  RunResult control_result = run_cli("maximal --config " + control_path.string());
  CHECK(control_result.exit_code == 0);
  Json control_report = Json::parse(control_result.output);
  for (const auto& entry : control_report.at("actions")) {
    CHECK(fgb::rational_from_string(entry.at("weak_ratio").get<std::string>()) <= 1);
    CHECK(fgb::rational_from_string(entry.at("l2_ratio_pow").get<std::string>()) <= 1);
  }
}

TEST_CASE("witness command finds the five powers and rejects bad targets") {
  Json config{{"r", 2},
              {"A", "a"},
              {"target_exponents", Json::array({-2, -1, 0, 1, 2})},
              {"max_word_length", 6},
              {"max_depth", 6}};
  auto path = write_config("witness.json", config);
  RunResult result = run_cli("witness --config " + path.string());
  CHECK(result.exit_code == 0);
  Json report = Json::parse(result.output);
  CHECK(report.at("all_found").get<bool>());
  CHECK(report.at("witnesses").size() == 5);
  for (const auto& entry : report.at("witnesses")) CHECK(entry.at("g").get<std::string>() != "e");

  Json bad{{"r", 2}, {"A", "a"}, {"targets", Json::array({"2"})}};
  auto bad_path = write_config("witness_bad.json", bad);
  RunResult bad_result = run_cli("witness --config " + bad_path.string());
  CHECK(bad_result.exit_code == 2);
  CHECK(bad_result.output.find("input error") != std::string::npos);
}

TEST_CASE("converge handles the other instances and densities") {
  Json psi{{"depth", 1},
           {"values", Json{{"a", "2"}, {"A", "2/3"}, {"b", "2/3"}, {"B", "2/3"}}}};
  Json config{{"r", 2},
              {"instance", "DOUBLE_BOUNDARY_SHIFT"},
              {"N", 2},
              {"action", data_path("perm6.json")},
              {"observable", Json{{"type", "indicator"}, {"point", 0}}},
              {"target", "F"}};
  auto path = write_config("converge_dbl.json", config);
  CHECK(run_cli("converge --config " + path.string()).exit_code == 0);

  config["instance"] = "TAIL";
  config["psi"] = psi;
  auto tail_path = write_config("converge_psi.json", config);
  RunResult result = run_cli("converge --config " + tail_path.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.rfind("index,sup_error,l1_error\n", 0) == 0);
}

TEST_CASE("action files carry explicit weights and reject non-preserving maps") {
  Json weighted{{"points", 3},
                {"weights", Json::array({"1/2", "1/4", "1/4"})},
                {"a", Json::array({0, 1, 2})},
                {"b", Json::array({0, 2, 1})}};
  fgb::FiniteAction act = fgb::action_from_json(weighted);
  CHECK(act.weight(0) == fgb::Rational(1, 2));

  Json broken = weighted;
  broken["b"] = Json::array({1, 0, 2});  // swaps points of different mass
  CHECK_THROWS_AS(fgb::action_from_json(broken), fgb::InputError);
}

TEST_CASE("bundled configs run from any working directory") {
  // Relative action paths resolve against the config file location.
  fs::path configs = fs::path(FGB_TEST_DATA_DIR).parent_path().parent_path() / "configs";
  for (const std::string name :
       {"identity.json", "converge_z101.json", "maximal_corpus.json", "witness_powers.json",
        "invariance_sweep.json"}) {
    std::string command = name.rfind("identity", 0) == 0    ? "identity"
                          : name.rfind("converge", 0) == 0  ? "converge"
                          : name.rfind("maximal", 0) == 0   ? "maximal"
                          : name.rfind("witness", 0) == 0   ? "witness"
                                                            : "invariance";
    RunResult result = run_cli(command + " --config " + (configs / name).string());
    INFO(name << ": " << result.output.substr(0, 200));
    CHECK(result.exit_code == 0);
  }
}

TEST_CASE("invariance command sweeps the Maharam certificate") {
  Json config{{"r", 2},
              {"max_word_length", 2},
              {"cylinder_depth", 4},
              {"t_min", -1},
              {"t_max", 1}};
  auto path = write_config("invariance.json", config);
  RunResult result = run_cli("invariance --config " + path.string());
  CHECK(result.exit_code == 0);
  Json report = Json::parse(result.output);
  CHECK(report.at("all_hold").get<bool>());
  CHECK(report.at("failures").get<long>() == 0);
  CHECK(report.at("checks").get<long>() > 0);
}
