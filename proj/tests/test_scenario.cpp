#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/scenario.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace slowfast;
namespace sc = slowfast::scenario;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("slowfast-test-" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int csv_column_count(const std::filesystem::path& file, std::size_t* rows = nullptr) {
  std::ifstream in(file);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  int cols = 1;
  for (char ch : header)
    if (ch == ',') ++cols;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int c = 1;
    for (char ch : line)
      if (ch == ',') ++c;
    CHECK(c == cols);
    ++n;
  }
  if (rows) *rows = n;
  return cols;
}

}  // namespace

TEST_CASE("preset listing is stable and complete") {
  std::string a = sc::list_presets();
  std::string b = sc::list_presets();
  CHECK(a == b);
  CHECK(a.find("ofo-scalar-sine") != std::string::npos);
  CHECK(a.find("lti-unstable-A") != std::string::npos);
  CHECK(a.find("tanh-coupled") != std::string::npos);
}

TEST_CASE("validation failures carry field diagnostics") {
  sc::RunOptions opt;
  opt.out_dir = temp_dir("validate").string();

  // empty epsilon list
  auto j = sc::Json::parse(sc::builtin_scenarios().at("lti-unstable-A"));
  j["epsilons"] = sc::Json::array();
  try {
    sc::run_json(j, opt);
    FAIL("expected a validation error");
  } catch (const sc::ValidationError& e) {
    CHECK(std::string(e.what()).find("epsilons") != std::string::npos);
  }

  // missing schema version
  auto k = sc::Json::parse(sc::builtin_scenarios().at("lti-unstable-A"));
  k.erase("schema_version");
  CHECK_THROWS_AS(sc::run_json(k, opt), sc::ValidationError);

  // unknown kinds and unknown files
  auto u = sc::Json::parse(sc::builtin_scenarios().at("lti-unstable-A"));
  u["kind"] = "unheard-of";
  CHECK_THROWS_AS(sc::run_json(u, opt), sc::ValidationError);
  CHECK_THROWS_AS(sc::run_file("no-such-file-or-preset", opt), sc::ValidationError);
}

TEST_CASE("lti desk scenario reproduces the hand-computed report values") {
  sc::RunOptions opt;
  auto dir = temp_dir("lti");
  opt.out_dir = dir.string();
  sc::Outcome out = sc::run_file("lti-unstable-A", opt);
  CHECK(out.exit_code == 0);
  CHECK(out.report.at("pass").get<bool>());
  CHECK(out.report.at("thresholds").at("epsilon_star_lti").at("value").get<double>() ==
        doctest::Approx(1.0 / 6.0));
  CHECK(out.report.at("thresholds").at("epsilon_star_0_lti").at("value").get<double>() ==
        doctest::Approx(1.0 / 3.0));
  CHECK(out.report.at("runs")[0].at("contraction_rate").at("value").get<double>() ==
        doctest::Approx(1.0));
  sc::validate_report(out.report);

  // artifacts exist and parse with a consistent column count
  std::size_t rows = 0;
  CHECK(csv_column_count(dir / "trajectories.csv", &rows) == 8);  // t,x,z,x_r,z_star,y,xe,ze
  CHECK(rows >= 100);
  CHECK(csv_column_count(dir / "envelopes.csv") == 5);
  CHECK(std::filesystem::exists(dir / "report.json"));
}

TEST_CASE("report json round-trips through its schema check") {
  sc::RunOptions opt;
  opt.out_dir = temp_dir("roundtrip").string();
  sc::Outcome out = sc::run_file("lti-unstable-A", opt);
  std::ifstream in(std::filesystem::path(opt.out_dir) / "report.json");
  sc::Json reparsed = sc::Json::parse(in);
  CHECK_NOTHROW(sc::validate_report(reparsed));
  CHECK(reparsed == out.report);
}

TEST_CASE("general tanh scenario passes its envelope checks") {
  sc::RunOptions opt;
  auto dir = temp_dir("general");
  opt.out_dir = dir.string();
  sc::Outcome out = sc::run_file("general-tanh-desk", opt);
  CHECK(out.exit_code == 0);
  bool found_limsup = false;
  for (const auto& c : out.report.at("runs")[0].at("checks"))
    if (c.at("name") == "y_limsup_tail") found_limsup = true;
  CHECK(found_limsup);
  CHECK(csv_column_count(dir / "trajectories.csv") == 12);  // t + 2+2+2+2 states + 3 norms
}

TEST_CASE("gain lemma scenario reports zero false certifications") {
  sc::RunOptions opt;
  auto dir = temp_dir("gain");
  opt.out_dir = dir.string();
  auto j = sc::Json::parse(sc::builtin_scenarios().at("gain-lemma-sweep"));
  j["draws"] = 2000;
  sc::Outcome out = sc::run_json(j, opt);
  CHECK(out.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "trajectories.csv"));
}

TEST_CASE("cli exit codes") {
  namespace fs = std::filesystem;
  const std::string cli = SLOWFAST_CLI_PATH;
  auto run_cli = [&](const std::string& args) {
    const int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };

  auto dir = temp_dir("cli");
  CHECK(run_cli("run lti-unstable-A --out " + (dir / "ok").string()) == 0);
  CHECK(run_cli("run no-such-scenario --out " + (dir / "missing").string()) == 2);

  // malformed file: empty epsilon list
  auto bad = dir / "bad.json";
  {
    auto j = sc::Json::parse(sc::builtin_scenarios().at("lti-unstable-A"));
    j["epsilons"] = sc::Json::array();
    std::ofstream(bad) << j.dump();
  }
  CHECK(run_cli("run " + bad.string() + " --out " + (dir / "bad").string()) == 2);
  CHECK(run_cli("list-presets") == 0);
}

TEST_CASE("decoupled lti scenario reports unbounded thresholds") {
  sc::RunOptions opt;
  opt.out_dir = temp_dir("unbounded").string();
  auto j = sc::Json::parse(sc::builtin_scenarios().at("lti-unstable-A"));
  j["name"] = "lti-decoupled";
  j["A"] = sc::Json::array({sc::Json::array({-1.0})});
  j["C"] = sc::Json::array({sc::Json::array({0.0})});
  sc::Outcome out = sc::run_json(j, opt);
  CHECK(out.exit_code == 0);
  CHECK(out.report.at("thresholds").at("epsilon_star_0_lti").at("value") == "unbounded");
  CHECK_NOTHROW(sc::validate_report(out.report));
}

TEST_CASE("shipped scenario files match the built-in presets") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(SLOWFAST_SCENARIO_DIR);
  for (const char* name : {"ofo-scalar-sine", "lti-unstable-A", "general-tanh-desk",
                           "autonomous-tanh-desk"}) {
    std::ifstream in(dir / (std::string(name) + ".json"));
    REQUIRE(in.good());
    auto from_file = sc::Json::parse(in);
    auto builtin = sc::Json::parse(sc::builtin_scenarios().at(name));
    CHECK(from_file == builtin);
  }
}

TEST_CASE("slack override is honored") {
  sc::RunOptions opt;
  opt.out_dir = temp_dir("slack").string();
  opt.slack_override = 0.25;
  sc::Outcome out = sc::run_file("lti-unstable-A", opt);
  CHECK(out.report.at("slack").at("value").get<double>() == doctest::Approx(0.25));
}
