#include "slowfast/scenario.hpp"
#include "slowfast/selfcheck.hpp"
#include "slowfast/types.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"slowfast: two-time scale contraction analysis and bound verification"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  double slack_pct = -1.0;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "run a scenario file or built-in preset");
  run->add_option("scenario", scenario_path, "scenario file path or preset name")->required();
  run->add_option("--out", out_dir, "output directory (default: $SLOWFAST_OUT_DIR or slowfast-out)");
  run->add_option("--slack", slack_pct, "verification slack in percent, overrides the file value");
  run->add_option("--seed", seed, "seed for randomized scenario kinds");

  auto* list = app.add_subcommand("list-presets", "list built-in scenario and field presets");

  std::uint64_t check_seed = 20240801;
  auto* self = app.add_subcommand("selfcheck", "run the full invariant suite");
  self->add_option("--seed", check_seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      slowfast::scenario::RunOptions opt;
      opt.out_dir = out_dir;
      if (slack_pct >= 0.0) opt.slack_override = slack_pct / 100.0;
      opt.seed = seed;
      auto outcome = slowfast::scenario::run_file(scenario_path, opt);
      const auto& rep = outcome.report;
      std::printf("scenario %s: %s\n", rep.at("scenario").get<std::string>().c_str(),
                  outcome.exit_code == 0 ? "all verifications passed"
                                         : (outcome.exit_code == 1 ? "verification FAILED"
                                                                   : "numerical failure"));
      if (rep.contains("runs"))
        for (const auto& r : rep.at("runs"))
          for (const auto& c : r.at("checks"))
            std::printf("  [%s] %s\n", c.at("pass").get<bool>() ? "pass" : "FAIL",
                        c.at("name").get<std::string>().c_str());
      return outcome.exit_code;
    }
    if (list->parsed()) {
      std::fputs(slowfast::scenario::list_presets().c_str(), stdout);
      return 0;
    }
    if (self->parsed()) {
      auto results = slowfast::selfcheck::run_all(check_seed);
      bool all = true;
      for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.pass ? "pass" : "FAIL", r.name.c_str(), r.detail.c_str());
        all = all && r.pass;
      }
      std::printf("selfcheck: %s\n", all ? "all checks passed" : "FAILURES present");
      return all ? 0 : 1;
    }
  } catch (const slowfast::scenario::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const slowfast::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
