#include <cstdio>
#include <functional>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace dlab;
  CLI::App app{"diffusion-lab experiment driver"};
  std::string scenario_path;
  bool explain = false;
  cli::RunOptions opt;
  app.add_option("--scenario", scenario_path, "scenario INI file (built-in defaults when omitted)");
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "override the scenario seed");
  app.add_option("--grid", opt.grid, "override the weak KAM grid")->check(CLI::Range(8, 4096));
  app.add_option("--dt", opt.dt, "override the integrator step")->check(CLI::PositiveNumber);
  app.add_flag("--explain", explain, "print every scenario key with its default and constraint, then exit");

  const std::map<std::string, std::function<Report(const Scenario&, const cli::RunOptions&)>> commands{
      {"plan", cli::run_plan},           {"normalform", cli::run_normalform}, {"conditions", cli::run_conditions},
      {"homoclinic", cli::run_homoclinic}, {"period", cli::run_period},     {"melnikov", cli::run_melnikov},
      {"actions", cli::run_actions},     {"weakkam", cli::run_weakkam},     {"annulus", cli::run_annulus},
      {"all", cli::run_all}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, "run " + name)->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : int(Module::config);
  }
  if (explain) {
    std::fputs(explain_scenario().c_str(), stdout);
    return 0;
  }
  auto subs = app.get_subcommands();
  if (subs.empty()) {
    std::fputs("a subcommand is required; see --help\n", stderr);
    return int(Module::config);
  }
  try {
    Scenario s = scenario_path.empty() ? Scenario{} : load_scenario(scenario_path);
    s = cli::with_overrides(s, opt);
    commands.at(subs[0]->get_name())(s, opt);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
