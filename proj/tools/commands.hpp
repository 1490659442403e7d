#pragma once

#include <optional>
#include <string>

#include "dlab/scenario.hpp"

namespace dlab::cli {

struct RunOptions {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> dt;
};

// Each command writes its CSVs and <command>_report.txt under out and returns the report.
// Gate failures (plan properties, admissibility) throw with the module's exit code; the
// remaining checks are measurements and only show up in the report.
Report run_plan(const Scenario& s, const RunOptions& o);
Report run_normalform(const Scenario& s, const RunOptions& o);
Report run_conditions(const Scenario& s, const RunOptions& o);
Report run_homoclinic(const Scenario& s, const RunOptions& o);
Report run_period(const Scenario& s, const RunOptions& o);
Report run_melnikov(const Scenario& s, const RunOptions& o);
Report run_actions(const Scenario& s, const RunOptions& o);
Report run_weakkam(const Scenario& s, const RunOptions& o);
Report run_annulus(const Scenario& s, const RunOptions& o);
Report run_all(const Scenario& s, const RunOptions& o);

// options applied on top of the scenario
Scenario with_overrides(Scenario s, const RunOptions& o);

}  // namespace dlab::cli
