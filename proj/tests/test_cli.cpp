#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "dlab/scenario.hpp"

using namespace dlab;
namespace fs = std::filesystem;

namespace {

const std::string cli = DLAB_CLI_PATH;
const std::string scenarios = DLAB_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// exit status of the CLI; stderr goes to err_file
int run(const std::string& args, const fs::path& err_file, const std::string& out_file = "/dev/null") {
  std::string cmd = cli + " " + args + " > " + out_file + " 2> " + err_file.string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// a scenario holding only `text`; every other key keeps its default
fs::path with_lines(const fs::path& dir, const std::string& text) {
  auto p = dir / "scenario.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("plan on the default scenario") {
  auto dir = scratch("plan");
  CHECK(run("plan --scenario " + scenarios + "/default.cfg --out " + dir.string(), dir / "err") == 0);
  std::istringstream csv(slurp(dir / "plan.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);
  auto rep = slurp(dir / "plan_report.txt");
  CHECK(rep.find("\tfail") == std::string::npos);
}

TEST_CASE("same seed, same bytes") {
  auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  for (const auto& d : {a, b}) REQUIRE(run("actions --seed 7 --out " + d.string(), d / "err") == 0);
  REQUIRE(run("actions --seed 8 --out " + c.string(), c / "err") == 0);
  auto x = slurp(a / "actions.csv");
  CHECK(x.size() > 1000);
  CHECK(x == slurp(b / "actions.csv"));
  CHECK(x != slurp(c / "actions.csv"));
  CHECK(x.rfind("lambda1,lambda2,T,x1,x2,through,broken,difference\n", 0) == 0);
}

TEST_CASE("exit codes") {
  auto dir = scratch("codes");
  auto err = dir / "err";
  CHECK(run("bogus", err) != 0);
  CHECK(run("", err) == 2);
  CHECK(run("plan --scenario " + (dir / "missing.cfg").string(), err) == 2);
  CHECK(run("plan --scenario " + with_lines(dir, "[plan]\nwhat = 1\n").string() + " --out " + dir.string(), err) == 2);
  CHECK(slurp(err).find("unknown key plan.what") != std::string::npos);

  // xi <= 8/(r-6): admissibility code, inequality named
  auto bad_xi = dir / "xi.cfg";
  {
    auto text = slurp(scenarios + "/default.cfg");
    auto at = text.find("xi = 4.5");
    REQUIRE(at != std::string::npos);
    text.replace(at, 8, "xi = 3.5");
    std::ofstream(bad_xi) << text;
  }
  CHECK(run("normalform --scenario " + bad_xi.string() + " --out " + dir.string(), err) == 13);
  CHECK(slurp(err).find("xi > 8/(r-6)") != std::string::npos);
  CHECK(run("conditions --scenario " + bad_xi.string() + " --out " + dir.string(), err) == 13);

  // a module error carries the module's code: a constant Z3 has no isolated critical point
  auto flat = dir / "flat.cfg";
  {
    auto text = slurp(scenarios + "/default.cfg");
    auto at = text.find("z3 = ");
    auto end = text.find('\n', at);
    text.replace(at, end - at, "z3 = 0 0 0 2 0");
    std::ofstream(flat) << text;
  }
  CHECK(run("melnikov --scenario " + flat.string() + " --out " + dir.string(), err) == 16);
  CHECK(run("plan --grid 2", err) == 2);
}

TEST_CASE("explain lists every key once and loads back") {
  auto dir = scratch("explain");
  REQUIRE(run("--explain", dir / "err", (dir / "explain.cfg").string()) == 0);
  auto text = slurp(dir / "explain.cfg");
  CHECK(text.find("; xi > 8 / (r - 6)\nxi = 4.5") != std::string::npos);
  CHECK(text.find("; sigma > 3 r + 4 xi + 15") != std::string::npos);
  // one definition per key inside a section
  std::istringstream is(text);
  std::string line, section;
  std::set<std::string> seen;
  int keys = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == ';') continue;
    if (line[0] == '[') {
      section = line;
      continue;
    }
    auto key = section + line.substr(0, line.find(" = "));
    CHECK_MESSAGE(seen.insert(key).second, key);
    ++keys;
  }
  CHECK(keys > 60);
  auto s = load_scenario((dir / "explain.cfg").string());
  Scenario d;
  CHECK(s.sigma == d.sigma);
  CHECK(modes_str(s.z3) == modes_str(d.z3));
  CHECK(s.an_deltas == d.an_deltas);
}

TEST_CASE("scenario parsing") {
  auto z = parse_modes("1 -1 0 0.5 0; 0 1 2 0 1;");
  REQUIRE(z.modes.size() == 2);
  CHECK(z.modes[1].k3 == 2);
  CHECK(z.modes[1].b == 1);
  CHECK(parse_modes(modes_str(z)).modes.size() == 2);
  CHECK_THROWS_AS(parse_modes("1 2 3"), Error);
  CHECK_THROWS_AS(parse_modes("1 2 3 4 5 6"), Error);

  auto dir = scratch("parse");
  CHECK_THROWS_AS(load_scenario(with_lines(dir, "[dynamics]\ndt = fast\n").string()), Error);
  try {
    load_scenario(with_lines(dir, "[potential]\nd = 1.5\n").string());
    FAIL("accepted d = 1.5");
  } catch (const Error& e) {
    CHECK(e.exit_code() == 2);
  }
  auto weak = load_scenario(scenarios + "/weak_coupled.cfg");
  CHECK(weak.eps == 0.5);
  CHECK(weak.system().eps == 0.5);
  CHECK(weak.lagrangian().dim == 2);
}
