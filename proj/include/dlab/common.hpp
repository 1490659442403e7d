#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace dlab {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using IVec3 = std::array<Int, 3>;

enum class Module {
  config = 2,
  resonance = 10,
  fourier = 11,
  normalform = 12,
  admissibility = 13,
  symplectic = 14,
  dynamics = 15,
  melnikov = 16,
  action = 17,
  weakkam = 18,
};

class Error : public std::runtime_error {
 public:
  Error(Module m, const std::string& what) : std::runtime_error(what), module_(m) {}
  Module module() const { return module_; }
  int exit_code() const { return static_cast<int>(module_); }

 private:
  Module module_;
};

// One line of a report: lhs compared against rhs.
struct Check {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  double slack = 0;
  bool pass = false;
  std::string note;
};

struct Report {
  std::string title;
  std::vector<Check> checks;

  // lhs <= rhs
  Check& le(const std::string& name, double lhs, double rhs, const std::string& note = {});
  // lhs < rhs
  Check& lt(const std::string& name, double lhs, double rhs, const std::string& note = {});
  Check& flag(const std::string& name, bool ok, double value = 0, const std::string& note = {});
  void merge(const Report& other, const std::string& prefix = {});

  bool pass() const;
  const Check* find(const std::string& name) const;
  const Check* first_failure() const;
  std::string text() const;
};

Rat pow_rat(const Rat& base, int e);
Int ipow(const Int& base, unsigned e);
double to_double(const Rat& r);
std::string rat_str(const Rat& r);

// Evaluates +,-,*,/,^, parentheses, sqrt(), pi and decimal literals with
// 50 significant digits and returns the result as an exact rational.
Rat parse_real_expr(const std::string& expr);
// Integer part of a fixed-notation decimal string.
Int dec_to_int(const std::string& fixed);

}  // namespace dlab
