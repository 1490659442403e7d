#include "dlab/common.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace dlab {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Check& Report::le(const std::string& name, double lhs, double rhs, const std::string& note) {
  checks.push_back({name, lhs, rhs, rhs - lhs, lhs <= rhs, note});
  return checks.back();
}

Check& Report::lt(const std::string& name, double lhs, double rhs, const std::string& note) {
  checks.push_back({name, lhs, rhs, rhs - lhs, lhs < rhs, note});
  return checks.back();
}

Check& Report::flag(const std::string& name, bool ok, double value, const std::string& note) {
  checks.push_back({name, value, value, 0.0, ok, note});
  return checks.back();
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(c);
  }
}

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

const Check* Report::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

std::string Report::text() const {
  std::ostringstream os;
  if (!title.empty()) os << "# " << title << "\n";
  os << "# name\tlhs\trhs\tslack\tpass\n";
  for (const auto& c : checks) {
    os << c.name << '\t' << fmt17(c.lhs) << '\t' << fmt17(c.rhs) << '\t' << fmt17(c.slack) << '\t'
       << (c.pass ? "pass" : "fail");
    if (!c.note.empty()) os << "\t# " << c.note;
    os << '\n';
  }
  return os.str();
}

Int ipow(const Int& base, unsigned e) {
  Int r = 1, b = base;
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

Rat pow_rat(const Rat& base, int e) {
  if (e >= 0) return Rat(ipow(numerator(base), e), ipow(denominator(base), e));
  return Rat(ipow(denominator(base), -e), ipow(numerator(base), -e));
}

double to_double(const Rat& r) { return r.convert_to<double>(); }

std::string rat_str(const Rat& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

namespace {

using Dec = boost::multiprecision::cpp_dec_float_50;

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  Dec parse() {
    Dec v = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return v;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) {
    throw Error(Module::config, "cannot parse '" + s_ + "': " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Dec expr() {
    Dec v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  Dec term() {
    Dec v = power();
    for (;;) {
      if (eat('*')) v *= power();
      else if (eat('/')) {
        Dec d = power();
        if (d == 0) fail("division by zero");
        v /= d;
      } else return v;
    }
  }
  Dec power() {
    Dec b = unary();
    if (eat('^')) return boost::multiprecision::pow(b, power());
    return b;
  }
  Dec unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }
  Dec atom() {
    skip();
    if (eat('(')) {
      Dec v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      size_t b = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string id = s_.substr(b, pos_ - b);
      if (id == "pi") return boost::math::constants::pi<Dec>();
      if (id == "sqrt") {
        if (!eat('(')) fail("sqrt needs '('");
        Dec v = expr();
        if (!eat(')')) fail("missing ')'");
        if (v < 0) fail("sqrt of negative");
        return boost::multiprecision::sqrt(v);
      }
      fail("unknown identifier " + id);
    }
    size_t b = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
            s_[pos_] == 'E' ||
            ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > b && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    if (b == pos_) fail("expected a number");
    return Dec(s_.substr(b, pos_ - b));
  }
};

}  // namespace

Rat parse_real_expr(const std::string& expr) {
  Dec v = ExprParser(expr).parse();
  const Int scale = ipow(Int(10), 45);
  Dec scaled = v * Dec(scale.str());
  Dec rounded = boost::multiprecision::round(scaled);
  return Rat(dec_to_int(rounded.str(0, std::ios_base::fixed)), scale);
}

Int dec_to_int(const std::string& fixed) {
  std::string digits = fixed.substr(0, fixed.find('.'));
  if (digits.empty() || digits == "-") return Int(0);
  return Int(digits);
}

}  // namespace dlab
