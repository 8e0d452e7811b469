#pragma once

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synergy/core.hpp"

namespace syn {

struct BoundRow {
  Rational alpha, lower, upper;
};

// OR bounds on the grid 0, step, 2*step, ... <= 1 plus the breakpoints 1/2, 10/19, 6/11, 3/5.
inline std::vector<BoundRow> bound_table(Rational step) {
  if (step <= 0) throw std::invalid_argument("grid step must be positive");
  std::vector<Rational> as;
  for (Rational a = 0; a <= 1; a += step) as.push_back(a);
  if (as.back() != 1) as.push_back(1);
  for (Rational b : {Rational(1, 2), Rational(10, 19), Rational(6, 11), Rational(3, 5)}) as.push_back(b);
  std::sort(as.begin(), as.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());
  std::vector<BoundRow> rows;
  rows.reserve(as.size());
  for (auto a : as) rows.push_back({a, l_or_exact(a), u_or_exact(a)});
  return rows;
}

inline void write_bound_table(std::ostream& os, const std::vector<BoundRow>& rows) {
  os << "alpha,l_or,u_or\n";
  os << std::setprecision(10);
  for (auto& r : rows) os << to_double(r.alpha) << ',' << to_double(r.lower) << ',' << to_double(r.upper) << '\n';
}

// "0.55", "-2", "1/3" -> exact rational.
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    size_t p1 = 0, p2 = 0;
    long long a = std::stoll(s.substr(0, slash), &p1), b = std::stoll(s.substr(slash + 1), &p2);
    if (p1 != slash || p2 != s.size() - slash - 1 || b == 0) throw std::invalid_argument("bad number: " + s);
    return Rational(a, b);
  }
  size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  long long num = 0, den = 1;
  bool dot = false, digits = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.' && !dot) {
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("bad number: " + s);
    digits = true;
    if (num > 100000000000000LL) throw std::invalid_argument("number too long: " + s);
    num = num * 10 + (c - '0');
    if (dot) den *= 10;
  }
  if (!digits) throw std::invalid_argument("bad number: " + s);
  return Rational(neg ? -num : num, den);
}

}  // namespace syn
