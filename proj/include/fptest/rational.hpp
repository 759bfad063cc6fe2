#ifndef FPTEST_RATIONAL_HPP
#define FPTEST_RATIONAL_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace fptest {

/// Exact rational number used for all set-calculus endpoints and thresholds
/// that must be compared without floating rounding. Finite doubles convert
/// exactly (every finite double is a dyadic rational).
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat rat_of_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
  return Rat(x);  // exact per GMP semantics
}

/// Parses "n", "n/d", or a plain decimal like "0.25" (taken exactly).
inline Rat rat_parse(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rat r(s);
    r.canonicalize();
    if (r.get_den() == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return r;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    Rat r(s);
    r.canonicalize();
    return r;
  }
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  size_t frac_len = s.size() - dot - 1;
  Rat num(digits);
  Rat den(1);
  for (size_t i = 0; i < frac_len; ++i) den *= 10;
  Rat r = num / den;
  r.canonicalize();
  return r;
}

inline double rat_to_double(const Rat& r) { return r.get_d(); }

inline std::string rat_str(const Rat& r) { return r.get_str(); }

/// Exact comparison of a double against a rational; <0, 0, >0 like strcmp.
inline int cmp_double_rat(double x, const Rat& q) {
  return cmp(rat_of_double(x), q);
}

}  // namespace fptest

#endif  // FPTEST_RATIONAL_HPP
