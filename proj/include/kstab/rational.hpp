#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace kstab {

/// Exact rational scalar used throughout the intersection-theory layer.
using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

/// Input that fails schema or precondition checks (CLI exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure: non-convergence, non-big class at a probe point (exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exact identity that must hold by theory failed; indicates a bug (exit code 4).
struct IdentityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

/// Doubles are dyadic, so this conversion is exact.
inline Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw NumericError("cannot convert non-finite double to rational");
  Rat r;
  int exp = 0;
  double m = std::frexp(x, &exp);
  // m * 2^exp with m = k/2^53 for integer k
  Int k(static_cast<long long>(std::ldexp(m, 53)));
  exp -= 53;
  r = k;
  if (exp >= 0) {
    r *= pow(Int(2), exp);
  } else {
    r /= pow(Int(2), -exp);
  }
  return r;
}

/// Parses "p/q" or "p" (q > 0 after normalization).
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int p(s.substr(0, slash));
    Int q(s.substr(slash + 1));
    if (q == 0) throw InputError("rational with zero denominator: " + s);
    return Rat(p, q);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed rational: '" + s + "'");
  }
}

/// Serializes as "p/q" with q > 0 and gcd(p,q) = 1, or "p" when integral.
inline std::string format_rat(const Rat& r) {
  Int p = numerator(r), q = denominator(r);
  if (q == 1) return p.str();
  return p.str() + "/" + q.str();
}

using RatVec = std::vector<Rat>;

inline Rat dot(const RatVec& a, const RatVec& b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in dot product");
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace kstab
