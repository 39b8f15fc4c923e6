#pragma once

#include "kstab/rational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace kstab {

struct QuadConfig {
  double tol = 1e-9;
  int max_depth = 40;
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa, double m,
                      double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth,
                    int max_depth) {
  double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, lm, flm, m, fm);
  double right = simpson(f, m, fm, rm, frm, b, fb);
  double delta = left + right - whole;
  if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1, max_depth) +
         adapt(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1, max_depth);
}

}  // namespace detail

/// Adaptive Simpson on [a,b]; exact on panel-wise quadratics.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               const QuadConfig& cfg) {
  if (b <= a) return 0.0;
  double m = (a + b) / 2.0;
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = detail::simpson(f, a, fa, m, fm, b, fb);
  return detail::adapt(f, a, fa, b, fb, m, fm, whole, cfg.tol, 0, cfg.max_depth);
}

/// Integrates f over [a,b] splitting at the given interior breakpoints.
inline double integrate_with_breakpoints(const std::function<double(double)>& f, double a,
                                         double b, std::vector<double> breaks,
                                         const QuadConfig& cfg) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double lo = std::max(a, breaks[i]);
    double hi = std::min(b, breaks[i + 1]);
    if (hi > lo) total += adaptive_simpson(f, lo, hi, cfg);
  }
  return total;
}

/// First x in [lo, hi] with pred(x) true, assuming pred is monotone
/// (false then true); hi is expanded geometrically until pred(hi) holds.
inline double bisect_first_true(const std::function<bool(double)>& pred, double lo, double hi,
                                double tol) {
  int guard = 0;
  double w = std::max(hi - lo, 1.0);
  while (!pred(hi)) {
    lo = hi;
    w *= 2.0;
    hi = lo + w;
    if (++guard > 200) throw NumericError("bisection: predicate never became true");
  }
  while (hi - lo > tol) {
    double mid = (lo + hi) / 2.0;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace kstab
