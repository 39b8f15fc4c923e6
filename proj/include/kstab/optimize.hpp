#pragma once

#include "kstab/rational.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace kstab {

struct OptConfig {
  double tol = 1e-7;
  int max_iters = 200;
};

struct OptResult {
  std::vector<double> argmax;
  double value = 0;
  bool converged = false;
};

namespace detail {

/// Golden-section maximization of a concave 1-d function; bracket found by
/// geometric expansion around x0.
inline double golden_max(const std::function<double(double)>& f, double x0, double tol,
                         double* best_val) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double step = 1.0;
  double lo = x0 - step, hi = x0 + step;
  double f0 = f(x0);
  // expand until the interior beats both endpoints (concavity makes this a bracket)
  for (int k = 0; k < 80; ++k) {
    double flo = f(lo), fhi = f(hi);
    if (f0 >= flo && f0 >= fhi) break;
    if (flo > f0) { x0 = lo; f0 = flo; }
    if (fhi > f0) { x0 = hi; f0 = fhi; }
    step *= 2.0;
    lo = x0 - step;
    hi = x0 + step;
  }
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  double x = (a + b) / 2.0;
  if (best_val) *best_val = f(x);
  return x;
}

}  // namespace detail

/// Derivative-free coordinate ascent with golden-section line searches.
/// Coordinate `fixed` is pinned (quotienting out a known flat direction);
/// pass SIZE_MAX to optimize all coordinates.
inline OptResult coordinate_ascent(const std::function<double(const std::vector<double>&)>& obj,
                                   std::vector<double> t, std::size_t fixed,
                                   const OptConfig& cfg) {
  OptResult res;
  double val = obj(t);
  const double line_tol = std::min(cfg.tol, 1e-9) * 1e-1;
  for (int it = 0; it < cfg.max_iters; ++it) {
    double improved = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == fixed) continue;
      auto line = [&](double x) {
        std::vector<double> s = t;
        s[i] = x;
        return obj(s);
      };
      double best = val;
      double x = detail::golden_max(line, t[i], line_tol, &best);
      if (best > val) {
        improved += best - val;
        t[i] = x;
        val = best;
      }
    }
    if (improved < cfg.tol * 1e-3) {
      res.converged = true;
      break;
    }
  }
  res.argmax = std::move(t);
  res.value = val;
  return res;
}

}  // namespace kstab
