#pragma once

#include "kstab/invariants.hpp"
#include "kstab/lattice.hpp"
#include "kstab/model.hpp"
#include "kstab/optimize.hpp"
#include "kstab/plfun.hpp"
#include "kstab/quadrature.hpp"
#include "kstab/rational.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace kstab {

/// Closed-form backend for dim X = 1: classes are degrees, prime divisors are
/// points of degree 1.
struct CurveOracle {
  long genus = 0;
  Rat V = 1;

  Rat twisted_degree(const Rat& s_K) const { return V + s_K * Rat(2 * genus - 2); }
};

/// Exact-lattice backend for dim X = 2.
struct SurfaceOracle {
  IntersectionLattice lattice;
  DivClass alpha;   // pullback of alpha to the model carrying the F_i
  DivClass k_class; // pullback of K_X
  std::vector<DivClass> f_classes;
};

/// vol <(mu*(alpha + s_K K_X) - sum s_i F_i)^n> for s_i >= 0.
class VolumeOracle {
 public:
  explicit VolumeOracle(CurveOracle c) : backend_(std::move(c)) {}
  explicit VolumeOracle(SurfaceOracle s) : backend_(std::move(s)) {
    const auto& so = std::get<SurfaceOracle>(backend_);
    if (so.lattice.volume(so.alpha) <= 0) throw InputError("alpha is not big on the surface oracle");
  }

  long dimension() const { return std::holds_alternative<CurveOracle>(backend_) ? 1 : 2; }
  bool is_curve() const { return dimension() == 1; }
  const CurveOracle& curve() const { return std::get<CurveOracle>(backend_); }

  std::size_t num_divisors(std::size_t fallback) const {
    if (auto* s = std::get_if<SurfaceOracle>(&backend_)) return s->f_classes.size();
    return fallback;
  }

  /// Exact evaluation; s sized by the number of distinct divisors.
  Rat vol(const RatVec& s, const Rat& s_K) const {
    if (auto* c = std::get_if<CurveOracle>(&backend_)) {
      Rat d = c->twisted_degree(s_K);
      for (const auto& si : s) d -= si;
      return d > 0 ? d : Rat(0);
    }
    const auto& so = std::get<SurfaceOracle>(backend_);
    if (s.size() != so.f_classes.size()) throw InputError("oracle s-vector length mismatch");
    DivClass cls = so.alpha + s_K * so.k_class;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0) throw InputError("oracle requires s_i >= 0");
      cls = cls - s[i] * so.f_classes[i];
    }
    return so.lattice.volume(cls);
  }

  double vol_d(const std::vector<double>& s, double s_K) const {
    RatVec rs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) rs[i] = rat_from_double(s[i]);
    return to_double(vol(rs, rat_from_double(s_K)));
  }

 private:
  std::variant<CurveOracle, SurfaceOracle> backend_;
};

/// One prime divisor F over X: log discrepancy and the scaling r of the
/// valuation r * ord_F carried by the measure atom.
struct BetaValuation {
  std::string label;   // names the divisor; atoms sharing a label share the divisor
  Rat a_x = 1;         // A_X(F)
  Rat r = 1;           // scaling, > 0
};

struct BetaProblem {
  VolumeOracle oracle;
  std::vector<BetaValuation> valuations;
  RatVec xi;                         // masses on the valuations
  std::optional<Rat> xi_trivial;     // mass at the trivial valuation, if any
  QuadConfig quad;
  OptConfig opt;
  Rat grad_step = Rat(1, 64);

  void validate() const {
    if (valuations.size() != xi.size()) throw InputError("xi length does not match valuations");
    Rat total = xi_trivial.value_or(Rat(0));
    for (const auto& x : xi) {
      if (x < 0) throw InputError("xi must be non-negative");
      total += x;
    }
    if (xi_trivial && *xi_trivial < 0) throw InputError("xi must be non-negative");
    if (total != 1) throw InputError("xi must sum to 1");
    for (const auto& v : valuations)
      if (v.r <= 0) throw InputError("valuation scaling must be positive");
  }
};

struct LegendreResult {
  double value = 0;
  std::vector<double> t_star;        // per-valuation, then the trivial coordinate if present
  bool converged = true;
};

struct BetaReport {
  Rat entropy = 0;
  double energy = 0;
  std::vector<double> t_star;
  double grad_K = 0;
  double grad_err = 0;  // two-step discrepancy of the central difference
  double beta = 0;
  std::optional<double> ratio;
};

namespace detail {

/// Distinct divisors and, per divisor, the (t index, scaling) pairs constraining it.
struct DivisorGroups {
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<std::size_t, Rat>>> members;
};

inline DivisorGroups group_by_divisor(const BetaProblem& p) {
  DivisorGroups g;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < p.valuations.size(); ++i) {
    auto [it, fresh] = pos.try_emplace(p.valuations[i].label, g.labels.size());
    if (fresh) {
      g.labels.push_back(p.valuations[i].label);
      g.members.emplace_back();
    }
    g.members[it->second].emplace_back(i, p.valuations[i].r);
  }
  return g;
}

template <class T>
inline T to_scalar(const Rat& r);
template <>
inline double to_scalar<double>(const Rat& r) { return to_double(r); }
template <>
inline Rat to_scalar<Rat>(const Rat& r) { return r; }

/// s_j(lambda) = max over atoms on divisor j of (lambda - t_i)_+ / r_i.
template <class T>
inline T group_s(const std::vector<std::pair<std::size_t, Rat>>& grp, const std::vector<T>& t,
                 const T& lambda) {
  T best(0);
  for (const auto& [idx, r] : grp) {
    T v = (lambda - t[idx]) / to_scalar<T>(r);
    if (v > best) best = v;
  }
  return best;
}

/// Exact piecewise-linear closed form of the curve profile.
/// t has one entry per valuation; cap bounds the integration when a trivial
/// atom is present. Works over double or Rat.
template <class T>
inline T curve_profile(const BetaProblem& p, const DivisorGroups& g, const std::vector<T>& t,
                       const T& twisted_v, const std::optional<T>& cap) {
  if (twisted_v <= T(0)) throw NumericError("twisted class is not big");
  T lam_min = cap ? *cap : T(0);
  bool first = !cap;
  if (first && !t.empty()) { lam_min = t[0]; first = false; }
  for (const auto& ti : t) lam_min = std::min(lam_min, ti);
  if (t.empty() && !cap) throw InputError("profile needs at least one atom");

  // candidate breakpoints: the t_i, pairwise max-crossings within a group,
  // and the zero level of the integrand (located per segment below)
  std::vector<T> brk;
  for (const auto& ti : t) brk.push_back(ti);
  for (const auto& grp : g.members)
    for (std::size_t a = 0; a < grp.size(); ++a)
      for (std::size_t b = a + 1; b < grp.size(); ++b) {
        T ra = T(to_scalar<T>(grp[a].second)), rb = T(to_scalar<T>(grp[b].second));
        if (ra != rb) {
          // (x - ta)/ra = (x - tb)/rb
          T x = (rb * t[grp[a].first] - ra * t[grp[b].first]) / (rb - ra);
          brk.push_back(x);
        }
      }
  if (cap) brk.push_back(*cap);
  // generous linear upper end: vol hits zero by lam_min + max_t-range + V*max_r
  T hi = lam_min;
  for (const auto& ti : t) hi = std::max(hi, ti);
  T rmax(1);
  for (const auto& v : p.valuations) rmax = std::max(rmax, T(to_scalar<T>(v.r)));
  hi += twisted_v * rmax + T(1);
  if (cap && *cap < hi) hi = *cap;
  brk.push_back(hi);
  std::sort(brk.begin(), brk.end());

  auto integrand = [&](const T& lam) -> T {
    T v = twisted_v;
    for (const auto& grp : g.members) v -= group_s<T>(grp, t, lam);
    return v > T(0) ? v : T(0);
  };

  T integral(0);
  T prev = lam_min;
  T fprev = integrand(prev);
  for (const auto& bp : brk) {
    if (bp <= prev) continue;
    if (bp > hi) break;
    T fb = integrand(bp);
    // linear on the segment except for the clamp at zero
    if (fprev > T(0) && fb > T(0)) {
      integral += (fprev + fb) / T(2) * (bp - prev);
    } else if (fprev > T(0) || fb > T(0)) {
      // unclamped values at the endpoints locate the zero crossing
      T uprev = twisted_v, ub = twisted_v;
      for (const auto& grp : g.members) {
        uprev -= group_s<T>(grp, t, prev);
        ub -= group_s<T>(grp, t, bp);
      }
      T x = prev + (bp - prev) * uprev / (uprev - ub);
      if (fprev > T(0))
        integral += fprev / T(2) * (x - prev);
      else
        integral += fb / T(2) * (bp - x);
    }
    prev = bp;
    fprev = fb;
  }
  return lam_min + integral / twisted_v;
}

}  // namespace detail

/// Exact rational profile for the curve backend (the integrand is piecewise
/// linear, so the closed form needs no quadrature).
inline Rat f_profile_exact(const BetaProblem& p, const RatVec& t, const Rat& s_K,
                           std::optional<Rat> t_trivial = std::nullopt) {
  p.validate();
  if (!p.oracle.is_curve()) throw InputError("exact profile requires the curve backend");
  if (t.size() != p.valuations.size()) throw InputError("t length does not match valuations");
  auto groups = detail::group_by_divisor(p);
  return detail::curve_profile<Rat>(p, groups, t, p.oracle.curve().twisted_degree(s_K), t_trivial);
}

/// Volume profile f_A(t): lambda_0 + V^-1 int <(alpha - sum ((lambda-t_i)/r_i)_+ F_i)^n> dlambda.
/// A trivial-valuation coordinate, when present, truncates the integral at t_triv.
inline double f_profile(const BetaProblem& p, const std::vector<double>& t, double s_K,
                        std::optional<double> t_trivial = std::nullopt) {
  p.validate();
  if (t.size() != p.valuations.size()) throw InputError("t length does not match valuations");
  auto groups = detail::group_by_divisor(p);
  if (p.oracle.is_curve()) {
    double tv = to_double(p.oracle.curve().twisted_degree(rat_from_double(s_K)));
    return detail::curve_profile<double>(p, groups, t, tv, t_trivial);
  }
  // surface backend: adaptive quadrature with breakpoints at the t_i and
  // truncation at the detected pseudoeffective threshold
  const double v0 = p.oracle.vol_d(std::vector<double>(groups.labels.size(), 0.0), s_K);
  if (v0 <= 0) throw NumericError("twisted class is not big");
  double lam_min = t.empty() ? 0.0 : *std::min_element(t.begin(), t.end());
  if (t_trivial) lam_min = std::min(lam_min, *t_trivial);

  auto svec = [&](double lam) {
    std::vector<double> s(groups.labels.size(), 0.0);
    for (std::size_t j = 0; j < groups.labels.size(); ++j)
      s[j] = detail::group_s<double>(groups.members[j], t, lam);
    return s;
  };
  auto vol_at = [&](double lam) { return p.oracle.vol_d(svec(lam), s_K); };

  double lam_max = bisect_first_true([&](double lam) { return vol_at(lam) <= 0.0; }, lam_min,
                                     lam_min + 1.0, p.quad.tol);
  if (t_trivial) lam_max = std::min(lam_max, *t_trivial);
  std::vector<double> brk(t.begin(), t.end());
  double integral = integrate_with_breakpoints(vol_at, lam_min, lam_max, brk, p.quad);
  return lam_min + integral / v0;
}

/// E^vee_{A + s_K K_X}(mu_xi) via the Legendre transform of the profile:
/// maximizes f(t) - xi . t with the all-ones translation direction pinned.
inline LegendreResult legendre_energy(const BetaProblem& p, double s_K) {
  p.validate();
  const std::size_t l = p.valuations.size();
  const bool triv = p.xi_trivial.has_value();
  std::vector<double> xi(l + (triv ? 1 : 0));
  for (std::size_t i = 0; i < l; ++i) xi[i] = to_double(p.xi[i]);
  if (triv) xi[l] = to_double(*p.xi_trivial);

  auto obj = [&](const std::vector<double>& tt) {
    std::vector<double> t(tt.begin(), tt.begin() + l);
    std::optional<double> cap;
    if (triv) cap = tt[l];
    double f = f_profile(p, t, s_K, cap);
    double dotv = 0;
    for (std::size_t i = 0; i < tt.size(); ++i) dotv += xi[i] * tt[i];
    return f - dotv;
  };

  std::vector<double> t0(xi.size(), 0.0);
  auto r = coordinate_ascent(obj, t0, 0, p.opt);
  LegendreResult out;
  out.value = r.value;
  out.t_star = r.argmax;
  out.converged = r.converged;
  if (out.value < -p.opt.tol)
    throw IdentityError("measure energy came out negative; oracle inconsistent");
  return out;
}

/// Central-difference K_X-derivative of the measure energy, with one Richardson
/// halving; the two-step discrepancy is reported as an error estimate.
inline std::pair<double, double> grad_K(const BetaProblem& p) {
  p.validate();
  double h = to_double(p.grad_step);
  auto g = [&](double s) { return legendre_energy(p, s).value; };
  double d_h = (g(h) - g(-h)) / (2 * h);
  double d_h2 = (g(h / 2) - g(-h / 2)) / h;
  double err = std::fabs(d_h2 - d_h);
  return {(4.0 * d_h2 - d_h) / 3.0, err};
}

/// beta(mu_xi) = sum xi_i A_X(F_i) + grad_K g_A(xi); the trivial atom
/// contributes zero entropy.
inline BetaReport beta(const BetaProblem& p) {
  p.validate();
  BetaReport rep;
  for (std::size_t i = 0; i < p.valuations.size(); ++i)
    rep.entropy += p.xi[i] * p.valuations[i].a_x;
  auto le = legendre_energy(p, 0.0);
  if (!le.converged) throw NumericError("legendre_energy did not converge");
  rep.energy = le.value;
  rep.t_star = le.t_star;
  auto [gk, gerr] = grad_K(p);
  rep.grad_K = gk;
  rep.grad_err = gerr;
  rep.beta = to_double(rep.entropy) + rep.grad_K;
  if (rep.energy > 0) rep.ratio = rep.beta / rep.energy;
  return rep;
}

struct SolveMaResult {
  RatVec t_star;  // per component, exact when the interior linear solve applies
  NAMeasure measure;
  double objective = 0;
};

/// Solves MA_A(P_A(f)) = mu for a divisorial measure on the model's vertices.
/// For interior xi the optimum lies in the nef chamber where the masses are
/// linear in t, so the system b_i (A + sum t_k b_k E_k) . E_i = V xi_i is
/// solved exactly; otherwise derivative-free ascent on the energy objective.
inline SolveMaResult solve_ma_divisorial(const SncModel& model, const RatVec& xi,
                                         const OptConfig& opt = {}) {
  const auto& comps = model.components();
  const std::size_t n = comps.size();
  if (xi.size() != n) throw InputError("xi length does not match component count");
  Rat total = 0;
  for (const auto& x : xi) {
    if (x < 0) throw InputError("xi must be non-negative");
    total += x;
  }
  if (total != 1) throw InputError("xi must sum to 1");

  const Rat v = model.curve().degree_alpha;
  auto divisor_at = [&](const RatVec& t) {
    VerticalDivisor d(n);
    for (std::size_t i = 0; i < n; ++i) d.coeffs[i] = t[i] * comps[i].b;
    return d;
  };

  bool interior = std::all_of(xi.begin(), xi.end(), [](const Rat& x) { return x > 0; });
  if (interior && n > 1) {
    // unknowns t_1..t_{n-1} with t_0 = 0; equations for components 1..n-1
    RatMat m(n - 1, n - 1);
    RatVec rhs(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      Rat ai = model.pair(model.a_index(), model.component_index(i));
      rhs[i - 1] = v * xi[i] / comps[i].b - ai;
      for (std::size_t k = 1; k < n; ++k)
        m.at(i - 1, k - 1) =
            Rat(comps[k].b) * model.pair(model.component_index(k), model.component_index(i));
    }
    auto sol = solve(m, rhs);
    if (sol) {
      RatVec t(n, Rat(0));
      for (std::size_t i = 1; i < n; ++i) t[i] = (*sol)[i - 1];
      auto d = divisor_at(t);
      auto mu = ma_envelope(model, d);
      bool exact = true;
      for (std::size_t i = 0; i < n; ++i)
        if (mu.atoms[i].mass != xi[i]) exact = false;
      // mismatch means the linear chamber guess left the nef cone; fall through
      if (exact) {
        SolveMaResult res;
        res.t_star = t;
        res.measure = std::move(mu);
        res.objective = to_double(energy(model, d) - dot(xi, t));
        return res;
      }
    }
  }

  auto obj = [&](const std::vector<double>& td) {
    RatVec t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = rat_from_double(td[i]);
    return to_double(energy(model, divisor_at(t)) - dot(xi, t));
  };
  auto r = coordinate_ascent(obj, std::vector<double>(n, 0.0), 0, opt);
  if (!r.converged) throw NumericError("solve_ma_divisorial did not converge");
  SolveMaResult res;
  res.t_star.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.t_star[i] = rat_from_double(r.argmax[i]);
  res.measure = ma_envelope(model, divisor_at(res.t_star));
  res.objective = r.value;
  for (std::size_t i = 0; i < n; ++i) {
    double diff = to_double(res.measure.atoms[i].mass - xi[i]);
    if (std::fabs(diff) > std::max(opt.tol, 1e-6) * 10)
      throw IdentityError("MA solver masses deviate from xi beyond tolerance");
  }
  return res;
}

/// Builds a curve-backend problem for the measure of a model envelope; atom
/// log discrepancies come from the model side (A_{XxP1}(v) - 1).
inline BetaProblem beta_problem_from_measure(const SncModel& model, const NAMeasure& mu,
                                             QuadConfig quad = {}, OptConfig opt = {},
                                             Rat grad_step = Rat(1, 64)) {
  BetaProblem p{VolumeOracle(CurveOracle{model.curve().genus, model.curve().degree_alpha}),
                {}, {}, std::nullopt, quad, opt, grad_step};
  for (const auto& atom : mu.atoms) {
    if (atom.mass == 0) continue;
    if (!atom.point.center) {
      if (p.xi_trivial) throw InputError("measure has two trivial atoms");
      p.xi_trivial = atom.mass;
      continue;
    }
    BetaValuation val;
    val.label = *atom.point.center;
    val.a_x = atom.point.log_disc_XP1 - 1;
    val.r = atom.point.scaling;
    p.valuations.push_back(val);
    p.xi.push_back(atom.mass);
  }
  return p;
}

struct ScanRow {
  RatVec xi;
  std::optional<BetaReport> report;
  std::string error;  // non-empty when this member failed
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::optional<double> min_ratio;
  std::optional<RatVec> argmin;
};

/// Grid scan of beta/energy; a lower-bound heuristic over the sampled set.
/// Member failures are recorded, never dropped.
inline std::size_t scan_thread_count() {
  const char* env = std::getenv("KSTAB_THREADS");
  if (!env) return 1;
  long n = std::strtol(env, nullptr, 10);
  if (n < 1) throw InputError("KSTAB_THREADS must be a positive integer");
  return static_cast<std::size_t>(n);
}

inline ScanResult stability_scan(const BetaProblem& base, const std::vector<RatVec>& grid) {
  if (grid.empty()) throw InputError("stability scan requires a non-empty grid");
  ScanResult out;
  out.rows.resize(grid.size());
  auto run_row = [&](std::size_t i) {
    BetaProblem p = base;
    p.xi = grid[i];
    out.rows[i].xi = grid[i];
    try {
      p.validate();
      auto rep = beta(p);
      if (!rep.ratio) throw NumericError("grid point has zero energy; interior points required");
      out.rows[i].report = rep;
    } catch (const std::exception& e) {
      out.rows[i].error = e.what();
    }
  };
  std::size_t nthreads = std::min(scan_thread_count(), grid.size());
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) run_row(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& row : out.rows) {
    if (!row.report || !row.report->ratio) continue;
    if (!out.min_ratio || *row.report->ratio < *out.min_ratio) {
      out.min_ratio = *row.report->ratio;
      out.argmin = row.xi;
    }
  }
  if (!out.min_ratio) throw NumericError("every grid member failed");
  return out;
}

}  // namespace kstab
