#pragma once

#include "kstab/lattice.hpp"
#include "kstab/model.hpp"
#include "kstab/plfun.hpp"
#include "kstab/rational.hpp"

#include <algorithm>
#include <cstddef>

namespace kstab {

/// Intersection-number invariants of the big test configuration (X', A+D)
/// together with the functionals of its envelope potential. Instantiated at
/// n = 1 (models are surfaces).
struct InvariantReport {
  Rat DF = 0, M_NA = 0, J_NA = 0;
  Rat E_A = 0, E_K = 0, H_A = 0, M_A = 0, J_A = 0;
  Rat sbar = 0;
};

namespace detail {

struct NormalizedEnvelope {
  EnvelopeResult env;
  IntersectionLattice lat;
  Rat vol;   // <(A+D')^2>
  Rat v;     // V = deg alpha
};

inline NormalizedEnvelope prepared(const SncModel& model, const VerticalDivisor& d) {
  auto env = envelope(model, d);
  auto lat = model.vertical_lattice();
  Rat vol = lat.intersect(env.zariski.positive, env.zariski.positive);
  return {std::move(env), std::move(lat), vol, model.curve().degree_alpha};
}

inline DivClass kx_class(const SncModel& model) {
  DivClass k(model.basis_size());
  k.coeffs[model.kx_index()] = 1;
  return k;
}

/// K^log_{X'/XxP1} = sum (ordK_i + 1 - b_i) E_i.
inline DivClass klog_class(const SncModel& model) {
  DivClass k(model.basis_size());
  const auto& comps = model.components();
  for (std::size_t i = 0; i < comps.size(); ++i)
    k.coeffs[model.component_index(i)] = Rat(comps[i].ordK + 1 - comps[i].b);
  return k;
}

}  // namespace detail

/// E_A(P_A(f_D)) = V^{-1}/(n+1) <(A+D)^{n+1}>, de-shifted by the normalization.
inline Rat energy(const SncModel& model, const VerticalDivisor& d) {
  auto p = detail::prepared(model, d);
  return p.vol / (2 * p.v) - p.env.shift;
}

/// E_A^{K_X}(P_A(f_D)) = V^{-1} <(A+D)^n> . pi_X^* K_X, de-shifted.
inline Rat twisted_energy(const SncModel& model, const VerticalDivisor& d) {
  auto p = detail::prepared(model, d);
  Rat raw = p.lat.intersect(p.env.zariski.positive, detail::kx_class(model)) / p.v;
  // adding cF moves P.Kx by c * F.Kx = c(2g-2)
  return raw - p.env.shift * model.curve().degree_K() / p.v;
}

/// H_A(P_A(f_D)) = V^{-1} <(A+D)^n> . K^log; shift-invariant.
inline Rat entropy_envelope(const SncModel& model, const VerticalDivisor& d) {
  auto p = detail::prepared(model, d);
  return p.lat.intersect(p.env.zariski.positive, detail::klog_class(model)) / p.v;
}

inline InvariantReport report(const SncModel& model, const VerticalDivisor& d) {
  auto p = detail::prepared(model, d);
  const Rat v = p.v;
  const Rat degk = model.curve().degree_K();
  const auto& P = p.env.zariski.positive;
  InvariantReport r;
  r.sbar = -degk / v;
  r.E_A = p.vol / (2 * v) - p.env.shift;
  r.E_K = p.lat.intersect(P, detail::kx_class(model)) / v - p.env.shift * degk / v;
  r.H_A = p.lat.intersect(P, detail::klog_class(model)) / v;
  r.M_A = r.sbar * r.E_A + r.E_K + r.H_A;
  // sup of the envelope is its value at the trivial valuation (the E0 vertex)
  std::size_t e0 = 0;
  while (!model.components()[e0].is_strict_transform_of_X0) ++e0;
  r.J_A = -r.E_A + p.env.envelope[e0];

  // intersection-number side, on the normalized class (all three shift-invariant)
  DivClass k_rel = detail::kx_class(model);  // K_{X'/P^1} = sum ordK_i E_i + Kx
  const auto& comps = model.components();
  for (std::size_t i = 0; i < comps.size(); ++i)
    k_rel.coeffs[model.component_index(i)] += Rat(comps[i].ordK);
  r.DF = p.lat.intersect(k_rel, P) - (degk / (2 * v)) * p.vol;
  DivClass x0_minus_red(model.basis_size());
  for (std::size_t i = 0; i < comps.size(); ++i)
    x0_minus_red.coeffs[model.component_index(i)] = Rat(comps[i].b - 1);
  r.M_NA = r.DF - p.lat.intersect(x0_minus_red, P);
  DivClass a(model.basis_size());
  a.coeffs[model.a_index()] = 1;
  r.J_NA = p.lat.intersect(P, a) - p.vol / 2;

  if (r.M_A * v != r.M_NA || r.J_A * v != r.J_NA)
    throw IdentityError("functional identity M_A = V^-1 M_NA / J_A = V^-1 J_NA violated");
  return r;
}

}  // namespace kstab
