#pragma once

#include "kstab/lattice.hpp"
#include "kstab/model.hpp"
#include "kstab/rational.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace kstab {

/// Vertical divisor D = sum a_i E_i on a model; induces the PL function
/// f_D(v_i) = a_i / b_i on dual-complex vertices.
struct VerticalDivisor {
  RatVec coeffs;  // one entry per component

  explicit VerticalDivisor(RatVec a) : coeffs(std::move(a)) {}
  explicit VerticalDivisor(std::size_t n) : coeffs(n, Rat(0)) {}
};

struct NAMeasureAtom {
  DivisorialPoint point;
  Rat mass;
};

/// Finitely many atoms on divisorial points; masses sum to 1 exactly.
struct NAMeasure {
  std::vector<NAMeasureAtom> atoms;
};

struct EnvelopeResult {
  RatVec envelope;   // P_A(f_D)(v_i), de-shifted
  RatVec f_values;   // f_D(v_i), de-shifted
  RatVec sigma;      // Lelong numbers nu_{E_i}(A + D'), per component
  ZariskiResult zariski;  // decomposition of A + D' (normalized class)
  Rat shift = 0;     // c with D' = D + cF
};

namespace detail {

inline RatVec f_values(const SncModel& model, const VerticalDivisor& d) {
  const auto& comps = model.components();
  if (d.coeffs.size() != comps.size()) throw InputError("divisor coefficient count mismatch");
  RatVec f(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) f[i] = d.coeffs[i] / comps[i].b;
  return f;
}

inline DivClass class_of(const SncModel& model, const VerticalDivisor& d, bool with_a) {
  DivClass c(model.basis_size());
  if (with_a) c.coeffs[model.a_index()] = 1;
  for (std::size_t i = 0; i < d.coeffs.size(); ++i)
    c.coeffs[model.component_index(i)] = d.coeffs[i];
  return c;
}

}  // namespace detail

/// D' = D + cF with minimal integer c such that a_i' >= b_i for all i
/// (the paper's reduction to f_D >= 1); downstream energies de-shift by c.
inline std::pair<VerticalDivisor, Rat> normalize_ge_fiber(const SncModel& model,
                                                          const VerticalDivisor& d) {
  const auto& comps = model.components();
  if (d.coeffs.size() != comps.size()) throw InputError("divisor coefficient count mismatch");
  Rat c = 0;
  bool first = true;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    // need a_i + c*b_i >= b_i, i.e. c >= 1 - a_i/b_i
    Rat need = 1 - d.coeffs[i] / comps[i].b;
    if (first || need > c) c = need, first = false;
  }
  // minimal integer multiple
  Int ci = numerator(c) / denominator(c);
  if (Rat(ci) < c) ci += 1;
  Rat shift(ci);
  VerticalDivisor out = d;
  for (std::size_t i = 0; i < comps.size(); ++i) out.coeffs[i] += shift * comps[i].b;
  return {out, shift};
}

/// Psh envelope of f_D at the dual-complex vertices. Vertex values are
/// f_D(v_i) - sigma_i / b_i with sigma the negative part of A + D'; the
/// positive part is nef on the model, so the bound is attained.
inline EnvelopeResult envelope(const SncModel& model, const VerticalDivisor& d) {
  auto [dn, c] = normalize_ge_fiber(model, d);
  auto lat = model.vertical_lattice();
  DivClass u = detail::class_of(model, dn, true);
  auto z = lat.zariski(u);
  if (!z.is_pseff) throw IdentityError("normalized class A + D' must be big");

  const auto& comps = model.components();
  EnvelopeResult res;
  res.shift = c;
  res.f_values = detail::f_values(model, d);
  res.sigma.assign(comps.size(), Rat(0));
  for (const auto& [j, sig] : z.negative) {
    // test curves are ordered components first, then fiber curves
    if (j >= comps.size())
      throw IdentityError("negative part of A + D' met a fiber strict transform");
    res.sigma[j] = sig;
  }
  res.envelope.resize(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (res.sigma[i] > dn.coeffs[i])
      throw IdentityError("Lelong number exceeds the normalized coefficient");
    res.envelope[i] = res.f_values[i] - res.sigma[i] / comps[i].b;
    if (res.envelope[i] > res.f_values[i]) throw IdentityError("envelope exceeds f_D");
  }
  res.zariski = std::move(z);
  return res;
}

/// MA measure of the envelope: mass b_i <(A+D)^n>_{X|E_i} / V at v_i.
inline NAMeasure ma_envelope(const SncModel& model, const VerticalDivisor& d) {
  auto env = envelope(model, d);
  const auto& comps = model.components();
  auto lat = model.vertical_lattice();
  const Rat v = model.curve().degree_alpha;
  NAMeasure mu;
  Rat total = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    DivClass e(model.basis_size());
    e.coeffs[model.component_index(i)] = 1;
    Rat mass = Rat(comps[i].b) * lat.intersect(env.zariski.positive, e) / v;
    if (mass < 0) throw IdentityError("negative MA mass");
    total += mass;
    mu.atoms.push_back({model.divisorial_point(i), mass});
  }
  if (total != 1) throw IdentityError("MA measure masses do not sum to 1");
  return mu;
}

/// sum_i (f_D - P_A(f_D))(v_i) * mass_i; exactly 0 by orthogonality.
inline Rat orthogonality_defect(const SncModel& model, const VerticalDivisor& d) {
  auto env = envelope(model, d);
  auto mu = ma_envelope(model, d);
  Rat s = 0;
  for (std::size_t i = 0; i < env.f_values.size(); ++i)
    s += (env.f_values[i] - env.envelope[i]) * mu.atoms[i].mass;
  return s;
}

/// sum_i b_i <(A+D')^n>_{X|E_i} - V; exactly 0.
inline Rat mass_sum_check(const SncModel& model, const VerticalDivisor& d) {
  auto env = envelope(model, d);
  auto lat = model.vertical_lattice();
  const auto& comps = model.components();
  Rat s = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    DivClass e(model.basis_size());
    e.coeffs[model.component_index(i)] = 1;
    s += Rat(comps[i].b) * lat.intersect(env.zariski.positive, e);
  }
  return s - model.curve().degree_alpha;
}

}  // namespace kstab
