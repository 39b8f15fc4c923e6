#pragma once

#include "kstab/model.hpp"
#include "kstab/plfun.hpp"
#include "kstab/rational.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace kstab {

/// Deterministic generator of small random models and divisors for property
/// tests and timing corpora.
class Corpus {
 public:
  explicit Corpus(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  /// Random blow-up model: g in {0,1}, small V, up to max_blowups point
  /// blow-ups at valid centers (free points, nodes, or points on a tracked
  /// fiber strict transform).
  SncModel random_model(int max_blowups = 6) {
    CurveData curve;
    curve.genus = pick(0, 1);
    curve.degree_alpha = Rat(pick(1, 3));
    SncModel m = SncModel::trivial(curve);
    int steps = pick(1, max_blowups);
    for (int s = 0; s < steps; ++s) {
      auto supports = valid_supports(m);
      const auto& sup = supports[static_cast<std::size_t>(pick(0, static_cast<int>(supports.size()) - 1))];
      m = m.blowup(sup, "E" + std::to_string(s + 1));
    }
    return m;
  }

  /// Random vertical divisor with integer coefficients in [-bound, bound].
  VerticalDivisor random_divisor(const SncModel& m, int bound = 10) {
    VerticalDivisor d(m.components().size());
    for (auto& c : d.coeffs) c = Rat(pick(-bound, bound));
    return d;
  }

  /// Random interior probability vector with small rational entries.
  RatVec random_interior_xi(std::size_t n) {
    RatVec w(n);
    Rat total = 0;
    for (auto& x : w) {
      x = Rat(pick(1, 9));
      total += x;
    }
    for (auto& x : w) x /= total;
    return w;
  }

  int pick(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng_);
  }

 private:
  static std::vector<std::vector<std::string>> valid_supports(const SncModel& m) {
    std::vector<std::vector<std::string>> out;
    for (const auto& c : m.components())
      if (c.is_strict_transform_of_X0) out.push_back({c.label});
    for (const auto& [a, b] : m.dual_tree_edges())
      out.push_back({m.components()[a].label, m.components()[b].label});
    for (std::size_t i = 0; i < m.components().size(); ++i)
      for (std::size_t f = 0; f < m.fiber_curves().size(); ++f)
        if (m.pair(m.component_index(i), m.fiber_index(f)) == 1)
          out.push_back({m.components()[i].label, m.fiber_curves()[f]});
    return out;
  }

  std::mt19937_64 rng_;
};

}  // namespace kstab
