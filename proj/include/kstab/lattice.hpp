#pragma once

#include "kstab/linalg.hpp"
#include "kstab/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kstab {

/// Numerical class written in the lattice basis.
struct DivClass {
  RatVec coeffs;

  DivClass() = default;
  explicit DivClass(RatVec c) : coeffs(std::move(c)) {}
  explicit DivClass(std::size_t rank) : coeffs(rank, Rat(0)) {}

  std::size_t size() const { return coeffs.size(); }

  DivClass& operator+=(const DivClass& o) {
    if (coeffs.size() != o.coeffs.size()) throw InputError("class dimension mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  friend DivClass operator+(DivClass a, const DivClass& b) { return a += b; }
  friend DivClass operator-(DivClass a, const DivClass& b) {
    if (a.coeffs.size() != b.coeffs.size()) throw InputError("class dimension mismatch");
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] -= b.coeffs[i];
    return a;
  }
  friend DivClass operator*(const Rat& s, DivClass a) {
    for (auto& c : a.coeffs) c *= s;
    return a;
  }
  friend bool operator==(const DivClass&, const DivClass&) = default;
};

struct TestCurve {
  std::string label;
  DivClass cls;
};

/// Zariski decomposition u = P + N relative to the declared test curves.
struct ZariskiResult {
  DivClass positive;                                  // P
  std::vector<std::pair<std::size_t, Rat>> negative;  // (test-curve index, sigma > 0)
  bool is_pseff = true;
  bool is_big = false;  // P*P > 0
};

/// Finitely generated lattice of divisor classes with an exact intersection form.
///
/// Nefness and pseudoeffectivity are relative to the declared test-curve list;
/// downstream exact identities assume the list contains every negative curve of
/// the classes touched.
class IntersectionLattice {
 public:
  IntersectionLattice(std::vector<std::string> labels, RatMat form,
                      std::vector<TestCurve> test_curves, Rat self_int_bound = Rat(10))
      : labels_(std::move(labels)), form_(std::move(form)),
        test_curves_(std::move(test_curves)) {
    if (form_.rows != labels_.size() || form_.cols != labels_.size())
      throw InputError("intersection form size does not match label count");
    if (labels_.empty()) throw InputError("lattice rank must be positive");
    if (!form_.symmetric()) throw InputError("intersection form must be symmetric");
    for (const auto& tc : test_curves_) {
      if (tc.cls.size() != rank()) throw InputError("test curve '" + tc.label + "' has wrong dimension");
      if (intersect(tc.cls, tc.cls) < -self_int_bound)
        throw InputError("test curve '" + tc.label + "' violates the self-intersection bound");
    }
  }

  std::size_t rank() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const RatMat& form() const { return form_; }
  const std::vector<TestCurve>& test_curves() const { return test_curves_; }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw InputError("unknown class label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  DivClass basis_class(std::size_t i) const {
    DivClass c(rank());
    c.coeffs[i] = 1;
    return c;
  }

  /// u^T * form * v, exact.
  Rat intersect(const DivClass& u, const DivClass& v) const {
    if (u.size() != rank() || v.size() != rank()) throw InputError("class dimension mismatch");
    Rat s = 0;
    for (std::size_t i = 0; i < rank(); ++i) {
      if (u.coeffs[i] == 0) continue;
      Rat row = 0;
      for (std::size_t j = 0; j < rank(); ++j)
        if (v.coeffs[j] != 0) row += form_.at(i, j) * v.coeffs[j];
      s += u.coeffs[i] * row;
    }
    return s;
  }

  bool is_nef(const DivClass& u) const {
    for (const auto& tc : test_curves_)
      if (intersect(u, tc.cls) < 0) return false;
    return true;
  }

  /// Iterative negative-support growth: while some test curve pairs negatively
  /// with the candidate positive part, add it to the support and re-solve the
  /// orthogonality system (u - N) . C_j = 0 over the support. The support never
  /// shrinks, so at most |test_curves| growth steps occur. A support whose Gram
  /// matrix is not negative definite means u left the declared pseudoeffective
  /// cone; we return is_pseff = false rather than patching the curve list.
  ZariskiResult zariski(const DivClass& u) const {
    if (u.size() != rank()) throw InputError("class dimension mismatch");
    ZariskiResult res;
    std::vector<std::size_t> support;
    DivClass p = u;
    const std::size_t m = test_curves_.size();
    for (std::size_t round = 0; round <= m; ++round) {
      bool grew = false;
      for (std::size_t j = 0; j < m; ++j) {
        if (std::find(support.begin(), support.end(), j) != support.end()) continue;
        if (intersect(p, test_curves_[j].cls) < 0) {
          support.push_back(j);
          grew = true;
        }
      }
      if (!grew) break;
      const std::size_t k = support.size();
      RatMat gram(k, k);
      RatVec rhs(k);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b)
          gram.at(a, b) = intersect(test_curves_[support[a]].cls, test_curves_[support[b]].cls);
        rhs[a] = intersect(u, test_curves_[support[a]].cls);
      }
      if (!negative_definite(gram)) {
        res.is_pseff = false;
        return res;
      }
      auto sigma = solve(gram, rhs);
      if (!sigma) {
        res.is_pseff = false;  // unreachable after the definiteness check
        return res;
      }
      p = u;
      for (std::size_t a = 0; a < k; ++a) {
        if ((*sigma)[a] < 0) {
          res.is_pseff = false;
          return res;
        }
        p = p - (*sigma)[a] * test_curves_[support[a]].cls;
      }
      res.negative.clear();
      for (std::size_t a = 0; a < k; ++a)
        if ((*sigma)[a] > 0) res.negative.emplace_back(support[a], (*sigma)[a]);
    }
    // Zariski orthogonality and nefness of P must hold exactly now.
    for (const auto& [j, sig] : res.negative) {
      (void)sig;
      if (intersect(p, test_curves_[j].cls) != 0)
        throw IdentityError("Zariski orthogonality violated for curve '" + test_curves_[j].label + "'");
    }
    if (!is_nef(p)) throw IdentityError("Zariski positive part is not nef against the test curves");
    res.positive = p;
    Rat p2 = intersect(p, p);
    if (p2 < 0) {
      res.is_pseff = false;
      return res;
    }
    res.is_big = p2 > 0;
    return res;
  }

  /// vol(u) = P*P on a surface; 0 off the pseudoeffective cone.
  Rat volume(const DivClass& u) const {
    auto z = zariski(u);
    if (!z.is_pseff) return Rat(0);
    return intersect(z.positive, z.positive);
  }

  /// Restricted volume along test curve `curve`: P * C (0 when C sits in the
  /// negative part, by orthogonality).
  Rat restricted_volume(const DivClass& u, std::size_t curve) const {
    if (curve >= test_curves_.size()) throw InputError("test-curve index out of range");
    auto z = zariski(u);
    if (!z.is_pseff) throw InputError("restricted volume of a non-pseudoeffective class");
    return intersect(z.positive, test_curves_[curve].cls);
  }

  /// Distance (in |h|) from u to the nearest Zariski chamber wall along direction
  /// dir, within the chamber of u. Returns nullopt when no wall is met (the
  /// decomposition is linear for all h of either sign), otherwise a positive bound
  /// valid for both signs of h.
  std::optional<Rat> chamber_wall_distance(const DivClass& u, const DivClass& dir) const {
    auto z = zariski(u);
    if (!z.is_pseff) throw InputError("chamber walls of a non-pseudoeffective class");
    // Within the chamber the map u -> (P, sigma) is linear; compute its value on dir.
    const std::size_t k = z.negative.size();
    DivClass pdir = dir;
    RatVec sdir(k, Rat(0));
    if (k > 0) {
      RatMat gram(k, k);
      RatVec rhs(k);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b)
          gram.at(a, b) =
              intersect(test_curves_[z.negative[a].first].cls, test_curves_[z.negative[b].first].cls);
        rhs[a] = intersect(dir, test_curves_[z.negative[a].first].cls);
      }
      auto s = solve(gram, rhs);
      if (!s) throw IdentityError("singular Gram system on a negative-definite support");
      sdir = *s;
      for (std::size_t a = 0; a < k; ++a)
        pdir = pdir - sdir[a] * test_curves_[z.negative[a].first].cls;
    }
    std::optional<Rat> best;
    auto consider = [&](const Rat& value, const Rat& slope) {
      // value + h*slope hits 0 at |h| = value/|slope|
      if (slope == 0) return;
      Rat d = abs(value / slope);
      if (!best || d < *best) best = d;
    };
    // walls where a currently-positive curve reaches P*C = 0
    for (std::size_t j = 0; j < test_curves_.size(); ++j) {
      bool in_support = false;
      for (const auto& [idx, sig] : z.negative)
        if (idx == j) { in_support = true; break; }
      if (in_support) continue;
      consider(intersect(z.positive, test_curves_[j].cls), intersect(pdir, test_curves_[j].cls));
    }
    // walls where a support coefficient reaches 0
    for (std::size_t a = 0; a < k; ++a) consider(z.negative[a].second, sdir[a]);
    return best;
  }

 private:
  std::vector<std::string> labels_;
  RatMat form_;
  std::vector<TestCurve> test_curves_;
};

}  // namespace kstab
