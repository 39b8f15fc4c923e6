#pragma once

#include "kstab/lattice.hpp"
#include "kstab/linalg.hpp"
#include "kstab/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kstab {

/// Base curve X: genus g and V = deg alpha.
struct CurveData {
  long genus = 0;
  Rat degree_alpha = 1;  // V > 0

  Rat degree_K() const { return Rat(2 * genus - 2); }
};

struct Component {
  std::string label;
  long b = 1;        // multiplicity of the central fiber along this component
  long ordK = 0;     // ord_E(K relative to X x P^1)
  bool is_strict_transform_of_X0 = false;
};

/// Divisorial point attached to a central-fiber component.
struct DivisorialPoint {
  std::size_t component = 0;
  std::optional<std::string> center;  // base point x, or nullopt for the trivial valuation
  Rat scaling = 0;                    // r = m/b, 0 for the trivial valuation
  Rat log_disc_XP1 = 1;               // (1 + ordK)/b
};

/// Blow-up model of X x P^1: central-fiber components, tracked fiber strict
/// transforms H_x, the intersection form on {A, Kx} u components u fibers,
/// and the dual tree. Immutable; blowup() returns a new model.
class SncModel {
 public:
  static SncModel trivial(CurveData curve) {
    if (curve.degree_alpha <= 0) throw InputError("degree_alpha must be positive");
    SncModel m;
    m.curve_ = curve;
    m.components_.push_back({"E0", 1, 0, true});
    // basis: A, Kx, E0
    m.form_ = RatMat(3, 3);
    m.form_.at(0, 2) = m.form_.at(2, 0) = curve.degree_alpha;  // A.E0 = V
    m.form_.at(1, 2) = m.form_.at(2, 1) = curve.degree_K();    // Kx.E0 = 2g-2
    return m;
  }

  const CurveData& curve() const { return curve_; }
  const std::vector<Component>& components() const { return components_; }
  const std::vector<std::string>& fiber_curves() const { return fiber_curves_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& dual_tree_edges() const { return edges_; }

  std::size_t basis_size() const { return 2 + components_.size() + fiber_curves_.size(); }
  std::size_t a_index() const { return 0; }
  std::size_t kx_index() const { return 1; }
  std::size_t component_index(std::size_t i) const { return 2 + i; }
  std::size_t fiber_index(std::size_t i) const { return 2 + components_.size() + i; }

  std::optional<std::size_t> find_component(const std::string& label) const {
    for (std::size_t i = 0; i < components_.size(); ++i)
      if (components_[i].label == label) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> find_fiber(const std::string& label) const {
    for (std::size_t i = 0; i < fiber_curves_.size(); ++i)
      if (fiber_curves_[i] == label) return i;
    return std::nullopt;
  }

  /// Registers the strict transform H_x of a fresh fiber {x} x P^1. A fresh
  /// generic fiber meets the central fiber only in the strict transform of X0.
  SncModel add_fiber_curve(const std::string& label) const {
    if (find_component(label) || find_fiber(label))
      throw InputError("label '" + label + "' already exists");
    SncModel m = *this;
    m.fiber_curves_.push_back(label);
    RatMat f(basis_size() + 1, basis_size() + 1);
    for (std::size_t i = 0; i < basis_size(); ++i)
      for (std::size_t j = 0; j < basis_size(); ++j) {
        // old fiber columns shift by one to keep the basis order A,Kx,components,fibers
        f.at(m.map_old_index(i), m.map_old_index(j)) = form_.at(i, j);
      }
    std::size_t h = m.basis_size() - 1;
    std::size_t e0 = 0;
    while (!components_[e0].is_strict_transform_of_X0) ++e0;
    f.at(h, m.component_index(e0)) = f.at(m.component_index(e0), h) = 1;
    m.form_ = std::move(f);
    return m;
  }

  /// Point blow-up on the central fiber. `support` holds one or two mutually
  /// intersecting labels from components u fiber_curves, at least one of them a
  /// component. Blowing up a generic point of the strict transform of X0 picks
  /// an unnamed base point; a fresh fiber curve is registered for it so centers
  /// stay recoverable by the Gram solve.
  SncModel blowup(const std::vector<std::string>& support_labels, const std::string& new_label) const {
    if (support_labels.empty() || support_labels.size() > 2)
      throw InputError("blow-up support must contain 1 or 2 labels");
    if (find_component(new_label) || find_fiber(new_label))
      throw InputError("label '" + new_label + "' already exists");
    std::set<std::string> uniq(support_labels.begin(), support_labels.end());
    if (uniq.size() != support_labels.size()) throw InputError("duplicate support label");

    // Generic point of E0: name the base point it sits over.
    std::size_t e0 = 0;
    while (!components_[e0].is_strict_transform_of_X0) ++e0;
    if (support_labels.size() == 1) {
      auto ci = find_component(support_labels[0]);
      if (!ci) throw InputError("blow-up support must contain a component");
      // The C* action fixes the strict transform of X0 pointwise, so any of its
      // points is a valid center. On an exceptional component the only fixed
      // points are its intersections with adjacent curves, which must be named
      // via a 2-element support.
      if (*ci != e0)
        throw InputError("single-label support is only valid on the strict transform of X0; "
                         "centers on exceptional components must be given as intersection points");
      std::string h = fresh_fiber_label();
      return add_fiber_curve(h).blowup({support_labels[0], h}, new_label);
    }

    SncModel m = *this;
    std::vector<std::size_t> sup_basis;       // basis indices of support members
    std::vector<std::size_t> sup_components;  // component indices within support
    bool has_component = false;
    for (const auto& lab : support_labels) {
      if (auto ci = find_component(lab)) {
        has_component = true;
        sup_components.push_back(*ci);
        sup_basis.push_back(component_index(*ci));
      } else if (auto fi = find_fiber(lab)) {
        sup_basis.push_back(fiber_index(*fi));
      } else {
        throw InputError("unknown label '" + lab + "' in blow-up support");
      }
    }
    if (!has_component) throw InputError("blow-up support must contain a component");
    if (sup_basis.size() == 2 && form_.at(sup_basis[0], sup_basis[1]) != 1)
      throw InputError("blow-up support members do not intersect with product 1");

    Component e;
    e.label = new_label;
    e.b = 0;
    e.ordK = 1;
    for (auto c : sup_components) {
      e.b += components_[c].b;
      e.ordK += components_[c].ordK;
    }
    m.components_.push_back(e);

    const std::size_t nb = m.basis_size();
    RatMat f(nb, nb);
    for (std::size_t i = 0; i < basis_size(); ++i)
      for (std::size_t j = 0; j < basis_size(); ++j)
        f.at(map_old_index_after_component(i), map_old_index_after_component(j)) = form_.at(i, j);
    std::size_t enew = m.component_index(m.components_.size() - 1);
    for (auto sb : sup_basis) {
      std::size_t nsb = map_old_index_after_component(sb);
      f.at(nsb, nsb) -= 1;
      f.at(enew, nsb) = f.at(nsb, enew) = 1;
    }
    if (sup_basis.size() == 2) {
      std::size_t a = map_old_index_after_component(sup_basis[0]);
      std::size_t b = map_old_index_after_component(sup_basis[1]);
      f.at(a, b) = f.at(b, a) = 0;
    }
    f.at(enew, enew) = -1;
    m.form_ = std::move(f);

    // dual tree: leaf attach, or edge subdivision at a node of two components
    std::size_t new_ci = m.components_.size() - 1;
    if (sup_components.size() == 2) {
      auto it = std::find_if(m.edges_.begin(), m.edges_.end(), [&](const auto& ed) {
        return (ed.first == sup_components[0] && ed.second == sup_components[1]) ||
               (ed.first == sup_components[1] && ed.second == sup_components[0]);
      });
      if (it == m.edges_.end()) throw IdentityError("dual tree missing edge for node blow-up");
      m.edges_.erase(it);
      m.edges_.emplace_back(sup_components[0], new_ci);
      m.edges_.emplace_back(sup_components[1], new_ci);
    } else {
      m.edges_.emplace_back(sup_components[0], new_ci);
    }
    m.check_fiber_identity();
    return m;
  }

  /// F = sum b_i E_i as a class.
  DivClass fiber_class() const {
    DivClass f(basis_size());
    for (std::size_t i = 0; i < components_.size(); ++i)
      f.coeffs[component_index(i)] = components_[i].b;
    return f;
  }

  Rat pair(std::size_t i, std::size_t j) const { return form_.at(i, j); }

  /// Center and scaling of v_{E_i}: solve the negative-definite Gram system for
  /// pi_X^*({x} x P^1) = H_x + sum m_k E_k over exceptional components; the
  /// center is the unique named base point with m_i > 0.
  DivisorialPoint divisorial_point(std::size_t i) const {
    if (i >= components_.size()) throw InputError("component index out of range");
    DivisorialPoint p;
    p.component = i;
    p.log_disc_XP1 = Rat(1 + components_[i].ordK) / components_[i].b;
    if (components_[i].is_strict_transform_of_X0) return p;  // trivial valuation

    std::vector<std::size_t> exc;
    for (std::size_t k = 0; k < components_.size(); ++k)
      if (!components_[k].is_strict_transform_of_X0) exc.push_back(k);
    const std::size_t n = exc.size();
    RatMat gram(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        gram.at(a, b) = form_.at(component_index(exc[a]), component_index(exc[b]));
    if (!negative_definite(gram)) throw IdentityError("exceptional Gram matrix not negative definite");

    std::size_t my_pos = static_cast<std::size_t>(
        std::find(exc.begin(), exc.end(), i) - exc.begin());
    for (std::size_t fx = 0; fx < fiber_curves_.size(); ++fx) {
      RatVec rhs(n);
      for (std::size_t a = 0; a < n; ++a)
        rhs[a] = -form_.at(fiber_index(fx), component_index(exc[a]));
      auto mvec = solve(gram, rhs);
      if (!mvec) throw IdentityError("singular Gram system in divisorial_point");
      if ((*mvec)[my_pos] > 0) {
        if (p.center) throw IdentityError("component has two candidate centers");
        p.center = fiber_curves_[fx];
        p.scaling = (*mvec)[my_pos] / components_[i].b;
      }
    }
    if (!p.center)
      throw IdentityError("exceptional component '" + components_[i].label +
                          "' has no tracked center; blow-up bookkeeping corrupted");
    return p;
  }

  /// Exports the intersection lattice with all components and fiber curves as
  /// test curves. Checks Zariski's negative-definiteness on every maximal
  /// proper component subset (which covers all proper subsets).
  IntersectionLattice vertical_lattice() const {
    check_fiber_identity();
    const std::size_t nc = components_.size();
    if (nc > 1) {
      for (std::size_t drop = 0; drop < nc; ++drop) {
        RatMat gram(nc - 1, nc - 1);
        std::size_t a = 0;
        for (std::size_t i = 0; i < nc; ++i) {
          if (i == drop) continue;
          std::size_t b = 0;
          for (std::size_t j = 0; j < nc; ++j) {
            if (j == drop) continue;
            gram.at(a, b) = form_.at(component_index(i), component_index(j));
            ++b;
          }
          ++a;
        }
        if (!negative_definite(gram))
          throw IdentityError("proper component subset with non-negative-definite Gram matrix");
      }
    }
    std::vector<std::string> labels{"A", "Kx"};
    for (const auto& c : components_) labels.push_back(c.label);
    for (const auto& fx : fiber_curves_) labels.push_back(fx);
    std::vector<TestCurve> curves;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      DivClass c(basis_size());
      c.coeffs[component_index(i)] = 1;
      curves.push_back({components_[i].label, c});
    }
    for (std::size_t i = 0; i < fiber_curves_.size(); ++i) {
      DivClass c(basis_size());
      c.coeffs[fiber_index(i)] = 1;
      curves.push_back({fiber_curves_[i], c});
    }
    return IntersectionLattice(labels, form_, curves);
  }

 private:
  SncModel() = default;

  std::string fresh_fiber_label() const {
    for (int k = 0;; ++k) {
      std::string cand = "H_auto" + std::to_string(k);
      if (!find_component(cand) && !find_fiber(cand)) return cand;
    }
  }

  // index shift when a fiber curve is appended (basis order stays A,Kx,E*,H*)
  std::size_t map_old_index(std::size_t i) const { return i; }

  // index shift when a component is appended: old fiber indices move up by one
  std::size_t map_old_index_after_component(std::size_t i) const {
    if (i >= 2 + components_.size()) return i + 1;
    return i;
  }

  void check_fiber_identity() const {
    auto pairf = [&](std::size_t idx) {
      Rat s = 0;
      for (std::size_t i = 0; i < components_.size(); ++i)
        s += Rat(components_[i].b) * form_.at(component_index(i), idx);
      return s;
    };
    for (std::size_t k = 0; k < components_.size(); ++k)
      if (pairf(component_index(k)) != 0) throw IdentityError("fiber identity F.E_k = 0 violated");
    if (pairf(a_index()) != curve_.degree_alpha) throw IdentityError("fiber identity A.F = V violated");
  }

  CurveData curve_;
  std::vector<Component> components_;
  std::vector<std::string> fiber_curves_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  RatMat form_;
};

}  // namespace kstab
