#pragma once

#include "kstab/beta.hpp"
#include "kstab/invariants.hpp"
#include "kstab/lattice.hpp"
#include "kstab/model.hpp"
#include "kstab/plfun.hpp"
#include "kstab/rational.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace kstab {

using json = nlohmann::ordered_json;

/// Floats render with 12 significant digits everywhere.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

inline json rat_json(const Rat& r) { return json(format_rat(r)); }

inline Rat rat_from_json(const json& j) {
  if (j.is_number_integer()) return Rat(j.get<long long>());
  if (!j.is_string()) throw InputError("expected a rational as a \"p/q\" string");
  return parse_rat(j.get<std::string>());
}

inline RatVec ratvec_from_json(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of rationals");
  RatVec v;
  for (const auto& e : j) v.push_back(rat_from_json(e));
  return v;
}

inline json ratvec_json(const RatVec& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(rat_json(r));
  return out;
}

inline const json& require(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw InputError("missing field '" + key + "'");
  return j.at(key);
}

// ---- lattice: {labels, form, test_curves:[{label, coeffs}]} ----

inline IntersectionLattice lattice_from_json(const json& j) {
  auto labels = require(j, "labels").get<std::vector<std::string>>();
  const json& fj = require(j, "form");
  if (!fj.is_array() || fj.size() != labels.size())
    throw InputError("form must be a square array matching labels");
  RatMat form(labels.size(), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!fj[i].is_array() || fj[i].size() != labels.size())
      throw InputError("form must be a square array matching labels");
    for (std::size_t k = 0; k < labels.size(); ++k) form.at(i, k) = rat_from_json(fj[i][k]);
  }
  std::vector<TestCurve> curves;
  for (const auto& cj : require(j, "test_curves")) {
    TestCurve tc;
    tc.label = require(cj, "label").get<std::string>();
    tc.cls = DivClass(ratvec_from_json(require(cj, "coeffs")));
    curves.push_back(std::move(tc));
  }
  return IntersectionLattice(std::move(labels), std::move(form), std::move(curves));
}

inline json lattice_json(const IntersectionLattice& lat) {
  json j;
  j["labels"] = lat.labels();
  json form = json::array();
  for (std::size_t i = 0; i < lat.rank(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < lat.rank(); ++k) row.push_back(rat_json(lat.form().at(i, k)));
    form.push_back(std::move(row));
  }
  j["form"] = std::move(form);
  json curves = json::array();
  for (const auto& tc : lat.test_curves())
    curves.push_back({{"label", tc.label}, {"coeffs", ratvec_json(tc.cls.coeffs)}});
  j["test_curves"] = std::move(curves);
  return j;
}

inline json zariski_json(const IntersectionLattice& lat, const ZariskiResult& z) {
  json j;
  j["is_pseff"] = z.is_pseff;
  if (!z.is_pseff) return j;
  j["is_big"] = z.is_big;
  j["positive"] = ratvec_json(z.positive.coeffs);
  json neg = json::array();
  for (const auto& [idx, sig] : z.negative)
    neg.push_back({{"curve", lat.test_curves()[idx].label}, {"sigma", rat_json(sig)}});
  j["negative"] = std::move(neg);
  return j;
}

// ---- model build script: {curve:{genus, degree_alpha}, steps:[{support, new_label}]} ----

inline SncModel model_from_json(const json& j) {
  const json& cj = require(j, "curve");
  CurveData curve;
  curve.genus = require(cj, "genus").get<long>();
  if (curve.genus < 0) throw InputError("genus must be non-negative");
  curve.degree_alpha = rat_from_json(require(cj, "degree_alpha"));
  SncModel m = SncModel::trivial(curve);
  if (j.contains("steps")) {
    for (const auto& sj : j.at("steps")) {
      auto support = require(sj, "support").get<std::vector<std::string>>();
      auto label = require(sj, "new_label").get<std::string>();
      m = m.blowup(support, label);
    }
  }
  return m;
}

inline json model_json(const SncModel& m) {
  json j;
  j["curve"] = {{"genus", m.curve().genus}, {"degree_alpha", rat_json(m.curve().degree_alpha)}};
  json comps = json::array();
  for (const auto& c : m.components())
    comps.push_back({{"label", c.label},
                     {"b", c.b},
                     {"ordK", c.ordK},
                     {"is_strict_transform_of_X0", c.is_strict_transform_of_X0}});
  j["components"] = std::move(comps);
  j["fiber_curves"] = m.fiber_curves();
  j["lattice"] = lattice_json(m.vertical_lattice());
  return j;
}

// ---- divisor: {model, coeffs} ----

struct DivisorInput {
  SncModel model;
  VerticalDivisor divisor;
};

inline DivisorInput divisor_from_json(const json& j) {
  SncModel m = model_from_json(require(j, "model"));
  VerticalDivisor d(ratvec_from_json(require(j, "coeffs")));
  if (d.coeffs.size() != m.components().size())
    throw InputError("coeffs length does not match component count");
  return {std::move(m), std::move(d)};
}

inline json point_json(const SncModel& m, const DivisorialPoint& p) {
  json j;
  j["component"] = m.components()[p.component].label;
  if (p.center)
    j["center"] = *p.center;
  else
    j["center"] = nullptr;
  j["scaling"] = rat_json(p.scaling);
  j["log_disc_XP1"] = rat_json(p.log_disc_XP1);
  return j;
}

inline json measure_json(const SncModel& m, const NAMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms) {
    json aj = point_json(m, a.point);
    aj["mass"] = rat_json(a.mass);
    atoms.push_back(std::move(aj));
  }
  return json{{"atoms", std::move(atoms)}};
}

inline json envelope_json(const SncModel& m, const EnvelopeResult& env) {
  json j;
  j["envelope"] = ratvec_json(env.envelope);
  j["f_values"] = ratvec_json(env.f_values);
  j["sigma"] = ratvec_json(env.sigma);
  j["shift"] = rat_json(env.shift);
  j["positive"] = ratvec_json(env.zariski.positive.coeffs);
  j["is_big"] = env.zariski.is_big;
  (void)m;
  return j;
}

inline json invariant_report_json(const InvariantReport& r) {
  auto both = [](const Rat& x) {
    return json{{"exact", format_rat(x)}, {"decimal", format_double(to_double(x))}};
  };
  json j;
  j["DF"] = both(r.DF);
  j["M_NA"] = both(r.M_NA);
  j["J_NA"] = both(r.J_NA);
  j["E_A"] = both(r.E_A);
  j["E_K"] = both(r.E_K);
  j["H_A"] = both(r.H_A);
  j["M_A"] = both(r.M_A);
  j["J_A"] = both(r.J_A);
  j["sbar"] = both(r.sbar);
  return j;
}

// ---- beta problem ----

inline BetaProblem beta_problem_from_json(const json& j) {
  const json& oj = require(j, "oracle");
  auto backend = require(oj, "backend").get<std::string>();
  auto make_oracle = [&]() -> VolumeOracle {
    if (backend == "curve") {
      const json& cj = require(oj, "curve");
      CurveOracle c;
      c.genus = require(cj, "genus").get<long>();
      c.V = rat_from_json(require(cj, "V"));
      if (c.V <= 0) throw InputError("V must be positive");
      return VolumeOracle(c);
    }
    if (backend == "surface") {
      const json& sj = require(oj, "surface");
      SurfaceOracle s{lattice_from_json(require(sj, "lattice")),
                      DivClass(ratvec_from_json(require(sj, "alpha"))),
                      DivClass(ratvec_from_json(require(sj, "K"))),
                      {}};
      for (const auto& fj : require(sj, "F")) s.f_classes.push_back(DivClass(ratvec_from_json(fj)));
      return VolumeOracle(std::move(s));
    }
    throw InputError("oracle backend must be \"curve\" or \"surface\"");
  };
  BetaProblem p{make_oracle(), {}, {}, std::nullopt, {}, {}, Rat(1, 64)};
  for (const auto& vj : require(j, "valuations")) {
    BetaValuation v;
    v.label = require(vj, "label").get<std::string>();
    v.a_x = rat_from_json(require(vj, "A_X"));
    v.r = rat_from_json(require(vj, "r"));
    p.valuations.push_back(std::move(v));
  }
  p.xi = ratvec_from_json(require(j, "xi"));
  if (j.contains("xi_trivial")) p.xi_trivial = rat_from_json(j.at("xi_trivial"));
  if (j.contains("quad")) {
    const json& q = j.at("quad");
    if (q.contains("tol")) p.quad.tol = q.at("tol").get<double>();
    if (q.contains("max_depth")) p.quad.max_depth = q.at("max_depth").get<int>();
  }
  if (j.contains("opt")) {
    const json& o = j.at("opt");
    if (o.contains("tol")) p.opt.tol = o.at("tol").get<double>();
    if (o.contains("max_iters")) p.opt.max_iters = o.at("max_iters").get<int>();
  }
  if (j.contains("grad_step")) p.grad_step = rat_from_json(j.at("grad_step"));
  p.validate();
  return p;
}

inline json beta_report_json(const BetaReport& r) {
  json j;
  j["entropy"] = {{"exact", format_rat(r.entropy)}, {"decimal", format_double(to_double(r.entropy))}};
  j["energy"] = format_double(r.energy);
  json ts = json::array();
  for (double t : r.t_star) ts.push_back(format_double(t));
  j["t_star"] = std::move(ts);
  j["grad_K"] = format_double(r.grad_K);
  j["grad_err"] = format_double(r.grad_err);
  j["beta"] = format_double(r.beta);
  if (r.ratio) j["ratio"] = format_double(*r.ratio);
  return j;
}

inline json scan_json(const ScanResult& s) {
  json rows = json::array();
  for (const auto& row : s.rows) {
    json rj;
    rj["xi"] = ratvec_json(row.xi);
    if (row.report)
      rj["report"] = beta_report_json(*row.report);
    else
      rj["error"] = row.error;
    rows.push_back(std::move(rj));
  }
  json j;
  j["rows"] = std::move(rows);
  if (s.min_ratio) j["min_ratio"] = format_double(*s.min_ratio);
  if (s.argmin) j["argmin_xi"] = ratvec_json(*s.argmin);
  return j;
}

/// Scan table as CSV: one row per grid member.
inline std::string scan_csv(const ScanResult& s) {
  std::string out = "xi,beta,energy,ratio,error\n";
  for (const auto& row : s.rows) {
    std::string xi;
    for (std::size_t i = 0; i < row.xi.size(); ++i) {
      if (i) xi += " ";
      xi += format_rat(row.xi[i]);
    }
    out += xi + ",";
    if (row.report) {
      out += format_double(row.report->beta) + "," + format_double(row.report->energy) + ",";
      out += row.report->ratio ? format_double(*row.report->ratio) : std::string();
      out += ",";
    } else {
      out += ",,," + row.error;
    }
    out += "\n";
  }
  return out;
}

inline json solve_ma_json(const SncModel& m, const SolveMaResult& r) {
  json j;
  j["t_star"] = ratvec_json(r.t_star);
  j["measure"] = measure_json(m, r.measure);
  j["objective"] = format_double(r.objective);
  return j;
}

}  // namespace kstab
