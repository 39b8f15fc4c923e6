// kstab: batch calculator for non-Archimedean K-stability invariants.
// Reads a JSON problem file, runs one subcommand, writes a JSON (or CSV)
// report. Exit codes: 0 ok, 2 input error, 3 numeric failure, 4 violated
// exact identity.

#include "kstab/beta.hpp"
#include "kstab/invariants.hpp"
#include "kstab/json_io.hpp"
#include "kstab/lattice.hpp"
#include "kstab/model.hpp"
#include "kstab/plfun.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using kstab::json;

struct Options {
  std::string input;
  std::string output;       // empty = stdout
  std::string format = "json";
  std::optional<double> tol;
  unsigned long long seed = 0;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("input", opt.input, "input JSON file")->required();
  cmd->add_option("-o,--output", opt.output, "output file (default stdout)");
  cmd->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--tol", opt.tol, "override optimizer tolerance");
  cmd->add_option("--seed", opt.seed, "seed for randomized corpora");
}

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kstab::InputError("cannot open input file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw kstab::InputError(std::string("malformed JSON: ") + e.what());
  }
  return j;
}

void emit(const Options& opt, const std::string& text) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (opt.output.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(opt.output);
  if (!out) throw kstab::InputError("cannot open output file '" + opt.output + "'");
  out << body;
}

void emit_json(const Options& opt, const json& j) { emit(opt, j.dump(2)); }

kstab::OptConfig opt_config(const Options& opt) {
  kstab::OptConfig c;
  if (opt.tol) c.tol = *opt.tol;
  return c;
}

int run(const std::string& cmd, const Options& opt) {
  json in = load(opt.input);
  if (cmd == "zariski" || cmd == "volume" || cmd == "restricted-volume") {
    auto lat = kstab::lattice_from_json(kstab::require(in, "lattice"));
    kstab::DivClass u(kstab::ratvec_from_json(kstab::require(in, "u")));
    if (cmd == "zariski") {
      emit_json(opt, kstab::zariski_json(lat, lat.zariski(u)));
    } else if (cmd == "volume") {
      auto z = lat.zariski(u);
      json j;
      j["volume"] = kstab::rat_json(lat.volume(u));
      j["is_pseff"] = z.is_pseff;
      j["is_big"] = z.is_big;
      emit_json(opt, j);
    } else {
      auto label = kstab::require(in, "curve").get<std::string>();
      std::size_t idx = lat.test_curves().size();
      for (std::size_t i = 0; i < lat.test_curves().size(); ++i)
        if (lat.test_curves()[i].label == label) idx = i;
      if (idx == lat.test_curves().size())
        throw kstab::InputError("unknown test curve '" + label + "'");
      emit_json(opt, json{{"restricted_volume", kstab::rat_json(lat.restricted_volume(u, idx))}});
    }
    return 0;
  }
  if (cmd == "build-model") {
    emit_json(opt, kstab::model_json(kstab::model_from_json(in)));
    return 0;
  }
  if (cmd == "envelope" || cmd == "ma-measure" || cmd == "orthogonality" || cmd == "invariants") {
    auto di = kstab::divisor_from_json(in);
    if (cmd == "envelope") {
      emit_json(opt, kstab::envelope_json(di.model, kstab::envelope(di.model, di.divisor)));
    } else if (cmd == "ma-measure") {
      emit_json(opt, kstab::measure_json(di.model, kstab::ma_envelope(di.model, di.divisor)));
    } else if (cmd == "orthogonality") {
      json j;
      j["orthogonality_defect"] = kstab::rat_json(kstab::orthogonality_defect(di.model, di.divisor));
      j["mass_sum_defect"] = kstab::rat_json(kstab::mass_sum_check(di.model, di.divisor));
      emit_json(opt, j);
    } else {
      emit_json(opt, kstab::invariant_report_json(kstab::report(di.model, di.divisor)));
    }
    return 0;
  }
  if (cmd == "beta") {
    auto p = kstab::beta_problem_from_json(in);
    if (opt.tol) p.opt.tol = *opt.tol;
    emit_json(opt, kstab::beta_report_json(kstab::beta(p)));
    return 0;
  }
  if (cmd == "solve-ma") {
    auto model = kstab::model_from_json(kstab::require(in, "model"));
    auto xi = kstab::ratvec_from_json(kstab::require(in, "xi"));
    auto r = kstab::solve_ma_divisorial(model, xi, opt_config(opt));
    emit_json(opt, kstab::solve_ma_json(model, r));
    return 0;
  }
  if (cmd == "stability-scan") {
    auto p = kstab::beta_problem_from_json(kstab::require(in, "problem"));
    if (opt.tol) p.opt.tol = *opt.tol;
    std::vector<kstab::RatVec> grid;
    for (const auto& gj : kstab::require(in, "grid")) grid.push_back(kstab::ratvec_from_json(gj));
    auto s = kstab::stability_scan(p, grid);
    if (opt.format == "csv")
      emit(opt, kstab::scan_csv(s));
    else
      emit_json(opt, kstab::scan_json(s));
    return 0;
  }
  throw kstab::InputError("unknown command '" + cmd + "'");
}

int fail(const Options& opt, const std::string& kind, const std::string& detail, int code) {
  json j{{"error", {{"kind", kind}, {"detail", detail}}}};
  try {
    emit_json(opt, j);
  } catch (...) {
    std::cerr << j.dump(2) << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-Archimedean K-stability calculator"};
  app.require_subcommand(1);
  const std::vector<std::string> names = {
      "zariski", "volume", "restricted-volume", "build-model", "envelope", "ma-measure",
      "orthogonality", "invariants", "beta", "solve-ma", "stability-scan"};
  const std::vector<std::string> descs = {
      "Zariski decomposition of a class",
      "volume of a class",
      "restricted volume along a test curve",
      "build an SNC model from a blow-up script",
      "psh envelope of a PL function",
      "Monge-Ampere measure of an envelope",
      "orthogonality and mass-sum defects",
      "DF/Mabuchi/J invariants and envelope functionals",
      "beta invariant of a divisorial measure",
      "divisorial Monge-Ampere solver",
      "grid scan of beta / energy ratios"};
  std::vector<Options> opts(names.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* c = app.add_subcommand(names[i], descs[i]);
    add_common(c, opts[i]);
    cmds.push_back(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!cmds[i]->parsed()) continue;
    const Options& opt = opts[i];
    try {
      return run(names[i], opt);
    } catch (const kstab::InputError& e) {
      return fail(opt, "input", e.what(), 2);
    } catch (const kstab::NumericError& e) {
      return fail(opt, "numeric", e.what(), 3);
    } catch (const kstab::IdentityError& e) {
      return fail(opt, "identity", e.what(), 4);
    } catch (const std::exception& e) {
      return fail(opt, "input", e.what(), 2);
    }
  }
  return 2;
}
