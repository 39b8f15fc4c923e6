#include "kstab/json_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace kstab;

namespace {

#ifndef KSTAB_CLI_PATH
#error "KSTAB_CLI_PATH must point at the kstab executable"
#endif

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string temp_path(const std::string& stem) {
  static int counter = 0;
  return "kstab_test_" + stem + "_" + std::to_string(counter++) + ".tmp";
}

RunResult run_cli(const std::string& args, const std::string& input_text) {
  std::string in_file = temp_path("in");
  std::string out_file = temp_path("out");
  {
    std::ofstream f(in_file);
    f << input_text;
  }
  std::string cmd = std::string(KSTAB_CLI_PATH) + " " + args + " " + in_file +
                    " > " + out_file + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(out_file);
  std::stringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  std::remove(in_file.c_str());
  std::remove(out_file.c_str());
  return r;
}

const char* kM1Divisor = R"({
  "model": {"curve": {"genus": 0, "degree_alpha": 2},
            "steps": [{"support": ["E0"], "new_label": "E1"}]},
  "coeffs": ["1", "2"]
})";

const char* kBetaP1 = R"({
  "oracle": {"backend": "curve", "curve": {"genus": 0, "V": 2}},
  "valuations": [{"label": "F", "A_X": 1, "r": 1}],
  "xi": ["1"]
})";

}  // namespace

TEST_CASE("rational parsing and formatting round-trips") {
  CHECK(format_rat(parse_rat("3/4")) == "3/4");
  CHECK(format_rat(parse_rat("-6/8")) == "-3/4");
  CHECK(format_rat(parse_rat("5")) == "5");
  CHECK(format_rat(Rat(0)) == "0");
  CHECK_THROWS_AS(parse_rat("1/0"), InputError);
  CHECK_THROWS_AS(parse_rat("a/b"), InputError);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("lattice JSON round-trip") {
  RatMat form(2, 2);
  form.at(0, 0) = 1;
  form.at(1, 1) = -1;
  IntersectionLattice lat({"H", "E"}, form,
                          {{"E", DivClass(RatVec{Rat(0), Rat(1)})}});
  auto j = lattice_json(lat);
  auto back = lattice_from_json(j);
  CHECK(back.labels() == lat.labels());
  CHECK(back.form().at(1, 1) == Rat(-1));
  CHECK(back.test_curves().size() == 1);
  CHECK(lattice_json(back) == j);
}

TEST_CASE("model JSON round-trip") {
  json j = json::parse(kM1Divisor);
  auto m = model_from_json(j["model"]);
  CHECK(m.components().size() == 2);
  auto mj = model_json(m);
  CHECK(mj["components"][1]["b"] == 1);
  CHECK(mj["components"][1]["ordK"] == 1);
  CHECK(mj["lattice"]["labels"].size() == 5);
}

TEST_CASE("cli: invariants fixture prints exact zeros") {
  auto r = run_cli("invariants", kM1Divisor);
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(r.out);
  CHECK(j["DF"]["exact"] == "0");
  CHECK(j["M_NA"]["exact"] == "0");
  CHECK(j["E_A"]["exact"] == "1");
  CHECK(j["E_K"]["exact"] == "-1");
  CHECK(j["sbar"]["exact"] == "1");
}

TEST_CASE("cli: zariski, volume and restricted volume") {
  const char* lattice = R"({
    "lattice": {"labels": ["H", "E"],
                "form": [["1", "0"], ["0", "-1"]],
                "test_curves": [{"label": "E", "coeffs": ["0", "1"]},
                                 {"label": "H-E", "coeffs": ["1", "-1"]}]},
    "u": ["1", "1"], "curve": "E"})";
  auto z = run_cli("zariski", lattice);
  REQUIRE(z.exit_code == 0);
  auto zj = json::parse(z.out);
  CHECK(zj["is_pseff"] == true);
  CHECK(zj["is_big"] == true);
  CHECK(zj["positive"] == json::array({"1", "0"}));
  REQUIRE(zj["negative"].size() == 1);
  CHECK(zj["negative"][0]["curve"] == "E");
  CHECK(zj["negative"][0]["sigma"] == "1");

  auto v = run_cli("volume", lattice);
  REQUIRE(v.exit_code == 0);
  CHECK(json::parse(v.out)["volume"] == "1");

  auto rv = run_cli("restricted-volume", lattice);
  REQUIRE(rv.exit_code == 0);
  CHECK(json::parse(rv.out)["restricted_volume"] == "0");
}

TEST_CASE("cli: build-model, envelope, ma-measure, orthogonality") {
  auto bm = run_cli("build-model", json::parse(kM1Divisor)["model"].dump());
  REQUIRE(bm.exit_code == 0);
  // a bare {"E0"} center registers a fresh fiber curve with a generated label
  CHECK(json::parse(bm.out)["fiber_curves"] == json::array({"H_auto0"}));

  auto env = run_cli("envelope", kM1Divisor);
  REQUIRE(env.exit_code == 0);
  auto ej = json::parse(env.out);
  CHECK(ej["envelope"] == json::array({"1", "1"}));
  CHECK(ej["sigma"] == json::array({"0", "1"}));

  auto ma = run_cli("ma-measure", kM1Divisor);
  REQUIRE(ma.exit_code == 0);
  auto mj = json::parse(ma.out);
  REQUIRE(mj["atoms"].size() == 2);
  CHECK(mj["atoms"][0]["mass"] == "1");
  CHECK(mj["atoms"][0]["center"].is_null());
  CHECK(mj["atoms"][1]["mass"] == "0");
  CHECK(mj["atoms"][1]["center"] == "H_auto0");

  auto orth = run_cli("orthogonality", kM1Divisor);
  REQUIRE(orth.exit_code == 0);
  auto oj = json::parse(orth.out);
  CHECK(oj["orthogonality_defect"] == "0");
  CHECK(oj["mass_sum_defect"] == "0");
}

TEST_CASE("cli: beta fixture is numerically zero") {
  auto r = run_cli("beta", kBetaP1);
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(r.out);
  CHECK(std::fabs(std::stod(j["beta"].get<std::string>())) < 1e-5);
  CHECK(std::stod(j["energy"].get<std::string>()) == Catch::Approx(1.0).margin(1e-6));
  CHECK(j["entropy"]["exact"] == "1");
}

TEST_CASE("cli: solve-ma") {
  const char* input = R"({
    "model": {"curve": {"genus": 0, "degree_alpha": 2},
              "steps": [{"support": ["E0"], "new_label": "E1"}]},
    "xi": ["1/2", "1/2"]})";
  auto r = run_cli("solve-ma", input);
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(r.out);
  CHECK(j["measure"]["atoms"][0]["mass"] == "1/2");
  CHECK(j["measure"]["atoms"][1]["mass"] == "1/2");
}

TEST_CASE("cli: stability scan in json and csv") {
  const char* input = R"({
    "problem": {"oracle": {"backend": "curve", "curve": {"genus": 1, "V": 1}},
                "valuations": [{"label": "F", "A_X": 1, "r": 1},
                                {"label": "G", "A_X": 1, "r": 1}],
                "xi": ["1/2", "1/2"]},
    "grid": [["1/4", "3/4"], ["1/2", "1/2"], ["3/4", "1/4"]]})";
  auto r = run_cli("stability-scan", input);
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(r.out);
  REQUIRE(j["rows"].size() == 3);
  CHECK(j.contains("min_ratio"));
  CHECK(std::stod(j["min_ratio"].get<std::string>()) > 0.0);

  auto c = run_cli("stability-scan --format csv", input);
  REQUIRE(c.exit_code == 0);
  CHECK(c.out.rfind("xi,beta,energy,ratio,error\n", 0) == 0);
  // header plus 3 rows plus trailing newline
  CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 4);
}

TEST_CASE("cli: error handling and exit codes") {
  SECTION("empty input") {
    auto r = run_cli("invariants", "");
    CHECK(r.exit_code == 2);
    CHECK(json::parse(r.out)["error"]["kind"] == "input");
  }
  SECTION("malformed JSON") {
    auto r = run_cli("invariants", "{not json");
    CHECK(r.exit_code == 2);
  }
  SECTION("missing field") {
    auto r = run_cli("invariants", R"({"model": {"curve": {"genus": 0, "degree_alpha": 1}}})");
    CHECK(r.exit_code == 2);
    CHECK(json::parse(r.out)["error"]["detail"].get<std::string>().find("coeffs") !=
          std::string::npos);
  }
  SECTION("semantic input error: coefficient count mismatch") {
    auto r = run_cli("invariants",
                     R"({"model": {"curve": {"genus": 0, "degree_alpha": 2}}, "coeffs": ["1","2"]})");
    CHECK(r.exit_code == 2);
  }
  SECTION("invalid beta problem") {
    auto r = run_cli("beta", R"({
      "oracle": {"backend": "curve", "curve": {"genus": 0, "V": 2}},
      "valuations": [{"label": "F", "A_X": 1, "r": 1}],
      "xi": ["1/2"]})");
    CHECK(r.exit_code == 2);
  }
  SECTION("unknown subcommand") {
    auto r = run_cli("no-such-command", "{}");
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("cli: output is deterministic") {
  auto r1 = run_cli("beta", kBetaP1);
  auto r2 = run_cli("beta", kBetaP1);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(r1.out == r2.out);

  auto i1 = run_cli("invariants", kM1Divisor);
  auto i2 = run_cli("invariants", kM1Divisor);
  CHECK(i1.out == i2.out);
}
