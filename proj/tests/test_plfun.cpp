#include "kstab/corpus.hpp"
#include "kstab/plfun.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace kstab;

namespace {

SncModel m1() {
  return SncModel::trivial({0, Rat(2)}).add_fiber_curve("H_x").blowup({"E0", "H_x"}, "E1");
}

}  // namespace

TEST_CASE("normalization lifts D above the fiber") {
  auto m = m1();
  SECTION("zero divisor needs one fiber") {
    auto [dn, c] = normalize_ge_fiber(m, VerticalDivisor(2));
    CHECK(c == Rat(1));
    CHECK(dn.coeffs == RatVec{Rat(1), Rat(1)});
  }
  SECTION("D = E1") {
    auto [dn, c] = normalize_ge_fiber(m, VerticalDivisor(RatVec{Rat(0), Rat(1)}));
    CHECK(c == Rat(1));
    CHECK(dn.coeffs == RatVec{Rat(1), Rat(2)});
  }
  SECTION("the fiber itself is already normalized") {
    auto [dn, c] = normalize_ge_fiber(m, VerticalDivisor(RatVec{Rat(1), Rat(1)}));
    CHECK(c == Rat(0));
  }
}

TEST_CASE("envelope fixtures") {
  auto m = m1();
  SECTION("D = E0 + 2E1 hits the Lelong bound on E1") {
    auto env = envelope(m, VerticalDivisor(RatVec{Rat(1), Rat(2)}));
    CHECK(env.envelope == RatVec{Rat(1), Rat(1)});
    CHECK(env.f_values == RatVec{Rat(1), Rat(2)});
    CHECK(env.sigma == RatVec{Rat(0), Rat(1)});
    CHECK(env.shift == Rat(0));
  }
  SECTION("nef input keeps the envelope equal to f") {
    auto env = envelope(m, VerticalDivisor(RatVec{Rat(1), Rat(1)}));
    CHECK(env.envelope == env.f_values);
    CHECK(env.envelope == RatVec{Rat(1), Rat(1)});
  }
  SECTION("constants on the trivial model") {
    auto t = SncModel::trivial({0, Rat(2)});
    auto env = envelope(t, VerticalDivisor(RatVec{Rat(-3)}));
    CHECK(env.envelope == RatVec{Rat(-3)});
  }
}

TEST_CASE("Monge-Ampere measures of envelopes") {
  auto m = m1();
  SECTION("mass escapes from the negative-part vertex") {
    auto mu = ma_envelope(m, VerticalDivisor(RatVec{Rat(1), Rat(2)}));
    REQUIRE(mu.atoms.size() == 2);
    CHECK(mu.atoms[0].mass == Rat(1));
    CHECK(mu.atoms[1].mass == Rat(0));
    CHECK_FALSE(mu.atoms[0].point.center.has_value());
  }
  SECTION("nef class splits mass by restricted volumes") {
    auto mu = ma_envelope(m, VerticalDivisor(RatVec{Rat(1), Rat(0)}));
    CHECK(mu.atoms[0].mass == Rat(1, 2));
    CHECK(mu.atoms[1].mass == Rat(1, 2));
  }
  SECTION("trivial model concentrates at the trivial valuation") {
    auto t = SncModel::trivial({1, Rat(3)});
    auto mu = ma_envelope(t, VerticalDivisor(RatVec{Rat(5)}));
    REQUIRE(mu.atoms.size() == 1);
    CHECK(mu.atoms[0].mass == Rat(1));
  }
}

TEST_CASE("orthogonality and mass-sum identities on fixtures") {
  auto m = m1();
  CHECK(orthogonality_defect(m, VerticalDivisor(RatVec{Rat(1), Rat(2)})) == Rat(0));
  CHECK(orthogonality_defect(m, VerticalDivisor(RatVec{Rat(1), Rat(1)})) == Rat(0));
  CHECK(mass_sum_check(m, VerticalDivisor(RatVec{Rat(1), Rat(2)})) == Rat(0));
  auto t = SncModel::trivial({0, Rat(2)});
  CHECK(mass_sum_check(t, VerticalDivisor(RatVec{Rat(0)})) == Rat(0));
}

TEST_CASE("exact identities on random models") {
  Corpus corpus(11);
  for (int it = 0; it < 300; ++it) {
    auto m = corpus.random_model();
    auto d = corpus.random_divisor(m);
    CHECK(orthogonality_defect(m, d) == Rat(0));
    CHECK(mass_sum_check(m, d) == Rat(0));
    auto mu = ma_envelope(m, d);
    Rat total = 0;
    for (const auto& a : mu.atoms) {
      CHECK(a.mass >= 0);
      total += a.mass;
    }
    CHECK(total == Rat(1));
  }
}

TEST_CASE("envelope monotonicity and translation") {
  Corpus corpus(13);
  for (int it = 0; it < 200; ++it) {
    auto m = corpus.random_model();
    auto d = corpus.random_divisor(m);
    auto env = envelope(m, d);

    // monotone: raising one coefficient never lowers the envelope
    VerticalDivisor dup = d;
    std::size_t j = static_cast<std::size_t>(corpus.pick(0, static_cast<int>(d.coeffs.size()) - 1));
    dup.coeffs[j] += corpus.pick(1, 3);
    auto envup = envelope(m, dup);
    for (std::size_t i = 0; i < env.envelope.size(); ++i) CHECK(envup.envelope[i] >= env.envelope[i]);

    // translation by c fibers shifts every vertex value by c
    Rat c(corpus.pick(-3, 3));
    VerticalDivisor dsh = d;
    for (std::size_t i = 0; i < dsh.coeffs.size(); ++i) dsh.coeffs[i] += c * m.components()[i].b;
    auto envsh = envelope(m, dsh);
    for (std::size_t i = 0; i < env.envelope.size(); ++i)
      CHECK(envsh.envelope[i] == env.envelope[i] + c);

    // the envelope never exceeds f and obeys the Lelong bound
    for (std::size_t i = 0; i < env.envelope.size(); ++i) {
      CHECK(env.envelope[i] <= env.f_values[i]);
      CHECK(env.sigma[i] >= 0);
    }
  }
}

TEST_CASE("restricted volume computed two ways") {
  // P.E_i via the positive part equals the lattice restricted_volume directly
  Corpus corpus(29);
  for (int it = 0; it < 100; ++it) {
    auto m = corpus.random_model();
    auto d = corpus.random_divisor(m);
    auto env = envelope(m, d);
    auto lat = m.vertical_lattice();
    auto [dn, c] = normalize_ge_fiber(m, d);
    DivClass u(lat.rank());
    u.coeffs[0] = 1;
    for (std::size_t i = 0; i < dn.coeffs.size(); ++i) u.coeffs[2 + i] = dn.coeffs[i];
    for (std::size_t i = 0; i < m.components().size(); ++i) {
      DivClass e(lat.rank());
      e.coeffs[2 + i] = 1;
      CHECK(lat.intersect(env.zariski.positive, e) == lat.restricted_volume(u, i));
    }
  }
}
