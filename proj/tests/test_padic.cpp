#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "padicgeom/errors.hpp"
#include "padicgeom/padic.hpp"
#include "padicgeom/rng.hpp"

using namespace padicgeom;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter rng streams are reproducible and distinct") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
  CounterRng r(1, 0);
  for (int i = 0; i < 1000; ++i) CHECK(r.uniform_below(7) < 7);
}

TEST_CASE("ring construction validates configuration") {
  CHECK_THROWS_AS(ResidueRing(4, 5), InvalidConfig);
  CHECK_THROWS_AS(ResidueRing(2, 2), InvalidConfig);
  CHECK_THROWS_AS(ResidueRing(2, 63), InvalidConfig);
  CHECK(ResidueRing::max_precision(2) == 62);
  CHECK(ResidueRing::max_precision(3) == 39);
  CHECK(PadicConfig(3).precision() == 39);
  CHECK_THROWS_AS(PadicConfig(2, 0, Rational(1)), InvalidConfig);
}

TEST_CASE("valuation examples") {
  ResidueRing ring(3, 8);
  CHECK(valuation(RElement(ring, 45)) == ValExp::finite(2));
  CHECK(valuation(RElement(ring, 1)) == ValExp::finite(0));
  CHECK(valuation(RElement(ring, 0)) == ValExp::at_least_precision());
  CHECK_THROWS_AS(ValExp::at_least_precision().value(), PrecisionError);
  CHECK(ValExp::finite(5) < ValExp::at_least_precision());
}

TEST_CASE("multiply examples") {
  ResidueRing r2(2, 4);
  CHECK(multiply(RElement(r2, 3), RElement(r2, 5)).residue() == 15);
  const RElement sq = multiply(RElement(r2, 4), RElement(r2, 4));
  CHECK(sq.residue() == 0);
  CHECK(valuation(sq) == ValExp::at_least_precision());
  ResidueRing r5(5, 6);
  CHECK(valuation(multiply(RElement(r5, 10), RElement(r5, 25))) == ValExp::finite(3));
  CHECK_THROWS_AS(RElement(r2, 1) + RElement(r5, 1), ConfigMismatch);
}

TEST_CASE("valuation is additive and ultrametric on samples") {
  ResidueRing ring(3, 12);
  CounterRng rng(5, 0);
  for (int i = 0; i < 5000; ++i) {
    RElement x = RElement::from_residue(ring, sample_uniform(ring, SampleRegion::R, rng));
    RElement y = RElement::from_residue(ring, sample_uniform(ring, SampleRegion::R, rng));
    const ValExp vx = valuation(x), vy = valuation(y), vs = valuation(x + y), vp = valuation(x * y);
    CHECK(vs >= std::min(vx, vy));
    if (vx.is_finite() && vy.is_finite()) {
      if (vx != vy) CHECK(vs == std::min(vx, vy));
      if (vx.value() + vy.value() < ring.precision()) CHECK(vp == ValExp::finite(vx.value() + vy.value()));
    }
  }
}

TEST_CASE("is_square examples") {
  ResidueRing r5(5, 10), r3(3, 10), r2(2, 20);
  CHECK(is_square(KElement::from(RElement(r5, 4))) == Ternary::True);
  CHECK(is_square(KElement::from(RElement(r3, 10))) == Ternary::True);
  CHECK(is_square(KElement::from(RElement(r5, 10))) == Ternary::False);
  CHECK(is_square(KElement::from(RElement(r3, 30))) == Ternary::False);
  CHECK(is_square(KElement::from(RElement(r2, 17))) == Ternary::True);
  CHECK(is_square(KElement::from(RElement(r2, 3))) == Ternary::False);
  CHECK(is_square(KElement::zero(r2)) == Ternary::Indeterminate);
}

TEST_CASE("is_square agrees with exhaustive squaring") {
  for (auto [p, n] : std::vector<std::pair<Residue, int>>{{2, 16}, {3, 10}, {5, 6}, {7, 5}, {251, 3}}) {
    if (ResidueRing::max_precision(p) < n) continue;
    ResidueRing ring(p, n);
    std::set<Residue> squares;
    for (Residue x = 0; x < ring.modulus(); ++x) squares.insert(ring.mul(x, x));
    int decided = 0;
    for (Residue a = 1; a < ring.modulus(); ++a) {
      const Ternary t = is_square(KElement::from(RElement::from_residue(ring, a)));
      if (t == Ternary::True) CHECK(squares.count(a) == 1);
      if (t == Ternary::False) CHECK(squares.count(a) == 0);
      if (t != Ternary::Indeterminate) ++decided;
      if (ring.is_unit(a)) CHECK(t != Ternary::Indeterminate);
    }
    CHECK(decided > 0);
  }
}

TEST_CASE("sqrt_unit lifts square roots") {
  SUBCASE("p = 2 exhaustive at N = 14") {
    ResidueRing ring(2, 14);
    const Residue half = ring.modulus() / 2;
    for (Residue u = 1; u < ring.modulus(); u += 8) {
      const Residue r = sqrt_unit(ring, u, ring.precision());
      CHECK(ring.mul(r, r) % half == u % half);
    }
    CHECK_THROWS(sqrt_unit(ring, 3, ring.precision()));
  }
  SUBCASE("odd p exhaustive") {
    ResidueRing ring(5, 6);
    for (Residue u = 1; u < ring.modulus(); ++u) {
      if (!ring.is_unit(u) || is_square_unit(u, 5, 6) != Ternary::True) continue;
      const Residue r = sqrt_unit(ring, u, 6);
      CHECK(ring.mul(r, r) == u);
    }
  }
  SUBCASE("full precision random squares") {
    for (Residue p : {2, 3, 7, 1000003}) {
      ResidueRing ring(p, ResidueRing::max_precision(p));
      CounterRng rng(p, 1);
      for (int i = 0; i < 200; ++i) {
        const Residue x = sample_uniform(ring, SampleRegion::Unit, rng);
        const Residue u = ring.mul(x, x);
        const Residue r = sqrt_unit(ring, u, ring.precision());
        if (p == 2)
          CHECK(ring.mul(r, r) % (ring.modulus() / 2) == u % (ring.modulus() / 2));
        else
          CHECK(ring.mul(r, r) == u);
      }
    }
  }
}

// Chi-squared goodness of fit of the valuation histogram against (1 - e) e^k,
// buckets 0..K-1 plus the tail; critical values at significance 1e-3.
TEST_CASE("Haar valuation law") {
  for (auto [p, buckets, critical] : std::vector<std::tuple<Residue, int, double>>{{2, 7, 24.32}, {3, 5, 20.52}}) {
    PadicConfig cfg(p);
    CounterRng rng(11, p);
    const int samples = 100000;
    std::vector<double> observed(static_cast<std::size_t>(buckets) + 1, 0);
    for (int i = 0; i < samples; ++i) {
      const ValExp v = cfg.ring.valuation(sample_uniform(cfg.ring, SampleRegion::R, rng));
      const int k = v.is_finite() ? std::min(v.value(), buckets) : buckets;
      observed[static_cast<std::size_t>(k)] += 1;
    }
    const double eps = 1.0 / static_cast<double>(p);
    double chi2 = 0;
    for (int k = 0; k <= buckets; ++k) {
      const double prob = k < buckets ? (1 - eps) * std::pow(eps, k) : std::pow(eps, buckets);
      const double expected = prob * samples;
      chi2 += std::pow(observed[static_cast<std::size_t>(k)] - expected, 2) / expected;
    }
    CHECK(chi2 < critical);
  }
}

TEST_CASE("expected norm of a uniform vector") {
  for (Residue p : {2, 3}) {
    PadicConfig cfg(p);
    const double eps = 1.0 / static_cast<double>(p);
    for (int n : {1, 2, 3}) {
      CounterRng rng(3, static_cast<std::uint64_t>(n));
      const int samples = 100000;
      double sum = 0, sum2 = 0;
      for (int i = 0; i < samples; ++i) {
        const ValExp v = min_valuation(cfg.ring, sample_r_vector(cfg.ring, n, rng));
        const double x = v.is_finite() ? std::pow(eps, v.value()) : 0.0;
        sum += x;
        sum2 += x * x;
      }
      const double mean = sum / samples;
      const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
      const double expected = (1 - std::pow(eps, n)) / (1 - std::pow(eps, n + 1));
      CHECK(std::abs(mean - expected) <= 3 * se);
    }
  }
}

TEST_CASE("sphere samples have unit norm") {
  ResidueRing ring(2, 30);
  CounterRng rng(9, 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(ring.valuation(sample_uniform(ring, SampleRegion::Unit, rng)) == ValExp::finite(0));
    CHECK(min_valuation(ring, sample_sphere(ring, 1, rng)) == ValExp::finite(0));
    CHECK(min_valuation(ring, sample_sphere(ring, 3, rng)) == ValExp::finite(0));
  }
}
