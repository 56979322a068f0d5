#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padicgeom/errors.hpp"
#include "padicgeom/fewnomial.hpp"
#include "padicgeom/volumes.hpp"

using namespace padicgeom;

namespace {

McConfig make_mc(unsigned p, std::uint64_t samples, std::uint64_t seed = 1) {
  McConfig mc{PadicConfig(p)};
  mc.samples = samples;
  mc.seed = seed;
  return mc;
}

bool within(const Estimate& e, const Rational& target, double sigmas = 3) {
  return std::abs(to_double(e.mean - target)) <= sigmas * e.std_error;
}

// Monte Carlo against a truncated series value with certified tail.
bool agrees(const Estimate& e, const SeriesValue& s, double sigmas = 3) {
  return std::abs(to_double(e.mean - s.value)) <= sigmas * e.std_error + to_double(s.tail_bound);
}

Rational eps_of(unsigned p) { return Rational(1, p); }

Rational abs_p(long m, unsigned p) {
  Rational r = 1;
  while (m % static_cast<long>(p) == 0) {
    m /= static_cast<long>(p);
    r /= p;
  }
  return r;
}

Support box(std::vector<int> xs, std::vector<int> ys) {
  std::vector<Exponent> pts;
  for (int a : xs)
    for (int b : ys) pts.push_back({a, b});
  return Support(2, pts);
}

Support box_0_1_99_100() { return box({0, 1, 99, 100}, {0, 1, 99, 100}); }

// max_{j>=2} |a_j - a_1| eps^{v (a_j - a_1 - 1)} for sorted univariate exponents.
Rational univariate_j(std::vector<int> a, int v, unsigned p) {
  std::sort(a.begin(), a.end());
  Rational best = 0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    const int d = a[j] - a[0];
    const Rational term = abs_p(d, p) * epsilon_pow(Rational(p), static_cast<long>(v) * (d - 1));
    if (term > best) best = term;
  }
  return best;
}

Residue eval(const ResidueRing& ring, const Polynomial& f, const std::vector<Residue>& x) {
  Residue s = 0;
  for (const Term& t : f) {
    Residue m = t.coef;
    for (std::size_t i = 0; i < x.size(); ++i) m = ring.mul(m, ring.pow(x[i], static_cast<std::uint64_t>(t.exps[i])));
    s = ring.add(s, m);
  }
  return s;
}

// (x - r1)(x - r2) with coefficients reduced mod p^N.
Polynomial quadratic_with_roots(const ResidueRing& ring, Residue r1, Residue r2) {
  return {{{0}, ring.mul(r1, r2)}, {{1}, ring.neg(ring.add(r1, r2))}, {{2}, 1}};
}

const std::vector<std::vector<int>> kFixtures = {{0, 1}, {0, 2}, {0, 1, 3}, {0, 1, 2, 3}};

}  // namespace

TEST_CASE("support validation") {
  CHECK_THROWS_AS(Support(2, {{0, 0}, {1, 1}, {2, 2}}), UnsupportedSupport);
  CHECK_THROWS_AS(Support::univariate({0, 0, 1}), UnsupportedSupport);
  CHECK_THROWS_AS(Support::univariate({3}), UnsupportedSupport);
  CHECK_THROWS_AS(Support(2, {{0, 0}, {1}}), UnsupportedSupport);
  CHECK_NOTHROW(Support(2, {{0, 0}, {1, 0}, {0, 1}}));
}

TEST_CASE("analyze_support examples") {
  const PolytopeInfo big = analyze_support(box_0_1_99_100());
  CHECK(big.is_rectangular);
  CHECK(big.vertices.size() == 4);
  for (const Exponent& v : big.vertices) CHECK(big.gap_free_at.at(v));
  CHECK(big.minimal_vertex == Exponent{0, 0});

  const PolytopeInfo quad = analyze_support(Support::univariate({0, 2}));
  CHECK(quad.is_rectangular);
  CHECK_FALSE(quad.gap_free_at.at({0}));
  CHECK_FALSE(quad.gap_free_at.at({2}));

  const PolytopeInfo skew = analyze_support(Support(2, {{0, 0}, {1, 0}, {0, 1}, {2, 2}}));
  CHECK_FALSE(skew.is_rectangular);

  const PolytopeInfo half = analyze_support(box({0, 2, 3}, {0, 1}));
  CHECK(half.is_rectangular);
  CHECK_FALSE(half.gap_free_at.at({0, 0}));
  CHECK_FALSE(half.gap_free_at.at({0, 1}));
  CHECK(half.gap_free_at.at({3, 0}));
  CHECK(half.gap_free_at.at({3, 1}));

  const PolytopeInfo simplex = analyze_support(Support(2, {{0, 0}, {1, 0}, {0, 1}, {3, 0}, {0, 3}, {2, 1}}));
  CHECK_FALSE(simplex.is_rectangular);
  CHECK(simplex.simplex_type);
}

TEST_CASE("jacobian examples") {
  for (unsigned p : {2u, 3u, 5u}) {
    const Rational q(p);
    for (int v = 0; v <= 6; ++v) CHECK(jacobian_psi_A(Support::univariate({0, 1}), {v}, p, q) == 1);
    const Rational quad = jacobian_psi_A(Support::univariate({0, 2}), {1}, p, q);
    CHECK(quad == (p == 2 ? eps_of(p) * eps_of(p) : eps_of(p)));
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; b <= 6; ++b) CHECK(jacobian_psi_A(box_0_1_99_100(), {a, b}, p, q) == 1);
  }
}

TEST_CASE("jacobian matches the univariate formula") {
  const std::vector<std::vector<int>> supports = {{0, 2}, {0, 3}, {1, 3, 4}, {0, 2, 5, 6}, {5, 6, 100, 999, 1001},
                                                  {0, 4, 12}};
  for (unsigned p : {2u, 3u, 5u})
    for (const auto& a : supports)
      for (int v = 0; v <= 6; ++v) CHECK(jacobian_psi_A(Support::univariate(a), {v}, p, Rational(p)) == univariate_j(a, v, p));
}

TEST_CASE("jacobian trichotomy on rectangular supports") {
  const std::vector<Support> supports = {
      Support::univariate({0, 1}),  Support::univariate({0, 2}),    Support::univariate({0, 1, 3}),
      Support::univariate({0, 3, 4}), box({0, 1}, {0, 1}),          box({0, 2}, {0, 1}),
      box({0, 2, 3}, {0, 1}),        box({0, 1, 5}, {0, 1, 2}),      box({0, 1, 99, 100}, {0, 1, 99, 100}),
      box({0, 3}, {0, 2}),
  };
  for (unsigned p : {2u, 3u, 5u}) {
    for (const Support& a : supports) {
      const PolytopeInfo info = analyze_support(a);
      REQUIRE(info.is_rectangular);
      bool all_one = true;
      const int n = a.n();
      const int cells = n == 1 ? 7 : 49;
      for (int c = 0; c < cells; ++c) {
        std::vector<int> v = n == 1 ? std::vector<int>{c} : std::vector<int>{c / 7, c % 7};
        const Rational j = jacobian_psi_A(a, v, p, Rational(p));
        CHECK(j <= 1);
        CHECK(j > 0);
        all_one = all_one && j == 1;
      }
      CHECK(all_one == info.gap_free_at.at(info.minimal_vertex));
    }
  }
}

TEST_CASE("series examples") {
  for (unsigned p : {2u, 3u, 5u}) {
    const Rational q(p), eps = eps_of(p);
    const SeriesValue units = expected_zeros_series(Support::univariate({0, 1}), {Region::Unit}, p, q, 30);
    CHECK(units.value == (1 - eps) / (1 + eps));
    CHECK(units.tail_bound == 0);

    const SeriesValue nonzero = expected_zeros_series(Support::univariate({0, 1}), {Region::RNonzero}, p, q, 40);
    CHECK(abs(nonzero.value - 1 / (1 + eps)) <= nonzero.tail_bound);
    CHECK(nonzero.tail_bound < Rational(1, 1000000000));

    const SeriesValue square =
        expected_zeros_series(box_0_1_99_100(), {Region::RNonzero, Region::RNonzero}, p, q, 40);
    // The Jacobian integral over (R \ 0)^2 is 1, and the expectation divides it by |P^2|.
    CHECK(abs(square.value * projective_volume(2, q) - 1) <= square.tail_bound * projective_volume(2, q));
    CHECK(square.tail_bound < Rational(1, 1000000000));
  }
  CHECK_THROWS_AS(
      expected_zeros_series(Support(2, {{0, 0}, {1, 0}, {0, 1}, {2, 2}}), {Region::Unit, Region::Unit}, 3, 3, 10),
      UnsupportedSupport);
}

TEST_CASE("closed form examples") {
  CHECK(closed_form_expected_zeros(Support::univariate({0, 1}), {Region::Unit}, 2, 2).value == Rational(1, 3));

  const ClosedForm intro = closed_form_expected_zeros(Support::univariate({5, 6, 100, 999, 1001}), {Region::KTimes}, 3, 3);
  CHECK(intro.exact);
  CHECK(intro.value == Rational(13, 16));
  const ClosedForm gaps_one =
      closed_form_expected_zeros(Support::univariate({5, 6, 7, 100, 999, 1000}), {Region::KTimes}, 3, 3);
  CHECK(gaps_one.exact);
  CHECK(gaps_one.value == 1);

  const ClosedForm box2 = closed_form_expected_zeros(box_0_1_99_100(), {Region::KTimes, Region::KTimes}, 2, 2);
  CHECK(box2.exact);
  CHECK(box2.value == Rational(9, 7));
  for (long q : {2L, 3L, 4L, 5L, 7L, 9L, 11L}) {
    const Rational qq(q);
    const ClosedForm c = closed_form_expected_zeros(box_0_1_99_100(), {Region::KTimes, Region::KTimes}, 2, qq);
    CHECK(c.value == (qq * qq + 2 * qq + 1) / (qq * qq + qq + 1));
  }

  // Rectangular (K^x)^n formula (1 - eps)(1 + eps)^n / (1 - eps^{n+1}).
  for (unsigned p : {2u, 3u, 5u}) {
    const Rational eps = eps_of(p);
    const ClosedForm c = closed_form_expected_zeros(box({0, 1}, {0, 1}), {Region::KTimes, Region::KTimes}, p, p);
    CHECK(c.value == (1 - eps) * (1 + eps) * (1 + eps) / (1 - eps * eps * eps));
  }

  const ClosedForm half = closed_form_expected_zeros(box({0, 2, 3}, {0, 1}), {Region::KTimes, Region::KTimes}, 3, 3);
  CHECK_FALSE(half.exact);
  const SeriesValue half_series =
      expected_zeros_series(box({0, 2, 3}, {0, 1}), {Region::KTimes, Region::KTimes}, 3, 3, 40);
  CHECK(half_series.value + half_series.tail_bound < half.value);

  CHECK(closed_form_expected_zeros(Support(2, {{0, 0}, {1, 0}, {0, 1}}), {Region::KTimes, Region::KTimes}, 3, 3).value ==
        1);
  CHECK_THROWS_AS(
      closed_form_expected_zeros(Support(2, {{0, 0}, {1, 0}, {0, 1}, {2, 2}}), {Region::KTimes, Region::KTimes}, 3, 3),
      UnsupportedSupport);
}

TEST_CASE("quadratic expectations") {
  for (unsigned p : {2u, 3u, 5u, 7u}) {
    const Rational eps = eps_of(p);
    // -c1/c2 has valuation difference d with probability (1 - eps) eps^|d| / (1 + eps), and its
    // unit part is a square with probability 1/2 (p odd) or 1/4 (p = 2); each hit gives two roots.
    const Rational hit = p == 2 ? Rational(1, 4) : Rational(1, 2);
    const Rational units = 2 * hit * (1 - eps) / (1 + eps);
    const Rational max_ideal = 2 * hit * (1 - eps) / (1 + eps) * eps * eps / (1 - eps * eps);
    const QuadraticExpectations qe = quadratic_expected_zeros(p, Rational(p));
    CHECK(qe.units == units);
    CHECK(qe.max_ideal == max_ideal);
    CHECK(qe.max_ideal_displayed == eps * eps / (1 + eps * eps));
    CHECK(closed_form_expected_zeros(Support::univariate({0, 2}), {Region::Unit}, p, p).value == units);
    CHECK(closed_form_expected_zeros(Support::univariate({0, 2}), {Region::MaxIdealNonzero}, p, p).value ==
          (p == 2 ? 2 * max_ideal : max_ideal));
  }
}

TEST_CASE("series against closed forms on the fixtures") {
  for (unsigned p : {2u, 3u, 5u}) {
    for (const auto& a : kFixtures) {
      for (Region r : {Region::Unit, Region::MaxIdealNonzero, Region::RNonzero, Region::KminusR, Region::KTimes}) {
        const ClosedForm c = closed_form_expected_zeros(Support::univariate(a), {r}, p, p);
        const SeriesValue s = expected_zeros_series(Support::univariate(a), {r}, p, p, 60);
        CHECK(s.tail_bound < Rational(1, 1000000000));
        if (c.exact)
          CHECK(abs(s.value - c.value) <= s.tail_bound);
        else
          CHECK(s.value <= c.value);
      }
    }
    const SeriesValue s = expected_zeros_series(box_0_1_99_100(), {Region::KTimes, Region::KTimes}, p, p, 60);
    const ClosedForm c = closed_form_expected_zeros(box_0_1_99_100(), {Region::KTimes, Region::KTimes}, p, p);
    CHECK(abs(s.value - c.value) <= s.tail_bound);
  }
}

TEST_CASE("unit gaps larger than one") {
  // Gap 2 at odd p and gap 4 at p = 3, 5 are p-adic units; gap 3 at p = 3 is not.
  for (unsigned p : {3u, 5u}) {
    const Rational eps = eps_of(p);
    for (int gap : {2, 4}) {
      const ClosedForm c = closed_form_expected_zeros(Support::univariate({0, gap}), {Region::MaxIdealNonzero}, p, p);
      const SeriesValue s = expected_zeros_series(Support::univariate({0, gap}), {Region::MaxIdealNonzero}, p, p, 60);
      CHECK(c.exact);
      CHECK(abs(s.value - c.value) <= s.tail_bound);
      CHECK(abs(c.value - (1 - eps) * epsilon_pow(Rational(p), gap) / ((1 + eps) * (1 - epsilon_pow(Rational(p), gap)))) ==
            0);
    }
  }
  const ClosedForm c = closed_form_expected_zeros(Support::univariate({0, 3}), {Region::MaxIdealNonzero}, 3, 3);
  const SeriesValue s = expected_zeros_series(Support::univariate({0, 3}), {Region::MaxIdealNonzero}, 3, 3, 60);
  CHECK_FALSE(c.exact);
  CHECK(s.value + s.tail_bound < c.value);
}

TEST_CASE("concentration as the gap grows") {
  for (unsigned p : {2u, 3u, 5u}) {
    Rational previous = 2;
    for (int gap : {1, 2, 4, 8, 16}) {
      const SeriesValue s = expected_zeros_series(Support::univariate({0, gap}), {Region::MaxIdealNonzero}, p, p, 60);
      CHECK(s.value + s.tail_bound < previous);
      previous = s.value - s.tail_bound;
    }
    CHECK(previous < Rational(1, 1000));
  }
}

TEST_CASE("count_roots examples") {
  const ResidueRing ring(3, 20);
  const Polynomial minus_one{{{0}, ring.from_integer(-1)}, {{2}, 1}};
  const Polynomial minus_two{{{0}, ring.from_integer(-2)}, {{2}, 1}};
  const Polynomial minus_p{{{0}, ring.from_integer(-3)}, {{2}, 1}};
  CHECK(count_roots(ring, {minus_one}, {Region::Unit}).count == 2);
  CHECK(count_roots(ring, {minus_one}, {Region::MaxIdealNonzero}).count == 0);
  CHECK(count_roots(ring, {minus_two}, {Region::Unit}).count == 0);
  CHECK(count_roots(ring, {minus_two}, {Region::KTimes}).count == 0);
  const RootCount odd = count_roots(ring, {minus_p}, {Region::KTimes});
  CHECK(odd.count == 0);
  CHECK_FALSE(odd.indeterminate);

  // x^2 - 9 has roots +-3 in the maximal ideal; x^{-2} - 9 has roots +-1/3 outside R.
  const Polynomial nine{{{0}, ring.from_integer(-9)}, {{2}, 1}};
  CHECK(count_roots(ring, {nine}, {Region::MaxIdealNonzero}).count == 2);
  CHECK(count_roots(ring, {nine}, {Region::Unit}).count == 0);
  const Polynomial inverted{{{0}, 1}, {{2}, ring.from_integer(-9)}};
  CHECK(count_roots(ring, {inverted}, {Region::KminusR}).count == 2);
  CHECK(count_roots(ring, {inverted}, {Region::KTimes}).count == 2);
  CHECK(count_roots(ring, {inverted}, {Region::RNonzero}).count == 0);

  // A double root is degenerate at every depth.
  const Polynomial square = quadratic_with_roots(ring, 1, 1);
  CHECK(count_roots(ring, {square}, {Region::Unit}).indeterminate);

  // x = 1, y = 2 and x = 2, y = 1 solve x + y = 3, xy = 2 over units mod 5.
  const ResidueRing r5(5, 20);
  const Polynomial sum{{{1, 0}, 1}, {{0, 1}, 1}, {{0, 0}, r5.from_integer(-3)}};
  const Polynomial prod{{{1, 1}, 1}, {{0, 0}, r5.from_integer(-2)}};
  CHECK(count_roots(r5, {sum, prod}, {Region::Unit, Region::Unit}).count == 2);
  CHECK(count_roots(r5, {sum, prod}, {Region::KTimes, Region::KTimes}).count == 2);
  CHECK(count_roots(r5, {sum, prod}, {Region::MaxIdealNonzero, Region::Unit}).count == 0);
}

TEST_CASE("count_roots on polynomials with planted roots") {
  for (unsigned p : {2u, 3u, 5u}) {
    const ResidueRing ring(p, 24);
    CounterRng rng(17, p);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const int k1 = static_cast<int>(rng.uniform_below(4));
      const int k2 = static_cast<int>(rng.uniform_below(4));
      const Residue u1 = rng.uniform_below(ring.modulus()), u2 = rng.uniform_below(ring.modulus());
      if (!ring.is_unit(u1) || !ring.is_unit(u2)) continue;
      const Residue r1 = ring.mul(ring.p_pow(k1), u1), r2 = ring.mul(ring.p_pow(k2), u2);
      const ValExp gap = ring.valuation(ring.sub(r1, r2));
      if (!gap.is_finite() || gap.value() > 6) continue;
      const Polynomial f = quadratic_with_roots(ring, r1, r2);
      const int in_units = (k1 == 0) + (k2 == 0);
      const int in_max = (k1 > 0) + (k2 > 0);
      CHECK(count_roots(ring, {f}, {Region::Unit}).count == in_units);
      CHECK(count_roots(ring, {f}, {Region::MaxIdealNonzero}).count == in_max);
      CHECK(count_roots(ring, {f}, {Region::KTimes}).count == 2);
      CHECK(count_roots(ring, {f}, {Region::KminusR}).count == 0);
      ++checked;
    }
    CHECK(checked > 50);
  }
}

TEST_CASE("Hensel witnesses vanish to full precision") {
  const std::vector<std::pair<Support, RegionSpec>> cases = {
      {Support::univariate({0, 1, 2, 3}), {Region::Unit}},
      {Support::univariate({0, 1, 3}), {Region::MaxIdealNonzero}},
      {Support::univariate({0, 1, 2, 5}), {Region::RNonzero}},
      {box({0, 1}, {0, 1}), {Region::Unit, Region::Unit}},
      {box({0, 1, 2}, {0, 1}), {Region::RNonzero, Region::RNonzero}},
  };
  for (unsigned p : {2u, 3u, 5u}) {
    const PadicConfig cfg(p);
    const ResidueRing& ring = cfg.ring;
    int roots = 0;
    for (const auto& [support, region] : cases) {
      for (std::uint64_t s = 0; s < 100; ++s) {
        CounterRng rng(99, s);
        const std::vector<Polynomial> system = random_system(ring, support, rng);
        std::vector<RootWitness> witnesses;
        const RootCount c = count_roots(ring, system, region, 0, &witnesses);
        if (c.indeterminate) continue;
        REQUIRE(witnesses.size() == static_cast<std::size_t>(c.count));
        for (const RootWitness& w : witnesses) {
          REQUIRE(w.vanishing.size() == system.size());
          for (std::size_t j = 0; j < system.size(); ++j) {
            CHECK(w.vanishing[j] == ring.precision());
            CHECK(eval(ring, system[j], w.x) == 0);
          }
          ++roots;
        }
      }
    }
    CHECK(roots > 100);
  }
}

TEST_CASE("Monte Carlo examples") {
  const Estimate linear = estimate_expected_zeros_mc(Support::univariate({0, 1}), {Region::Unit}, make_mc(2, 100000));
  CHECK(within(linear, Rational(1, 3)));
  CHECK(linear.discarded == 0);

  const Estimate dense = estimate_expected_zeros_mc(Support::univariate({0, 1, 2, 3}), {Region::KTimes}, make_mc(3, 50000));
  CHECK(within(dense, 1));

  const Estimate big = estimate_expected_zeros_mc(box_0_1_99_100(), {Region::KTimes, Region::KTimes}, make_mc(2, 3000));
  CHECK(within(big, Rational(9, 7)));
  CHECK(big.discarded == 0);
}

TEST_CASE("three-way agreement at moderate sample size") {
  for (unsigned p : {2u, 3u, 5u}) {
    for (const auto& a : kFixtures) {
      for (Region r : {Region::Unit, Region::MaxIdealNonzero, Region::KTimes}) {
        const Support s = Support::univariate(a);
        const SeriesValue series = expected_zeros_series(s, {r}, p, p, 60);
        const Estimate mc = estimate_expected_zeros_mc(s, {r}, make_mc(p, 20000, 5));
        INFO("p=", p, " support size ", a.size(), " last ", a.back(), " region ", to_string(r), " mc ", to_double(mc.mean),
             " +- ", mc.std_error, " series ", to_double(series.value));
        CHECK(agrees(mc, series));
      }
    }
  }
}

TEST_CASE("Monte Carlo is independent of the thread count") {
  McConfig one = make_mc(3, 4000, 11);
  McConfig four = one;
  four.threads = 4;
  const Support s = Support::univariate({0, 1, 3});
  const Estimate a = estimate_expected_zeros_mc(s, {Region::KTimes}, one);
  const Estimate b = estimate_expected_zeros_mc(s, {Region::KTimes}, four);
  CHECK(a.mean == b.mean);
  CHECK(a.second_moment == b.second_moment);
}

TEST_CASE("quadratic Monte Carlo separates the two candidate values") {
  const QuadraticExpectations qe = quadratic_expected_zeros(3, 3);
  const Estimate m = estimate_expected_zeros_mc(Support::univariate({0, 2}), {Region::MaxIdealNonzero}, make_mc(3, 50000));
  CHECK(within(m, qe.max_ideal));
  CHECK_FALSE(within(m, qe.max_ideal_displayed));

  const QuadraticExpectations two = quadratic_expected_zeros(2, 2);
  const Estimate u2 = estimate_expected_zeros_mc(Support::univariate({0, 2}), {Region::Unit}, make_mc(2, 50000));
  CHECK(within(u2, two.units));
  const Estimate m2 =
      estimate_expected_zeros_mc(Support::univariate({0, 2}), {Region::MaxIdealNonzero}, make_mc(2, 50000));
  CHECK(within(m2, two.max_ideal));
}
