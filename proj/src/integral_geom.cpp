#include "padicgeom/integral_geom.hpp"

#include <array>
#include <cmath>
#include <set>

#include "padicgeom/errors.hpp"

namespace padicgeom {

namespace {

std::optional<long> exponent_label(const std::vector<ValExp>& exps) {
  ValExp total = exponent_sum(exps);
  if (!total.is_finite()) return std::nullopt;
  return total.value();
}

}  // namespace

Estimate estimate_alpha(int k, int m, const McConfig& mc) {
  if (k < 1 || m < 1 || k * m > 6) throw DimensionMismatch("estimate_alpha needs k, m >= 1 and km <= 6");
  const ResidueRing& ring = mc.padic.ring;
  const int d = k * m;
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    RMatrix a(ring, d, d);
    for (int c = 0; c < d; ++c) {
      std::vector<Residue> u = sample_sphere(ring, k, rng);
      std::vector<Residue> v = sample_sphere(ring, m, rng);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < m; ++j) a(i * m + j, c) = ring.mul(u[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
    return exponent_label(smith_exponents(a));
  });
  check_discard_rate(mc, tally);
  return estimate_from_powers(tally, Rational(static_cast<unsigned long>(ring.p())));
}

Estimate estimate_expected_abs_det(int n, const McConfig& mc) {
  if (n < 1 || n > 8) throw DimensionMismatch("estimate_expected_abs_det needs 1 <= n <= 8");
  const ResidueRing& ring = mc.padic.ring;
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    std::optional<long> label = exponent_label(smith_exponents(sample_r_matrix(ring, n, n, rng)));
    return label ? label : std::optional<long>(Tally::kZeroLabel);
  });
  return estimate_from_powers(tally, Rational(static_cast<unsigned long>(ring.p())));
}

Estimate estimate_expected_norm(int n, const McConfig& mc) {
  const ResidueRing& ring = mc.padic.ring;
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    ValExp v = min_valuation(ring, sample_r_vector(ring, n, rng));
    return v.is_finite() ? v.value() : Tally::kZeroLabel;
  });
  return estimate_from_powers(tally, Rational(static_cast<unsigned long>(ring.p())));
}

namespace {

// Position keys are packed as base-64 digits, 63 standing for an infinite entry.
constexpr long kInfDigit = 63;

long encode_key(const PositionKey& key) {
  long label = 0, scale = 1;
  for (int v : key.finite) {
    label += scale * v;
    scale *= 64;
  }
  for (int i = 0; i < key.infinite; ++i) {
    label += scale * kInfDigit;
    scale *= 64;
  }
  return label;
}

PositionKey decode_key(long label, int k) {
  PositionKey key;
  for (int i = 0; i < k; ++i) {
    const long digit = label % 64;
    label /= 64;
    if (digit == kInfDigit)
      ++key.infinite;
    else
      key.finite.push_back(static_cast<int>(digit));
  }
  return key;
}

}  // namespace

PositionHistogram empirical_position_histogram(int k, int l, int n, const McConfig& mc) {
  if (k < 1 || k > l || k + l > n || k > 9) throw DimensionMismatch("histogram needs 1 <= k <= l and k + l <= n");
  const ResidueRing& ring = mc.padic.ring;
  const Subspace f = coordinate_subspace(ring, n, l);
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    // Any GL_n(R)-translate of a fixed k-plane is uniform; skipping the canonical form saves work.
    RMatrix g = sample_gln(ring, n, rng);
    std::vector<ValExp> exps = smith_exponents(hconcat(f.basis(), g.left_cols(k)));
    return encode_key(PositionKey::from(PositionVector(exps.begin() + l, exps.end())));
  });
  PositionHistogram h;
  for (const auto& [label, count] : tally.counts) h.counts[decode_key(label, k)] += count;
  h.samples = tally.used();
  return h;
}

double total_variation(const PositionHistogram& h, int k, int l, int n, const Rational& q, int max_entry) {
  const double total = static_cast<double>(h.samples);
  double dist = 0;
  std::set<PositionKey> seen;
  for (const PositionKey& x : position_keys(k, max_entry)) {
    auto it = h.counts.find(x);
    const double freq = it == h.counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    dist += std::abs(freq - to_double(rho(x, k, l, n, q)));
    seen.insert(x);
  }
  for (const auto& [key, count] : h.counts)
    if (!seen.count(key)) dist += static_cast<double>(count) / total;
  dist += to_double(rho_normalization(k, l, n, q, max_entry).tail_bound);
  return dist / 2;
}

namespace {

using Plucker = std::array<Residue, 6>;

// Order 12, 13, 14, 23, 24, 34.
constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

Plucker plucker(const RMatrix& b) {
  const ResidueRing& ring = b.ring();
  Plucker w{};
  for (std::size_t t = 0; t < 6; ++t) {
    const int i = kPairs[t][0], j = kPairs[t][1];
    w[t] = ring.sub(ring.mul(b(i, 0), b(j, 1)), ring.mul(b(j, 0), b(i, 1)));
  }
  return w;
}

Residue quadric(const ResidueRing& r, const Plucker& x) {
  return r.add(r.sub(r.mul(x[0], x[5]), r.mul(x[1], x[4])), r.mul(x[2], x[3]));
}

Residue polar(const ResidueRing& r, const Plucker& x, const Plucker& y) {
  Residue s = r.add(r.mul(x[0], y[5]), r.mul(x[5], y[0]));
  s = r.sub(s, r.add(r.mul(x[1], y[4]), r.mul(x[4], y[1])));
  return r.add(s, r.add(r.mul(x[2], y[3]), r.mul(x[3], y[2])));
}

// The line whose Plücker vector is w (primitive), or nothing when w is not
// decomposable at the given threshold.
std::optional<Subspace> line_from_plucker(const ResidueRing& ring, const Plucker& w, int threshold) {
  RMatrix skew(ring, 4, 4);
  for (std::size_t t = 0; t < 6; ++t) {
    const int i = kPairs[t][0], j = kPairs[t][1];
    skew(i, j) = w[t];
    skew(j, i) = ring.neg(w[t]);
  }
  SmithDecomposition snf = smith_normal_form(skew);
  const auto& e = snf.exponents;
  if (!e[1].is_finite() || e[1].value() >= threshold) return std::nullopt;
  if (e[2].is_finite() && e[2].value() < threshold) return std::nullopt;
  return saturate(inverse(snf.S).left_cols(2));
}

bool meets(const Subspace& a, const Subspace& b, int threshold) {
  std::vector<ValExp> e = smith_exponents(hconcat(a.basis(), b.basis()));
  return !e.back().is_finite() || e.back().value() >= threshold;
}

}  // namespace

FourLinesOutcome solve_four_lines(const std::vector<Subspace>& lines) {
  if (lines.size() != 4) throw DimensionMismatch("four lines are required");
  const ResidueRing& ring = lines[0].ring();
  for (const Subspace& l : lines)
    if (l.ambient() != 4 || l.dim() != 2) throw DimensionMismatch("each line must be a 2-plane in K^4");
  const int n_prec = ring.precision();
  const Residue p = ring.p();
  FourLinesOutcome degenerate;

  RMatrix system(ring, 4, 6);
  for (Eigen::Index r = 0; r < 4; ++r) {
    const Plucker pi = plucker(lines[static_cast<std::size_t>(r)].basis());
    const std::array<Residue, 6> row{pi[5], ring.neg(pi[4]), pi[3], pi[2], ring.neg(pi[1]), pi[0]};
    for (Eigen::Index c = 0; c < 6; ++c) system(r, c) = row[static_cast<std::size_t>(c)];
  }
  SmithDecomposition snf = smith_normal_form(system);
  for (ValExp v : snf.exponents)
    if (!v.is_finite()) return degenerate;
  // Kernel vectors are only determined modulo p^(N - largest exponent).
  const int prec = n_prec - snf.exponents.back().value();
  Plucker w1{}, w2{};
  for (std::size_t t = 0; t < 6; ++t) {
    w1[t] = snf.T(static_cast<Eigen::Index>(t), 4);
    w2[t] = snf.T(static_cast<Eigen::Index>(t), 5);
  }
  const Residue a = quadric(ring, w1), b = polar(ring, w1, w2), c = quadric(ring, w2);
  const Residue disc = ring.sub(ring.mul(b, b), ring.mul(4 % ring.modulus(), ring.mul(a, c)));
  const ValExp vd = ring.valuation(disc);
  if (!vd.is_finite() || vd.value() >= prec) return degenerate;
  const int v = vd.value();
  if (v % 2 == 1) return FourLinesOutcome{FourLinesOutcome::Kind::Count, 0, {}};
  const Residue u = ring.unit_part(disc);
  const Ternary square = is_square_unit(u, p, prec - v);
  if (square == Ternary::Indeterminate) return degenerate;
  if (square == Ternary::False) return FourLinesOutcome{FourLinesOutcome::Kind::Count, 0, {}};

  const Residue r = ring.mul(ring.p_pow(v / 2), sqrt_unit(ring, u, prec - v));
  const int threshold = n_prec / 2;
  FourLinesOutcome out{FourLinesOutcome::Kind::Count, 2, {}};
  for (int sign : {1, -1}) {
    const Residue rs = sign > 0 ? r : ring.neg(r);
    // Two representatives of the same root of a s^2 + b s t + c t^2; keep the better conditioned one.
    std::array<Residue, 2> first{ring.add(ring.neg(b), rs), ring.add(a, a)};
    std::array<Residue, 2> second{ring.add(c, c), ring.sub(ring.neg(b), rs)};
    auto content = [&](const std::array<Residue, 2>& st) {
      return std::min(ring.valuation(st[0]), ring.valuation(st[1]));
    };
    const auto& st = content(first) <= content(second) ? first : second;
    Plucker w{};
    for (std::size_t t = 0; t < 6; ++t) w[t] = ring.add(ring.mul(st[0], w1[t]), ring.mul(st[1], w2[t]));
    ValExp wc = ValExp::at_least_precision();
    for (Residue x : w) wc = std::min(wc, ring.valuation(x));
    if (!wc.is_finite() || wc.value() >= threshold) return degenerate;
    const Residue shift = ring.p_pow(wc.value());
    for (Residue& x : w) x /= shift;
    std::optional<Subspace> line = line_from_plucker(ring, w, threshold);
    if (!line) return degenerate;
    for (const Subspace& l : lines)
      if (!meets(*line, l, threshold)) return degenerate;
    out.solutions.push_back(*line);
  }
  if (out.solutions[0] == out.solutions[1]) return degenerate;
  return out;
}

Estimate estimate_eta_2_4(const McConfig& mc) {
  const ResidueRing& ring = mc.padic.ring;
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    std::vector<Subspace> lines;
    for (int i = 0; i < 4; ++i) lines.push_back(from_saturated(sample_gln(ring, 4, rng).left_cols(2)));
    FourLinesOutcome o = solve_four_lines(lines);
    if (o.degenerate()) return std::nullopt;
    return o.count;
  });
  check_discard_rate(mc, tally);
  return estimate_from_counts(tally);
}

}  // namespace padicgeom
