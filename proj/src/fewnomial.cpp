#include "padicgeom/fewnomial.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <set>
#include <unordered_map>

#include "padicgeom/errors.hpp"
#include "padicgeom/linalg.hpp"
#include "padicgeom/volumes.hpp"

namespace padicgeom {

namespace {

int affine_rank(const std::vector<Exponent>& pts, int n) {
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    std::vector<Rational> r(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = pts[i][static_cast<std::size_t>(j)] - pts[0][static_cast<std::size_t>(j)];
    rows.push_back(std::move(r));
  }
  int rank = 0;
  for (int c = 0; c < n && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t piv = static_cast<std::size_t>(rank);
    while (piv < rows.size() && rows[piv][static_cast<std::size_t>(c)] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[static_cast<std::size_t>(rank)]);
    const auto& pr = rows[static_cast<std::size_t>(rank)];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == static_cast<std::size_t>(rank) || rows[r][static_cast<std::size_t>(c)] == 0) continue;
      const Rational f = rows[r][static_cast<std::size_t>(c)] / pr[static_cast<std::size_t>(c)];
      for (int j = 0; j < n; ++j) rows[r][static_cast<std::size_t>(j)] -= f * pr[static_cast<std::size_t>(j)];
    }
    ++rank;
  }
  return rank;
}

long p_valuation(const mpz_class& m, unsigned p) {
  if (m == 0) return -1;
  mpz_class x = abs(m);
  long v = 0;
  while (mpz_divisible_ui_p(x.get_mpz_t(), p)) {
    x /= p;
    ++v;
  }
  return v;
}

// |m|_K = eps^{v_p(m)} for a nonzero integer m.
Rational abs_integer(long long m, unsigned p, const Rational& q) {
  return epsilon_pow(q, p_valuation(mpz_class(std::to_string(m)), p));
}

mpz_class integer_det(std::vector<std::vector<long long>> m) {
  const std::size_t n = m.size();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = Rational(mpz_class(std::to_string(m[i][j])));
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det.get_num();
}

}  // namespace

Support::Support(int n, std::vector<Exponent> points) : n_(n), points_(std::move(points)) {
  if (n < 1) throw UnsupportedSupport("support needs at least one variable");
  std::set<Exponent> seen;
  for (const Exponent& a : points_) {
    if (static_cast<int>(a.size()) != n) throw UnsupportedSupport("exponent vector has the wrong length");
    if (!seen.insert(a).second) throw UnsupportedSupport("support points must be distinct");
  }
  if (points_.size() < 2 || affine_rank(points_, n) != n)
    throw UnsupportedSupport("support must have a full-dimensional affine span");
}

Support Support::univariate(std::vector<int> exponents) {
  std::sort(exponents.begin(), exponents.end());
  std::vector<Exponent> pts;
  for (int e : exponents) pts.push_back({e});
  return Support(1, std::move(pts));
}

namespace {

std::vector<Exponent> hull_2d(std::vector<Exponent> pts) {
  std::sort(pts.begin(), pts.end());
  auto cross = [](const Exponent& o, const Exponent& a, const Exponent& b) {
    return static_cast<long long>(a[0] - o[0]) * (b[1] - o[1]) - static_cast<long long>(a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Exponent> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

PolytopeInfo analyze_support(const Support& a) {
  const int n = a.n();
  const auto& pts = a.points();
  const std::set<Exponent> in(pts.begin(), pts.end());
  PolytopeInfo info;
  info.lower = info.upper = pts[0];
  for (const Exponent& x : pts)
    for (int i = 0; i < n; ++i) {
      auto ii = static_cast<std::size_t>(i);
      info.lower[ii] = std::min(info.lower[ii], x[ii]);
      info.upper[ii] = std::max(info.upper[ii], x[ii]);
    }
  info.minimal_vertex = info.lower;

  std::vector<Exponent> corners;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Exponent c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      c[static_cast<std::size_t>(i)] = (mask >> i & 1) ? info.upper[static_cast<std::size_t>(i)] : info.lower[static_cast<std::size_t>(i)];
    corners.push_back(c);
  }
  info.is_rectangular = std::all_of(corners.begin(), corners.end(), [&](const Exponent& c) { return in.count(c) > 0; });
  if (info.is_rectangular) {
    info.vertices = corners;
    for (const Exponent& c : corners) {
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        auto ii = static_cast<std::size_t>(i);
        Exponent nb = c;
        nb[ii] += c[ii] == info.lower[ii] ? 1 : -1;
        ok = ok && in.count(nb) > 0;
      }
      info.gap_free_at[c] = ok;
    }
  } else if (n == 1) {
    info.vertices = {info.lower, info.upper};
  } else if (n == 2) {
    info.vertices = hull_2d(pts);
  }

  // Simplex {a >= 0, sum a <= d}.
  int d = 0;
  bool inside = true;
  for (const Exponent& x : pts) {
    int s = 0;
    for (int v : x) {
      if (v < 0) inside = false;
      s += v;
    }
    d = std::max(d, s);
  }
  if (inside && d > 0) {
    Exponent zero(static_cast<std::size_t>(n), 0);
    bool vertices_in = in.count(zero) > 0;
    bool gap_free = true;
    for (int i = 0; i < n; ++i) {
      Exponent v = zero, e = zero;
      v[static_cast<std::size_t>(i)] = d;
      e[static_cast<std::size_t>(i)] = 1;
      vertices_in = vertices_in && in.count(v) > 0;
      gap_free = gap_free && in.count(e) > 0;
      Exponent w = zero;
      w[static_cast<std::size_t>(i)] = d - 1;
      gap_free = gap_free && in.count(w) > 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        Exponent u = w;
        u[static_cast<std::size_t>(j)] += 1;
        gap_free = gap_free && in.count(u) > 0;
      }
    }
    info.simplex_type = vertices_in;
    info.simplex_gap_free = vertices_in && gap_free;
  }
  return info;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Unit:
      return "units";
    case Region::MaxIdealNonzero:
      return "max-ideal";
    case Region::RNonzero:
      return "r-nonzero";
    case Region::KminusR:
      return "k-minus-r";
    default:
      return "k-times";
  }
}

Region parse_region(const std::string& name) {
  for (Region r : {Region::Unit, Region::MaxIdealNonzero, Region::RNonzero, Region::KminusR, Region::KTimes})
    if (to_string(r) == name) return r;
  throw InvalidConfig("unknown region '" + name + "' (expected units, max-ideal, r-nonzero, k-minus-r or k-times)");
}

namespace {

// Minors of the shifted support: for each n-subset I of the nonzero exponents,
// v_p(det M_I) and the column sums b(I). Singular minors are dropped.
struct Minor {
  long det_valuation;
  std::vector<long> b;
};

std::vector<Minor> support_minors(const std::vector<Exponent>& pts, int n, unsigned p) {
  Exponent low = pts[0];
  for (const Exponent& x : pts)
    for (int i = 0; i < n; ++i) low[static_cast<std::size_t>(i)] = std::min(low[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
  if (std::find(pts.begin(), pts.end(), low) == pts.end())
    throw UnsupportedSupport("the componentwise minimal exponent is not in the support");
  std::vector<std::vector<long long>> rows;
  for (const Exponent& x : pts) {
    if (x == low) continue;
    std::vector<long long> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - low[static_cast<std::size_t>(i)];
    rows.push_back(std::move(r));
  }
  std::vector<Minor> minors;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (static_cast<int>(pick.size()) == n) {
      std::vector<std::vector<long long>> m;
      std::vector<long> b(static_cast<std::size_t>(n), 0);
      for (std::size_t r : pick) {
        m.push_back(rows[r]);
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] += rows[r][static_cast<std::size_t>(i)];
      }
      const mpz_class det = integer_det(m);
      if (det != 0) minors.push_back(Minor{p_valuation(det, p), std::move(b)});
      return;
    }
    for (std::size_t r = start; r < rows.size(); ++r) {
      pick.push_back(r);
      rec(r + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return minors;
}

// Exponent of eps in J at valuation vector v.
long jacobian_exponent(const std::vector<Minor>& minors, const std::vector<int>& v) {
  long best = -1;
  for (const Minor& m : minors) {
    long e = m.det_valuation;
    for (std::size_t i = 0; i < v.size(); ++i) e += static_cast<long>(v[i]) * (m.b[i] - 1);
    if (best < 0 || e < best) best = e;
  }
  if (best < 0) throw UnsupportedSupport("support has no nonsingular minor");
  return best;
}

std::vector<Exponent> invert_coordinates(const std::vector<Exponent>& pts, const std::vector<bool>& inverted) {
  std::vector<Exponent> out = pts;
  for (Exponent& x : out)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (inverted[i]) x[i] = -x[i];
  return out;
}

// Calls fn(inverted, region) for each orthant of the region, where the region
// of an inverted coordinate is MaxIdealNonzero and KTimes becomes RNonzero.
void for_each_orthant(const RegionSpec& region, const std::function<void(const std::vector<bool>&, const RegionSpec&)>& fn) {
  const std::size_t n = region.size();
  std::vector<std::size_t> split;
  for (std::size_t i = 0; i < n; ++i)
    if (region[i] == Region::KTimes) split.push_back(i);
  for (unsigned mask = 0; mask < (1u << split.size()); ++mask) {
    std::vector<bool> inverted(n, false);
    RegionSpec r = region;
    for (std::size_t i = 0; i < n; ++i) {
      if (region[i] == Region::KminusR) {
        inverted[i] = true;
        r[i] = Region::MaxIdealNonzero;
      }
    }
    for (std::size_t s = 0; s < split.size(); ++s) {
      const std::size_t i = split[s];
      if (mask >> s & 1) {
        inverted[i] = true;
        r[i] = Region::MaxIdealNonzero;
      } else {
        r[i] = Region::RNonzero;
      }
    }
    fn(inverted, r);
  }
}

}  // namespace

Rational jacobian_psi_A(const Support& a, const std::vector<int>& v, unsigned p, const Rational& q) {
  if (static_cast<int>(v.size()) != a.n()) throw DimensionMismatch("valuation vector has the wrong length");
  return epsilon_pow(q, jacobian_exponent(support_minors(a.points(), a.n(), p), v));
}

SeriesValue expected_zeros_series(const Support& a, const RegionSpec& region, unsigned p, const Rational& q,
                                  int truncation) {
  const int n = a.n();
  if (static_cast<int>(region.size()) != n) throw DimensionMismatch("region has the wrong number of coordinates");
  if (!analyze_support(a).is_rectangular) throw UnsupportedSupport("series evaluation needs a rectangular Newton polytope");
  const Rational eps = epsilon_pow(q, 1);
  const Rational proj = projective_volume(n, q);
  // Number of valuation vectors per total exponent of eps.
  std::map<long, unsigned long> by_exponent;
  Rational tail = 0;
  for_each_orthant(region, [&](const std::vector<bool>& inverted, const RegionSpec& r) {
    const std::vector<Minor> minors = support_minors(invert_coordinates(a.points(), inverted), n, p);
    std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    int active = 0;
    for (int i = 0; i < n; ++i) {
      auto ii = static_cast<std::size_t>(i);
      lo[ii] = r[ii] == Region::MaxIdealNonzero ? 1 : 0;
      hi[ii] = r[ii] == Region::Unit ? 0 : truncation;
      if (r[ii] != Region::Unit) ++active;
    }
    tail += Rational(active) * epsilon_pow(q, truncation + 1) / proj;
    std::vector<int> v = lo;
    for (;;) {
      long total = jacobian_exponent(minors, v);
      for (int x : v) total += x;
      ++by_exponent[total];
      int i = 0;
      while (i < n && v[static_cast<std::size_t>(i)] == hi[static_cast<std::size_t>(i)]) {
        v[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
        ++i;
      }
      if (i == n) break;
      ++v[static_cast<std::size_t>(i)];
    }
  });
  Rational sum = 0;
  for (const auto& [e, count] : by_exponent) sum += Rational(count) * epsilon_pow(q, e);
  return SeriesValue{sum * pow(1 - eps, n) / proj, tail};
}

namespace {

// Expected zeros in the maximal ideal for a univariate support whose smallest gap is g.
Rational univariate_max_ideal(long g, const Rational& q) {
  const Rational eps = epsilon_pow(q, 1);
  return (1 - eps) / (1 + eps) * (1 / (1 - epsilon_pow(q, g)) - 1);
}

ClosedForm univariate_closed_form(const std::vector<int>& a, Region region, unsigned p, const Rational& q) {
  const Rational eps = epsilon_pow(q, 1);
  Rational units = 0;
  for (std::size_t j = 1; j < a.size(); ++j) units = std::max(units, abs_integer(a[j] - a[0], p, q));
  units *= (1 - eps) / (1 + eps);
  const long g_low = a[1] - a[0];
  const long g_high = a.back() - a[a.size() - 2];
  const ClosedForm low{univariate_max_ideal(g_low, q), p_valuation(mpz_class(std::to_string(g_low)), p) == 0};
  const ClosedForm high{univariate_max_ideal(g_high, q), p_valuation(mpz_class(std::to_string(g_high)), p) == 0};
  switch (region) {
    case Region::Unit:
      return {units, true};
    case Region::MaxIdealNonzero:
      return low;
    case Region::RNonzero:
      return {units + low.value, low.exact};
    case Region::KminusR:
      return high;
    default:
      return {units + low.value + high.value, low.exact && high.exact};
  }
}

Rational region_measure(Region r, const Rational& eps) {
  switch (r) {
    case Region::Unit:
      return 1 - eps;
    case Region::MaxIdealNonzero:
    case Region::KminusR:
      return eps;
    case Region::RNonzero:
      return 1;
    default:
      return 1 + eps;
  }
}

}  // namespace

ClosedForm closed_form_expected_zeros(const Support& a, const RegionSpec& region, unsigned p, const Rational& q) {
  const int n = a.n();
  if (static_cast<int>(region.size()) != n) throw DimensionMismatch("region has the wrong number of coordinates");
  if (n == 1) {
    std::vector<int> exps;
    for (const Exponent& x : a.points()) exps.push_back(x[0]);
    std::sort(exps.begin(), exps.end());
    return univariate_closed_form(exps, region[0], p, q);
  }
  const PolytopeInfo info = analyze_support(a);
  if (info.is_rectangular) {
    const Rational eps = epsilon_pow(q, 1);
    Rational value = 1 / projective_volume(n, q);
    for (Region r : region) value *= region_measure(r, eps);
    bool exact = true;
    for_each_orthant(region, [&](const std::vector<bool>& inverted, const RegionSpec&) {
      Exponent vertex(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        auto ii = static_cast<std::size_t>(i);
        vertex[ii] = inverted[ii] ? info.upper[ii] : info.lower[ii];
      }
      exact = exact && info.gap_free_at.at(vertex);
    });
    return {value, exact};
  }
  const bool all_k_times = std::all_of(region.begin(), region.end(), [](Region r) { return r == Region::KTimes; });
  if (info.simplex_type && info.simplex_gap_free && all_k_times) return {1, true};
  throw UnsupportedSupport("no closed form for this support and region");
}

QuadraticExpectations quadratic_expected_zeros(unsigned p, const Rational& q) {
  const Rational eps = epsilon_pow(q, 1);
  const Rational two = abs_integer(2, p, q);
  return QuadraticExpectations{two * (1 - eps) / (1 + eps), two * eps * eps / ((1 + eps) * (1 + eps)),
                               eps * eps / (1 + eps * eps)};
}

namespace {

enum class Kind { Full, NonZero, Unit };

// A polynomial whose coefficients are known modulo p^prec.
struct Eq {
  Polynomial terms;
  int prec;
};

struct Path {
  std::vector<Residue> offset;  // x = offset + p^scale * y
  std::vector<int> scale;
};

struct Solver {
  Solver(const ResidueRing& r, int b, std::vector<RootWitness>* w) : ring(r), budget(b), witnesses(w) {}

  const ResidueRing& ring;
  int budget;
  std::vector<RootWitness>* witnesses;
  RootCount result;
  std::unordered_map<long long, std::vector<std::pair<int, Residue>>> binomials;
  // Current orthant: the equations solve() starts from, the content divided out
  // of each, and the initial scaling of each coordinate.
  std::vector<Eq> top;
  std::vector<int> top_content;
  std::vector<int> top_scale;

  Residue p() const { return ring.p(); }

  Residue pow_mod_p(Residue r, int e) const {
    Residue result = 1 % p(), base = r % p();
    unsigned u = static_cast<unsigned>(e);
    while (u > 0) {
      if (u & 1) result = result * base % p();
      base = base * base % p();
      u >>= 1;
    }
    return result;
  }

  Residue eval_mod_p(const Eq& f, const std::vector<Residue>& r) const {
    Residue s = 0;
    for (const Term& t : f.terms) {
      Residue m = t.coef % p();
      for (std::size_t i = 0; i < r.size() && m != 0; ++i) m = m * pow_mod_p(r[i], t.exps[i]) % p();
      s = (s + m) % p();
    }
    return s;
  }

  Residue det_mod_p(std::vector<std::vector<Residue>> a) const {
    const std::size_t n = a.size();
    Residue det = 1;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      while (piv < n && a[piv][c] == 0) ++piv;
      if (piv == n) return 0;
      if (piv != c) {
        std::swap(a[piv], a[c]);
        det = (p() - det) % p();
      }
      det = det * a[c][c] % p();
      const Residue inv = pow_mod_p(a[c][c], static_cast<int>(p() - 2));
      for (std::size_t r = c + 1; r < n; ++r) {
        const Residue f = a[r][c] * inv % p();
        for (std::size_t j = c; j < n; ++j) a[r][j] = (a[r][j] + (p() - f) * a[c][j]) % p();
      }
    }
    return det;
  }

  bool jacobian_unit(const std::vector<Eq>& f, const std::vector<Residue>& r) const {
    const std::size_t n = r.size();
    std::vector<std::vector<Residue>> jac(n, std::vector<Residue>(n, 0));
    for (std::size_t j = 0; j < n; ++j)
      for (const Term& t : f[j].terms) {
        const Residue c = t.coef % p();
        if (c == 0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          if (t.exps[i] == 0) continue;
          Residue m = c * (static_cast<Residue>(t.exps[i]) % p()) % p();
          for (std::size_t l = 0; l < n && m != 0; ++l) m = m * pow_mod_p(r[l], t.exps[l] - (l == i ? 1 : 0)) % p();
          jac[j][i] = (jac[j][i] + m) % p();
        }
      }
    return det_mod_p(std::move(jac)) != 0;
  }

  // C(e, k) p^k mod p^N for k < prec, as (k, value) pairs with nonzero value mod p^prec.
  const std::vector<std::pair<int, Residue>>& binomial_row(int e, int prec) {
    const long long key = static_cast<long long>(e) * 128 + prec;
    auto it = binomials.find(key);
    if (it != binomials.end()) return it->second;
    std::vector<std::pair<int, Residue>> row;
    Residue unit = 1;
    int val = 0;
    for (int k = 0; k <= e && k < prec; ++k) {
      if (k > 0) {
        Residue num = static_cast<Residue>(e - k + 1), den = static_cast<Residue>(k);
        while (num % p() == 0) {
          num /= p();
          ++val;
        }
        while (den % p() == 0) {
          den /= p();
          --val;
        }
        unit = ring.mul(ring.mul(unit, num % ring.modulus()), ring.inverse(den % ring.modulus()));
      }
      if (val + k < prec) row.emplace_back(k, ring.mul(unit, ring.p_pow(val + k)));
    }
    return binomials.emplace(key, std::move(row)).first->second;
  }

  // f(r + p y) for the coordinates, divided by its content. Returns false when
  // the result vanishes at its precision.
  bool substitute(const Eq& f, const std::vector<Residue>& r, Eq& out, int& content) {
    const std::size_t n = r.size();
    const Residue mod = ring.p_pow(f.prec) == 0 ? ring.modulus() : ring.p_pow(f.prec);
    // After substitution every exponent is below f.prec, so a dense table
    // indexed by the exponent vector holds the result.
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= static_cast<std::size_t>(f.prec);
    std::vector<Residue> acc(cells, 0);
    std::vector<std::vector<std::pair<int, Residue>>> factors(n);
    for (const Term& t : f.terms) {
      if (t.coef % mod == 0) continue;
      bool dead = false;
      for (std::size_t i = 0; i < n; ++i) {
        auto& fi = factors[i];
        fi.clear();
        const int e = t.exps[i];
        if (r[i] == 0) {
          if (e < f.prec) fi.emplace_back(e, ring.p_pow(e));
        } else {
          const Residue ri = r[i];
          const Residue rinv = ring.inverse(ri);
          Residue power = ring.pow(ri, static_cast<std::uint64_t>(e));
          int last = 0;
          for (const auto& [k, c] : binomial_row(e, f.prec)) {
            while (last < k) {
              power = ring.mul(power, rinv);
              ++last;
            }
            fi.emplace_back(k, ring.mul(c, power));
          }
        }
        if (fi.empty()) dead = true;
      }
      if (dead) continue;
      // Expand the product over coordinates.
      std::vector<std::size_t> idx(n, 0);
      for (;;) {
        // The k-th factor entry is divisible by p^k.
        int degree = 0;
        for (std::size_t i = 0; i < n; ++i) degree += factors[i][idx[i]].first;
        if (degree < f.prec) {
          Residue c = t.coef;
          std::size_t key = 0;
          for (std::size_t i = 0; i < n; ++i) {
            c = ring.mul(c, factors[i][idx[i]].second);
            key = key * static_cast<std::size_t>(f.prec) + static_cast<std::size_t>(factors[i][idx[i]].first);
          }
          acc[key] = ring.add(acc[key], c);
        }
        std::size_t i = 0;
        while (i < n && ++idx[i] == factors[i].size()) idx[i++] = 0;
        if (i == n) break;
      }
    }
    ValExp low = ValExp::at_least_precision();
    for (Residue& c : acc) {
      c %= mod;
      low = std::min(low, ring.valuation(c));
    }
    if (!low.is_finite() || low.value() >= f.prec) return false;
    content = low.value();
    const Residue shift = ring.p_pow(content);
    out.prec = f.prec - content;
    out.terms.clear();
    for (std::size_t key = 0; key < cells; ++key) {
      const Residue c = acc[key];
      if (c == 0) continue;
      Term t;
      t.exps.resize(n);
      std::size_t k = key;
      for (std::size_t i = n; i-- > 0;) {
        t.exps[i] = static_cast<int>(k % static_cast<std::size_t>(f.prec));
        k /= static_cast<std::size_t>(f.prec);
      }
      t.coef = c / shift;
      out.terms.push_back(std::move(t));
    }
    return true;
  }

  Residue coefficient(const Eq& f, const Exponent& m) const {
    for (const Term& t : f.terms)
      if (t.exps == m) return t.coef;
    return 0;
  }

  // a - lambda * b, known modulo the smaller of the two precisions.
  Eq subtract_multiple(const Eq& a, const Eq& b, Residue lambda) const {
    std::map<Exponent, Residue> acc;
    for (const Term& t : a.terms) acc[t.exps] = ring.add(acc[t.exps], t.coef);
    for (const Term& t : b.terms) acc[t.exps] = ring.sub(acc[t.exps], ring.mul(lambda, t.coef));
    Eq out{{}, std::min(a.prec, b.prec)};
    const Residue mod = ring.p_pow(out.prec);
    for (auto& [m, c] : acc) {
      const Residue r = mod == 0 ? c : c % mod;
      if (r != 0) out.terms.push_back(Term{m, r});
    }
    return out;
  }

  // Divides by the content; false when nothing is left at the known precision.
  bool divide_content(Eq& f) const {
    ValExp low = ValExp::at_least_precision();
    for (const Term& t : f.terms) low = std::min(low, ring.valuation(t.coef));
    if (!low.is_finite() || low.value() >= f.prec) return false;
    const Residue shift = ring.p_pow(low.value());
    for (Term& t : f.terms) t.coef /= shift;
    f.prec -= low.value();
    return true;
  }

  // Forward elimination mod p: an equation whose reduction depends on the
  // earlier ones is replaced by the corresponding difference divided by its
  // content. This is an invertible change of equations over K, so the roots
  // are unchanged, and afterwards the reductions are linearly independent.
  bool reduce_mod_p(std::vector<Eq>& f) const {
    std::vector<Exponent> pivots;
    for (std::size_t j = 0; j < f.size(); ++j) {
      for (;;) {
        for (std::size_t k = 0; k < j; ++k) {
          const Residue c = coefficient(f[j], pivots[k]);
          if (c % p() == 0) continue;
          f[j] = subtract_multiple(f[j], f[k], ring.mul(c, ring.inverse(coefficient(f[k], pivots[k]))));
        }
        const Term* pivot = nullptr;
        for (const Term& t : f[j].terms)
          if (t.coef % p() != 0 && (pivot == nullptr || t.exps < pivot->exps)) pivot = &t;
        if (pivot != nullptr) {
          pivots.push_back(pivot->exps);
          break;
        }
        if (!divide_content(f[j])) return false;
      }
    }
    return true;
  }

  Residue eval(const Eq& e, const std::vector<Residue>& x) const {
    Residue s = 0;
    for (const Term& t : e.terms) {
      Residue m = t.coef;
      for (std::size_t i = 0; i < x.size(); ++i) m = ring.mul(m, ring.pow(x[i], static_cast<std::uint64_t>(t.exps[i])));
      s = ring.add(s, m);
    }
    return s;
  }

  // Newton on the top system over Z with p-adic headroom, reduced mod p^N.
  void polish(std::vector<Residue>& x) const {
    const std::size_t n = x.size();
    const mpz_class pz(static_cast<unsigned long>(p()));
    std::vector<mpz_class> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = mpz_class(std::to_string(x[i]));
    auto power = [&](int k) {
      mpz_class r;
      mpz_pow_ui(r.get_mpz_t(), pz.get_mpz_t(), static_cast<unsigned long>(k));
      return r;
    };
    auto valuation = [&](mpz_class a, int cap) {
      if (a == 0) return cap;
      int v = 0;
      while (v < cap && a % pz == 0) {
        a /= pz;
        ++v;
      }
      return v;
    };
    const int target = ring.precision();
    for (int iter = 0; iter < 2 * target; ++iter) {
      const int headroom = 2 * target + 4;
      const mpz_class mod = power(target + headroom);
      std::vector<mpz_class> val(n, 0);
      std::vector<std::vector<mpz_class>> jac(n, std::vector<mpz_class>(n, 0));
      for (std::size_t j = 0; j < n; ++j)
        for (const Term& t : top[j].terms) {
          const mpz_class c(std::to_string(t.coef));
          mpz_class m = c;
          for (std::size_t l = 0; l < n; ++l) {
            mpz_class e;
            mpz_powm_ui(e.get_mpz_t(), z[l].get_mpz_t(), static_cast<unsigned long>(t.exps[l]), mod.get_mpz_t());
            m = m * e % mod;
          }
          val[j] = (val[j] + m) % mod;
          for (std::size_t i = 0; i < n; ++i) {
            if (t.exps[i] == 0) continue;
            mpz_class d = c * t.exps[i];
            for (std::size_t l = 0; l < n; ++l) {
              mpz_class e;
              const int k = t.exps[l] - (l == i ? 1 : 0);
              mpz_powm_ui(e.get_mpz_t(), z[l].get_mpz_t(), static_cast<unsigned long>(k), mod.get_mpz_t());
              d = d * e % mod;
            }
            jac[j][i] = (jac[j][i] + d) % mod;
          }
        }
      bool done = true;
      for (std::size_t j = 0; j < n; ++j) done = done && val[j] % power(target) == 0;
      if (done) break;
      if (n > 2) return;
      // Adjugate solve: delta = adj(J) f / det(J).
      mpz_class det = n == 1 ? jac[0][0] : (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) % mod;
      std::vector<mpz_class> num(n);
      if (n == 1) {
        num[0] = val[0];
      } else {
        num[0] = jac[1][1] * val[0] - jac[0][1] * val[1];
        num[1] = jac[0][0] * val[1] - jac[1][0] * val[0];
      }
      if (det < 0) det += mod;
      const int s = valuation(det, headroom);
      if (s >= headroom / 2) return;
      for (const mpz_class& v : val)
        if (valuation(((v % mod) + mod) % mod, headroom) <= 2 * s) return;
      const mpz_class ps = power(s);
      const mpz_class unit = det / ps;
      mpz_class inv;
      mpz_invert(inv.get_mpz_t(), unit.get_mpz_t(), mod.get_mpz_t());
      for (std::size_t i = 0; i < n; ++i) {
        mpz_class a = ((num[i] % mod) + mod) % mod;
        if (a % ps != 0) return;
        z[i] = ((z[i] - a / ps * inv) % mod + mod) % mod;
      }
    }
    const mpz_class out = power(target);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<Residue>(std::stoull(mpz_class(z[i] % out).get_str()));
  }

  void record_witness(const std::vector<Eq>& f, const std::vector<Residue>& r, const Path& path) {
    // Newton iteration on the leaf system, whose Jacobian is a unit at r.
    const std::size_t n = r.size();
    std::vector<Residue> y = r;
    int prec = f[0].prec;
    for (const Eq& e : f) prec = std::min(prec, e.prec);
    for (int iter = 0; iter < prec + 1; ++iter) {
      RMatrix jac(ring, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      RMatrix val(ring, static_cast<Eigen::Index>(n), 1);
      for (std::size_t j = 0; j < n; ++j) {
        val(static_cast<Eigen::Index>(j), 0) = eval(f[j], y);
        for (const Term& t : f[j].terms)
          for (std::size_t i = 0; i < n; ++i) {
            if (t.exps[i] == 0) continue;
            Residue m = ring.mul(t.coef, static_cast<Residue>(t.exps[i]));
            for (std::size_t l = 0; l < n; ++l)
              m = ring.mul(m, ring.pow(y[l], static_cast<std::uint64_t>(t.exps[l] - (l == i ? 1 : 0))));
            jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                ring.add(jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)), m);
          }
      }
      RMatrix step = inverse(jac) * val;
      for (std::size_t i = 0; i < n; ++i) y[i] = ring.sub(y[i], step(static_cast<Eigen::Index>(i), 0));
    }
    std::vector<Residue> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = ring.add(path.offset[i], ring.mul(ring.p_pow(path.scale[i]), y[i]));
    polish(x);
    RootWitness w;
    for (std::size_t i = 0; i < n; ++i) w.x.push_back(ring.mul(ring.p_pow(top_scale[i]), x[i]));
    for (std::size_t j = 0; j < top.size(); ++j) {
      const Residue mod = ring.p_pow(top[j].prec) == 0 ? ring.modulus() : ring.p_pow(top[j].prec);
      const ValExp v = ring.valuation(eval(top[j], x) % mod);
      const int known = v.is_finite() ? std::min(v.value(), top[j].prec) : top[j].prec;
      w.vanishing.push_back(std::min(known + top_content[j], ring.precision()));
    }
    witnesses->push_back(std::move(w));
  }

  void solve(std::vector<Eq> f, const std::vector<Kind>& kinds, int depth, const Path& path) {
    if (result.indeterminate) return;
    if (!reduce_mod_p(f)) {
      result.indeterminate = true;
      return;
    }
    const std::size_t n = kinds.size();
    std::vector<Residue> r(n, 0);
    for (;;) {
      bool admissible = true;
      for (std::size_t i = 0; i < n; ++i)
        if (kinds[i] == Kind::Unit && r[i] == 0) admissible = false;
      bool root = admissible;
      for (std::size_t j = 0; j < f.size() && root; ++j) root = eval_mod_p(f[j], r) == 0;
      if (root) {
        bool pinned = false;  // a nonzero coordinate sits at residue 0
        for (std::size_t i = 0; i < n; ++i)
          if (kinds[i] == Kind::NonZero && r[i] == 0) pinned = true;
        if (!pinned && jacobian_unit(f, r)) {
          ++result.count;
          if (witnesses) record_witness(f, r, path);
        } else {
          if (depth >= budget) {
            result.indeterminate = true;
            return;
          }
          std::vector<Eq> g(f.size());
          Path next = path;
          for (std::size_t j = 0; j < f.size(); ++j) {
            int content = 0;
            if (!substitute(f[j], r, g[j], content)) {
              result.indeterminate = true;
              return;
            }
          }
          std::vector<Kind> next_kinds(n, Kind::Full);
          for (std::size_t i = 0; i < n; ++i) {
            if (kinds[i] == Kind::NonZero && r[i] == 0) next_kinds[i] = Kind::NonZero;
            next.offset[i] = ring.add(path.offset[i], ring.mul(ring.p_pow(path.scale[i]), r[i]));
            next.scale[i] = path.scale[i] + 1;
          }
          solve(g, next_kinds, depth + 1, next);
          if (result.indeterminate) return;
        }
      }
      std::size_t i = 0;
      while (i < n && ++r[i] == p()) r[i++] = 0;
      if (i == n) break;
    }
  }
};

}  // namespace

RootCount count_roots(const ResidueRing& ring, const std::vector<Polynomial>& system, const RegionSpec& region,
                      int depth_budget, std::vector<RootWitness>* witnesses) {
  const std::size_t n = region.size();
  if (system.size() != n) throw DimensionMismatch("system needs one equation per variable");
  for (const Polynomial& f : system)
    for (const Term& t : f)
      if (t.exps.size() != n) throw DimensionMismatch("term has the wrong number of exponents");
  Solver solver(ring, depth_budget > 0 ? depth_budget : ring.precision() - 2, witnesses);
  const int N = ring.precision();

  for_each_orthant(region, [&](const std::vector<bool>& inverted, const RegionSpec& r) {
    if (solver.result.indeterminate) return;
    std::vector<Eq> eqs;
    Path path{std::vector<Residue>(n, 0), std::vector<int>(n, 0)};
    solver.top_scale.assign(n, 0);
    solver.top_content.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (r[i] == Region::MaxIdealNonzero) solver.top_scale[i] = 1;
    for (std::size_t j = 0; j < system.size(); ++j) {
      // Clear denominators after inverting, then put maximal-ideal coordinates at x = p y.
      std::vector<int> top(n, INT_MIN), low(n, INT_MAX);
      for (const Term& t : system[j])
        for (std::size_t i = 0; i < n; ++i) {
          top[i] = std::max(top[i], t.exps[i]);
          low[i] = std::min(low[i], t.exps[i]);
        }
      Eq e{{}, N};
      for (const Term& t : system[j]) {
        Term u = t;
        for (std::size_t i = 0; i < n; ++i) u.exps[i] = inverted[i] ? top[i] - t.exps[i] : t.exps[i] - low[i];
        for (std::size_t i = 0; i < n; ++i)
          if (r[i] == Region::MaxIdealNonzero) u.coef = ring.mul(u.coef, ring.p_pow(u.exps[i]));
        e.terms.push_back(std::move(u));
      }
      ValExp content = ValExp::at_least_precision();
      for (const Term& t : e.terms) content = std::min(content, ring.valuation(t.coef));
      if (!content.is_finite()) {
        solver.result.indeterminate = true;
        return;
      }
      const Residue shift = ring.p_pow(content.value());
      for (Term& t : e.terms) t.coef /= shift;
      e.prec -= content.value();
      solver.top_content.push_back(content.value());
      eqs.push_back(std::move(e));
    }
    std::vector<Kind> kinds(n);
    for (std::size_t i = 0; i < n; ++i) kinds[i] = r[i] == Region::Unit ? Kind::Unit : Kind::NonZero;
    solver.top = eqs;
    solver.solve(eqs, kinds, 0, path);
  });
  return solver.result;
}

std::vector<Polynomial> random_system(const ResidueRing& ring, const Support& a, CounterRng& rng) {
  std::vector<Polynomial> system(static_cast<std::size_t>(a.n()));
  for (Polynomial& f : system)
    for (const Exponent& x : a.points()) f.push_back(Term{x, rng.uniform_below(ring.modulus())});
  return system;
}

Estimate estimate_expected_zeros_mc(const Support& a, const RegionSpec& region, const McConfig& mc) {
  if (static_cast<int>(region.size()) != a.n()) throw DimensionMismatch("region has the wrong number of coordinates");
  const ResidueRing& ring = mc.padic.ring;
  Tally tally = run_samples(mc, [&](CounterRng& rng) -> std::optional<long> {
    RootCount c = count_roots(ring, random_system(ring, a, rng), region);
    if (c.indeterminate) return std::nullopt;
    return c.count;
  });
  check_discard_rate(mc, tally);
  return estimate_from_counts(tally);
}

}  // namespace padicgeom
