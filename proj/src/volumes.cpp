#include "padicgeom/volumes.hpp"

#include <cmath>
#include <functional>

#include "padicgeom/errors.hpp"

namespace padicgeom {

namespace {

Rational eps_pow(const Rational& q, long e) { return epsilon_pow(q, e); }

void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(what);
}

}  // namespace

Rational gamma(int n, const Rational& q) {
  require(n >= 0, "gamma needs n >= 0");
  Rational r = 1;
  for (int i = 1; i <= n; ++i) r *= 1 - eps_pow(q, i);
  return r;
}

Rational q_factorial(int n, const Rational& q) {
  Rational r = 1;
  for (int i = 1; i <= n; ++i) r *= (pow(q, i) - 1) / (q - 1);
  return r;
}

Rational q_binomial(int n, int k, const Rational& q) {
  require(0 <= k && k <= n, "q_binomial needs 0 <= k <= n");
  return q_factorial(n, q) / (q_factorial(k, q) * q_factorial(n - k, q));
}

Rational projective_volume(int n, const Rational& q) {
  require(n >= 0, "projective_volume needs n >= 0");
  return (1 - eps_pow(q, n + 1)) / (1 - eps_pow(q, 1));
}

Rational grassmannian_volume(int k, int n, const Rational& q) {
  require(0 <= k && k <= n, "grassmannian_volume needs 0 <= k <= n");
  return gamma(n, q) / (gamma(k, q) * gamma(n - k, q));
}

Rational grassmannian_volume_binomial(int k, int n, const Rational& q) {
  return eps_pow(q, static_cast<long>(k) * (n - k)) * q_binomial(n, k, q);
}

Rational schubert_volume_ratio(int a, int a1, int b, int b1, const Rational& q) {
  require(a >= 0 && a1 >= 0 && b >= 0 && b1 >= 0, "schubert_volume_ratio needs nonnegative arguments");
  auto gr = [&](int x, int y) { return grassmannian_volume(x, x + y, q); };
  return gr(a, b) * gr(a, b1) * gr(a1, b) / (gr(a + a1, b) * gr(b + b1, a));
}

Rational codim1_schubert_ratio(int k, int n, const Rational& q) {
  require(1 <= k && k < n, "codim1_schubert_ratio needs 1 <= k < n");
  return projective_volume(1, q) * projective_volume(k - 1, q) / projective_volume(k, q) *
         projective_volume(n - k - 1, q) / projective_volume(n - k, q);
}

PositionKey PositionKey::from(const PositionVector& x) {
  PositionKey key;
  for (ValExp v : x) {
    if (v.is_finite())
      key.finite.push_back(v.value());
    else
      ++key.infinite;
  }
  return key;
}

std::string to_string(const PositionKey& key) {
  std::string s = "(";
  for (std::size_t i = 0; i < key.finite.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(key.finite[i]);
  }
  for (int i = 0; i < key.infinite; ++i) {
    if (i > 0 || !key.finite.empty()) s += ",";
    s += "inf";
  }
  return s + ")";
}

namespace {

void check_density_args(const PositionKey& x, int k, int l, int n) {
  require(1 <= k && k <= l && k + l <= n, "density needs 1 <= k <= l and k + l <= n");
  require(x.size() == k, "position key has the wrong length");
}

}  // namespace

Rational jacobian_psi_x(const PositionKey& x, int k, int l, int n, const Rational& q) {
  check_density_args(x, k, l, n);
  if (x.infinite > 0) return 0;
  long e = 0;
  for (int i = 0; i < k; ++i) {
    const long xi = x.finite[static_cast<std::size_t>(i)];
    e += xi * (n + 1 - k - l) + 2 * xi * (k - 1 - i);
  }
  return eps_pow(q, e);
}

Rational fiber_factor(const PositionKey& x, int k, int l, const Rational& q) {
  require(x.infinite == 0, "fiber factor needs finite entries");
  require(x.size() == k && k <= l, "fiber factor dimensions");
  int zeros = 0;
  Rational r = 1;
  std::size_t i = 0;
  while (i < x.finite.size()) {
    std::size_t j = i;
    while (j < x.finite.size() && x.finite[j] == x.finite[i]) ++j;
    const int mu = static_cast<int>(j - i);
    if (x.finite[i] == 0) zeros = mu;
    r *= gamma(mu, q);
    i = j;
  }
  return r * gamma(zeros + l - k, q);
}

Rational rho_constant(int k, int l, int n, const Rational& q) {
  require(1 <= k && k <= l && k + l <= n, "rho_constant needs 1 <= k <= l and k + l <= n");
  return gamma(k, q) * gamma(n - k, q) * gamma(l, q) * gamma(n - l, q) / (gamma(n - k - l, q) * gamma(n, q));
}

Rational rho(const PositionKey& x, int k, int l, int n, const Rational& q) {
  check_density_args(x, k, l, n);
  if (x.infinite > 0) return 0;
  return rho_constant(k, l, n, q) * jacobian_psi_x(x, k, l, n, q) / fiber_factor(x, k, l, q);
}

std::vector<PositionKey> position_keys(int k, int max_entry) {
  std::vector<PositionKey> keys;
  PositionKey cur;
  std::function<void(int)> rec = [&](int lo) {
    if (static_cast<int>(cur.finite.size()) == k) {
      keys.push_back(cur);
      return;
    }
    for (int v = lo; v <= max_entry; ++v) {
      cur.finite.push_back(v);
      rec(v);
      cur.finite.pop_back();
    }
  };
  rec(0);
  return keys;
}

namespace {

// Mass of keys with some entry > max_entry, with weight eps^{extra * sum x}.
Rational rho_tail(int k, int l, int n, const Rational& q, int max_entry, int extra) {
  const int a = n + 1 - k - l + extra;
  const Rational ea = eps_pow(q, a);
  const Rational min_fiber = gamma(l, q) * pow(gamma(k, q), k);
  return rho_constant(k, l, n, q) / min_fiber * pow(1 - ea, -(k - 1)) * eps_pow(q, static_cast<long>(a) * (max_entry + 1)) /
         (1 - ea);
}

}  // namespace

TruncatedSum rho_normalization(int k, int l, int n, const Rational& q, int max_entry) {
  Rational sum = 0;
  for (const PositionKey& x : position_keys(k, max_entry)) sum += rho(x, k, l, n, q);
  return TruncatedSum{sum, rho_tail(k, l, n, q, max_entry, 0)};
}

MomentIdentity rho_moment_identity(int k, int l, int n, int n_ambient, const Rational& q, int max_entry) {
  require(n <= n_ambient, "moment identity needs n <= ambient dimension");
  Rational lhs = 0;
  for (const PositionKey& x : position_keys(k, max_entry)) {
    long total = 0;
    for (int v : x.finite) total += v;
    lhs += rho(x, k, l, n, q) * eps_pow(q, static_cast<long>(n_ambient - n) * total);
  }
  return MomentIdentity{lhs, rho_constant(k, l, n, q) / rho_constant(k, l, n_ambient, q),
                        rho_tail(k, l, n, q, max_entry, n_ambient - n)};
}

Rational alpha_proj_closed(int n, const Rational& q) {
  require(n >= 1, "alpha_proj_closed needs n >= 1");
  const Rational e = eps_pow(q, 1);
  if (n == 1) return 1;
  return (1 - e) / (1 - eps_pow(q, n)) * pow((1 - eps_pow(q, n)) / (1 - eps_pow(q, n - 1)), n - 1);
}

Rational expected_abs_det_closed(int n, const Rational& q) {
  require(n >= 1, "expected_abs_det_closed needs n >= 1");
  return (1 - eps_pow(q, 1)) / (1 - eps_pow(q, n + 1));
}

Rational expected_norm_closed(int n, const Rational& q) {
  require(n >= 1, "expected_norm_closed needs n >= 1");
  return (1 - eps_pow(q, n)) / (1 - eps_pow(q, n + 1));
}

Rational eta_factor(int k, int n, const Rational& q) {
  return grassmannian_volume(k, n, q) * pow(codim1_schubert_ratio(k, n, q), static_cast<long>(k) * (n - k));
}

Rational eta_closed(int k, int n, const Rational& q, const Rational& alpha) { return alpha * eta_factor(k, n, q); }

namespace {

constexpr double kEnumerationBudget = 1e7;

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Rational projective_point_count(unsigned p, int depth, int n) {
  const double work = std::pow(static_cast<double>(p), depth * n);
  if (work > kEnumerationBudget) throw BudgetExceeded("point count enumeration exceeds the budget");
  const std::uint64_t m = ipow(p, depth);
  const std::uint64_t total = ipow(m, n + 1);
  std::uint64_t primitive = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    bool unit = false;
    for (int i = 0; i <= n; ++i) {
      if ((c % m) % p != 0) unit = true;
      c /= m;
    }
    if (unit) ++primitive;
  }
  const std::uint64_t units = m - m / p;
  Rational points(static_cast<unsigned long>(primitive / units));
  return points / Rational(mpz_class(static_cast<unsigned long>(ipow(p, depth * n))));
}

// Rank of the rows of B selected by `rows`, mod p (small matrices).
int rank_mod_small(std::vector<std::vector<std::uint64_t>> a, std::uint64_t p) {
  int rank = 0;
  const std::size_t cols = a.empty() ? 0 : a[0].size();
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(a.size()); ++c) {
    std::size_t piv = static_cast<std::size_t>(rank);
    while (piv < a.size() && a[piv][c] % p == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[piv], a[static_cast<std::size_t>(rank)]);
    std::uint64_t inv = 1;
    for (std::uint64_t t = 1; t < p; ++t)
      if (a[static_cast<std::size_t>(rank)][c] * t % p == 1) inv = t;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == static_cast<std::size_t>(rank) || a[r][c] % p == 0) continue;
      const std::uint64_t f = a[r][c] * inv % p;
      for (std::size_t j = 0; j < cols; ++j) a[r][j] = (a[r][j] + (p - f) * (a[static_cast<std::size_t>(rank)][j] % p)) % p;
    }
    ++rank;
  }
  return rank;
}

Rational grassmannian_point_count(unsigned p, int depth, int k, int n) {
  const int free_entries = k * (n - k);
  const double work = std::pow(static_cast<double>(p), depth * free_entries);
  if (work > kEnumerationBudget) throw BudgetExceeded("point count enumeration exceeds the budget");
  const std::uint64_t m = ipow(p, depth);
  const std::uint64_t per_chart = ipow(m, free_entries);
  std::uint64_t points = 0;
  std::vector<int> chart(static_cast<std::size_t>(k));
  // Iterate over k-subsets I in lexicographic order.
  std::function<void(int, int)> rec = [&](int start, int depth_i) {
    if (depth_i == k) {
      std::vector<bool> in_chart(static_cast<std::size_t>(n), false);
      for (int i : chart) in_chart[static_cast<std::size_t>(i)] = true;
      for (std::uint64_t code = 0; code < per_chart; ++code) {
        std::vector<std::vector<std::uint64_t>> b(static_cast<std::size_t>(n), std::vector<std::uint64_t>(static_cast<std::size_t>(k), 0));
        std::uint64_t c = code;
        for (int r = 0, t = 0; r < n; ++r) {
          if (in_chart[static_cast<std::size_t>(r)]) {
            b[static_cast<std::size_t>(r)][static_cast<std::size_t>(t++)] = 1;
          } else {
            for (int j = 0; j < k; ++j) {
              b[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = c % m;
              c /= m;
            }
          }
        }
        // The point belongs to this chart iff I is the lexicographically first pivot set mod p.
        std::vector<std::vector<std::uint64_t>> chosen;
        std::vector<int> greedy;
        for (int r = 0; r < n && static_cast<int>(greedy.size()) < k; ++r) {
          chosen.push_back(b[static_cast<std::size_t>(r)]);
          if (rank_mod_small(chosen, p) == static_cast<int>(chosen.size()))
            greedy.push_back(r);
          else
            chosen.pop_back();
        }
        if (greedy == chart) ++points;
      }
      return;
    }
    for (int i = start; i < n; ++i) {
      chart[static_cast<std::size_t>(depth_i)] = i;
      rec(i + 1, depth_i + 1);
    }
  };
  rec(0, 0);
  return Rational(static_cast<unsigned long>(points)) / Rational(mpz_class(static_cast<unsigned long>(per_chart)));
}

}  // namespace

Rational point_count_volume(const PointCountSpace& space, unsigned p, int depth) {
  if (!is_prime(p)) throw InvalidConfig("p must be prime");
  if (depth < 1) throw InvalidConfig("depth must be positive");
  if (space.kind == PointCountSpace::Kind::Projective) return projective_point_count(p, depth, space.n);
  require(0 <= space.k && space.k <= space.n, "Grassmannian needs 0 <= k <= n");
  return grassmannian_point_count(p, depth, space.k, space.n);
}

}  // namespace padicgeom
