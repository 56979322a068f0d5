#pragma once

#include <string>
#include <vector>

#include "padicgeom/rational.hpp"
#include "padicgeom/subspace.hpp"

namespace padicgeom {

Rational gamma(int n, const Rational& q);
// [n]_q! = prod_{i=1}^n (q^i - 1)/(q - 1).
Rational q_factorial(int n, const Rational& q);
Rational q_binomial(int n, int k, const Rational& q);
// |P^n| = (1 - eps^{n+1}) / (1 - eps).
Rational projective_volume(int n, const Rational& q);
// |G(k,n)| = gamma_n / (gamma_k gamma_{n-k}).
Rational grassmannian_volume(int k, int n, const Rational& q);
// q^{-k(n-k)} [n k]_q, the second closed form.
Rational grassmannian_volume_binomial(int k, int n, const Rational& q);
Rational schubert_volume_ratio(int a, int a1, int b, int b1, const Rational& q);
// Relative volume of the k-planes in K^n meeting a fixed (n-k)-plane.
Rational codim1_schubert_ratio(int k, int n, const Rational& q);

// Finite entries (nondecreasing) plus the number of infinite entries.
struct PositionKey {
  std::vector<int> finite;
  int infinite = 0;

  static PositionKey from(const PositionVector& x);
  int size() const { return static_cast<int>(finite.size()) + infinite; }
  friend auto operator<=>(const PositionKey&, const PositionKey&) = default;
};

std::string to_string(const PositionKey& key);

Rational jacobian_psi_x(const PositionKey& x, int k, int l, int n, const Rational& q);
Rational fiber_factor(const PositionKey& x, int k, int l, const Rational& q);
Rational rho_constant(int k, int l, int n, const Rational& q);
Rational rho(const PositionKey& x, int k, int l, int n, const Rational& q);

// All nondecreasing k-tuples with entries in [0, max_entry].
std::vector<PositionKey> position_keys(int k, int max_entry);

struct TruncatedSum {
  Rational value;
  Rational tail_bound;
};

// Sum of rho over keys with entries <= max_entry, and a bound on the omitted mass.
TruncatedSum rho_normalization(int k, int l, int n, const Rational& q, int max_entry);

struct MomentIdentity {
  Rational lhs;
  Rational rhs;
  Rational tail_bound;
};

MomentIdentity rho_moment_identity(int k, int l, int n, int n_ambient, const Rational& q, int max_entry);

// alpha_K(1, n-1).
Rational alpha_proj_closed(int n, const Rational& q);
Rational expected_abs_det_closed(int n, const Rational& q);
// E||x|| for x uniform in R^n.
Rational expected_norm_closed(int n, const Rational& q);
// eta_{k,n} / alpha_K(k, n-k).
Rational eta_factor(int k, int n, const Rational& q);
Rational eta_closed(int k, int n, const Rational& q, const Rational& alpha);

struct PointCountSpace {
  enum class Kind { Projective, Grassmannian } kind;
  int k;
  int n;
  static PointCountSpace projective(int n) { return {Kind::Projective, 1, n}; }
  static PointCountSpace grassmannian(int k, int n) { return {Kind::Grassmannian, k, n}; }
};

// #X(Z/p^depth) / p^{depth * dim X}.
Rational point_count_volume(const PointCountSpace& space, unsigned p, int depth);

}  // namespace padicgeom
