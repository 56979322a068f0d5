#pragma once

#include <climits>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padicgeom/rational.hpp"
#include "padicgeom/rng.hpp"

namespace padicgeom {

using Residue = std::uint64_t;

// A valuation that is exact below the working precision N and otherwise only
// known to be at least N.
class ValExp {
 public:
  constexpr ValExp() = default;
  static constexpr ValExp finite(int v) { return ValExp(v); }
  static constexpr ValExp at_least_precision() { return ValExp(); }

  constexpr bool is_finite() const { return v_ != kUnbounded; }
  int value() const;

  friend constexpr auto operator<=>(ValExp, ValExp) = default;

 private:
  static constexpr int kUnbounded = INT_MAX;
  constexpr explicit ValExp(int v) : v_(v) {}
  int v_ = kUnbounded;
};

std::string to_string(ValExp v);

bool is_prime(std::uint64_t n);

// Z / p^N. Moduli stay below 2^62 so products fit in 128 bits.
class ResidueRing {
 public:
  ResidueRing(Residue p, int precision);

  static int max_precision(Residue p);

  Residue p() const { return p_; }
  int precision() const { return n_; }
  Residue modulus() const { return modulus_; }

  Residue from_integer(long long value) const;
  Residue add(Residue a, Residue b) const;
  Residue sub(Residue a, Residue b) const;
  Residue neg(Residue a) const;
  Residue mul(Residue a, Residue b) const;
  Residue pow(Residue a, std::uint64_t e) const;
  Residue p_pow(int k) const;
  Residue inverse(Residue unit) const;

  ValExp valuation(Residue a) const;
  // a / p^val(a) as an integer; coprime to p unless a == 0.
  Residue unit_part(Residue a) const;
  bool is_unit(Residue a) const { return a % p_ != 0; }

  friend bool operator==(const ResidueRing& a, const ResidueRing& b) {
    return a.p_ == b.p_ && a.n_ == b.n_;
  }

 private:
  Residue p_;
  int n_;
  Residue modulus_;
};

struct PadicConfig {
  explicit PadicConfig(Residue p, int precision = 0, std::optional<Rational> q = std::nullopt);

  ResidueRing ring;
  Rational q;

  Residue p() const { return ring.p(); }
  int precision() const { return ring.precision(); }
  Rational epsilon() const { return Rational(1) / q; }
  // |x| for an element of valuation v; 0 when v is not finite.
  Rational norm(ValExp v) const;
};

class RElement {
 public:
  RElement(const ResidueRing& ring, long long value);
  static RElement from_residue(const ResidueRing& ring, Residue r);

  const ResidueRing& ring() const { return ring_; }
  Residue residue() const { return r_; }

  friend RElement operator+(const RElement& a, const RElement& b);
  friend RElement operator-(const RElement& a, const RElement& b);
  friend RElement operator*(const RElement& a, const RElement& b);
  friend bool operator==(const RElement& a, const RElement& b) {
    return a.ring_ == b.ring_ && a.r_ == b.r_;
  }

 private:
  RElement(const ResidueRing& ring, Residue r, int);
  ResidueRing ring_;
  Residue r_;
};

ValExp valuation(const RElement& x);
RElement multiply(const RElement& x, const RElement& y);

// p^shift * unit, or zero at precision.
class KElement {
 public:
  KElement(int shift, const RElement& unit);
  static KElement from(const RElement& x);
  static KElement zero(const ResidueRing& ring);

  bool is_zero() const { return zero_; }
  int shift() const { return shift_; }
  const RElement& unit() const { return unit_; }

 private:
  KElement(const ResidueRing& ring);
  int shift_ = 0;
  RElement unit_;
  bool zero_ = false;
};

enum class Ternary { False, True, Indeterminate };

std::string to_string(Ternary t);

Ternary is_square(const KElement& x);
// Square test for a unit u known modulo p^digits.
Ternary is_square_unit(Residue unit, Residue p, int digits);
// r with r^2 = u mod p^digits (p odd) or mod 2^(digits-1) (p = 2); the unit must be a square.
Residue sqrt_unit(const ResidueRing& ring, Residue unit, int digits);

enum class SampleRegion { R, Unit };

Residue sample_uniform(const ResidueRing& ring, SampleRegion region, CounterRng& rng);
std::vector<Residue> sample_r_vector(const ResidueRing& ring, int n, CounterRng& rng);
// Uniform on the unit sphere {x in R^n : ||x|| = 1}.
std::vector<Residue> sample_sphere(const ResidueRing& ring, int n, CounterRng& rng);
ValExp min_valuation(const ResidueRing& ring, const std::vector<Residue>& v);

}  // namespace padicgeom
