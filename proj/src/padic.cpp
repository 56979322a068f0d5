#include "padicgeom/padic.hpp"

#include <bit>

#include "padicgeom/errors.hpp"

namespace padicgeom {

int ValExp::value() const {
  if (!is_finite()) throw PrecisionError("valuation is not finite at the working precision");
  return v_;
}

std::string to_string(ValExp v) { return v.is_finite() ? std::to_string(v.value()) : "inf"; }

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

int ResidueRing::max_precision(Residue p) {
  constexpr unsigned __int128 kLimit = static_cast<unsigned __int128>(1) << 62;
  int n = 0;
  unsigned __int128 m = 1;
  while (m * p <= kLimit) {
    m *= p;
    ++n;
  }
  return n;
}

ResidueRing::ResidueRing(Residue p, int precision) : p_(p), n_(precision), modulus_(1) {
  if (!is_prime(p)) throw InvalidConfig("p must be prime, got " + std::to_string(p));
  if (precision < 3) throw InvalidConfig("precision must be at least 3");
  if (precision > max_precision(p))
    throw InvalidConfig("p^N must stay below 2^62; maximum N for p=" + std::to_string(p) + " is " +
                        std::to_string(max_precision(p)));
  for (int i = 0; i < precision; ++i) modulus_ *= p;
}

Residue ResidueRing::from_integer(long long value) const {
  const long long m = static_cast<long long>(modulus_);
  long long r = value % m;
  if (r < 0) r += m;
  return static_cast<Residue>(r);
}

Residue ResidueRing::add(Residue a, Residue b) const {
  Residue s = a + b;
  return s >= modulus_ ? s - modulus_ : s;
}

Residue ResidueRing::sub(Residue a, Residue b) const { return a >= b ? a - b : a + (modulus_ - b); }

Residue ResidueRing::neg(Residue a) const { return a == 0 ? 0 : modulus_ - a; }

Residue ResidueRing::mul(Residue a, Residue b) const {
  return static_cast<Residue>(static_cast<unsigned __int128>(a) * b % modulus_);
}

Residue ResidueRing::pow(Residue a, std::uint64_t e) const {
  Residue result = 1 % modulus_;
  Residue base = a % modulus_;
  while (e > 0) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
    e >>= 1;
  }
  return result;
}

Residue ResidueRing::p_pow(int k) const {
  if (k >= n_) return 0;
  Residue r = 1;
  for (int i = 0; i < k; ++i) r *= p_;
  return r;
}

Residue ResidueRing::inverse(Residue unit) const {
  if (!is_unit(unit)) throw PrecisionError("element is not a unit");
  __int128 t = 0, new_t = 1;
  __int128 r = modulus_, new_r = unit % modulus_;
  while (new_r != 0) {
    __int128 quotient = r / new_r;
    __int128 tmp = t - quotient * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - quotient * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (t < 0) t += modulus_;
  return static_cast<Residue>(t);
}

ValExp ResidueRing::valuation(Residue a) const {
  if (a == 0) return ValExp::at_least_precision();
  if (p_ == 2) return ValExp::finite(std::countr_zero(a));
  int v = 0;
  while (a % p_ == 0) {
    a /= p_;
    ++v;
  }
  return ValExp::finite(v);
}

Residue ResidueRing::unit_part(Residue a) const {
  if (a == 0) return 0;
  while (a % p_ == 0) a /= p_;
  return a;
}

PadicConfig::PadicConfig(Residue p, int precision, std::optional<Rational> q_value)
    : ring(p, precision == 0 ? ResidueRing::max_precision(p) : precision),
      q(q_value ? *q_value : Rational(static_cast<unsigned long>(p))) {
  if (q <= 1) throw InvalidConfig("q must be a rational number greater than 1");
}

Rational PadicConfig::norm(ValExp v) const {
  if (!v.is_finite()) return 0;
  return epsilon_pow(q, v.value());
}

RElement::RElement(const ResidueRing& ring, long long value) : ring_(ring), r_(ring.from_integer(value)) {}

RElement::RElement(const ResidueRing& ring, Residue r, int) : ring_(ring), r_(r % ring.modulus()) {}

RElement RElement::from_residue(const ResidueRing& ring, Residue r) { return RElement(ring, r, 0); }

namespace {
void require_same_ring(const RElement& a, const RElement& b) {
  if (!(a.ring() == b.ring())) throw ConfigMismatch("operands use different p-adic configurations");
}
}  // namespace

RElement operator+(const RElement& a, const RElement& b) {
  require_same_ring(a, b);
  return RElement::from_residue(a.ring_, a.ring_.add(a.r_, b.r_));
}

RElement operator-(const RElement& a, const RElement& b) {
  require_same_ring(a, b);
  return RElement::from_residue(a.ring_, a.ring_.sub(a.r_, b.r_));
}

RElement operator*(const RElement& a, const RElement& b) {
  require_same_ring(a, b);
  return RElement::from_residue(a.ring_, a.ring_.mul(a.r_, b.r_));
}

ValExp valuation(const RElement& x) { return x.ring().valuation(x.residue()); }

RElement multiply(const RElement& x, const RElement& y) { return x * y; }

KElement::KElement(int shift, const RElement& unit) : shift_(shift), unit_(unit) {
  if (!unit.ring().is_unit(unit.residue())) throw std::invalid_argument("KElement unit part must be a unit");
}

KElement::KElement(const ResidueRing& ring) : unit_(ring, 0), zero_(true) {}

KElement KElement::from(const RElement& x) {
  const ResidueRing& ring = x.ring();
  ValExp v = ring.valuation(x.residue());
  if (!v.is_finite()) return zero(ring);
  return KElement(v.value(), RElement::from_residue(ring, ring.unit_part(x.residue())));
}

KElement KElement::zero(const ResidueRing& ring) { return KElement(ring); }

std::string to_string(Ternary t) {
  switch (t) {
    case Ternary::True:
      return "true";
    case Ternary::False:
      return "false";
    default:
      return "indeterminate";
  }
}

namespace {

std::uint64_t powmod_small(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  unsigned __int128 result = 1 % m, base = a % m;
  while (e > 0) {
    if (e & 1) result = result * base % m;
    base = base * base % m;
    e >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

// Tonelli-Shanks modulo an odd prime.
std::uint64_t sqrt_mod_prime(std::uint64_t a, std::uint64_t p) {
  a %= p;
  if (a == 0) return 0;
  std::uint64_t q = p - 1;
  int s = 0;
  while ((q & 1) == 0) {
    q >>= 1;
    ++s;
  }
  std::uint64_t z = 2;
  while (powmod_small(z, (p - 1) / 2, p) != p - 1) ++z;
  std::uint64_t m = static_cast<std::uint64_t>(s);
  std::uint64_t c = powmod_small(z, q, p);
  std::uint64_t t = powmod_small(a, q, p);
  std::uint64_t r = powmod_small(a, (q + 1) / 2, p);
  while (t != 1) {
    std::uint64_t i = 0, t2 = t;
    while (t2 != 1) {
      t2 = static_cast<std::uint64_t>(static_cast<unsigned __int128>(t2) * t2 % p);
      ++i;
    }
    std::uint64_t b = powmod_small(c, std::uint64_t{1} << (m - i - 1), p);
    m = i;
    c = static_cast<std::uint64_t>(static_cast<unsigned __int128>(b) * b % p);
    t = static_cast<std::uint64_t>(static_cast<unsigned __int128>(t) * c % p);
    r = static_cast<std::uint64_t>(static_cast<unsigned __int128>(r) * b % p);
  }
  return r;
}

}  // namespace

Ternary is_square_unit(Residue unit, Residue p, int digits) {
  if (p == 2) {
    if (digits < 3) return Ternary::Indeterminate;
    return (unit % 8 == 1) ? Ternary::True : Ternary::False;
  }
  if (digits < 1) return Ternary::Indeterminate;
  return powmod_small(unit % p, (p - 1) / 2, p) == 1 ? Ternary::True : Ternary::False;
}

Ternary is_square(const KElement& x) {
  if (x.is_zero()) return Ternary::Indeterminate;
  if (x.shift() % 2 != 0) return Ternary::False;
  const ResidueRing& ring = x.unit().ring();
  return is_square_unit(x.unit().residue(), ring.p(), ring.precision() - x.shift());
}

Residue sqrt_unit(const ResidueRing& ring, Residue unit, int digits) {
  if (is_square_unit(unit, ring.p(), digits) != Ternary::True)
    throw std::invalid_argument("sqrt_unit: not a square unit at this precision");
  if (ring.p() == 2) {
    Residue r = 1;
    for (int i = 3; i < ring.precision(); ++i) {
      Residue mask = ring.p_pow(i + 1);
      Residue diff = ring.sub(ring.mul(r, r), unit);
      if (mask != 0 && diff % mask != 0) r = ring.add(r, ring.p_pow(i - 1));
      if (mask == 0 && diff != 0) r = ring.add(r, ring.p_pow(i - 1));
    }
    return r;
  }
  Residue r = sqrt_mod_prime(unit % ring.p(), ring.p());
  for (int k = 1; k < ring.precision(); k *= 2) {
    Residue f = ring.sub(ring.mul(r, r), unit);
    r = ring.sub(r, ring.mul(f, ring.inverse(ring.add(r, r))));
  }
  Residue f = ring.sub(ring.mul(r, r), unit);
  return ring.sub(r, ring.mul(f, ring.inverse(ring.add(r, r))));
}

Residue sample_uniform(const ResidueRing& ring, SampleRegion region, CounterRng& rng) {
  for (;;) {
    Residue r = rng.uniform_below(ring.modulus());
    if (region == SampleRegion::R || ring.is_unit(r)) return r;
  }
}

std::vector<Residue> sample_r_vector(const ResidueRing& ring, int n, CounterRng& rng) {
  std::vector<Residue> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.uniform_below(ring.modulus());
  return v;
}

std::vector<Residue> sample_sphere(const ResidueRing& ring, int n, CounterRng& rng) {
  for (;;) {
    std::vector<Residue> v = sample_r_vector(ring, n, rng);
    for (Residue x : v)
      if (ring.is_unit(x)) return v;
  }
}

ValExp min_valuation(const ResidueRing& ring, const std::vector<Residue>& v) {
  ValExp best = ValExp::at_least_precision();
  for (Residue x : v) best = std::min(best, ring.valuation(x));
  return best;
}

}  // namespace padicgeom
