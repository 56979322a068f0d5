#include "padicgeom/linalg.hpp"

#include <algorithm>

#include "padicgeom/errors.hpp"

namespace padicgeom {

RMatrix::RMatrix(const ResidueRing& ring, Eigen::Index rows, Eigen::Index cols)
    : ring_(ring), values_(ResidueMatrix::Zero(rows, cols)) {}

RMatrix::RMatrix(const ResidueRing& ring, ResidueMatrix values) : ring_(ring), values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.rows(); ++i)
    for (Eigen::Index j = 0; j < values_.cols(); ++j) values_(i, j) %= ring_.modulus();
}

RMatrix RMatrix::identity(const ResidueRing& ring, Eigen::Index n) {
  RMatrix r(ring, n, n);
  for (Eigen::Index i = 0; i < n; ++i) r(i, i) = 1;
  return r;
}

RMatrix RMatrix::from_integers(const ResidueRing& ring, const std::vector<std::vector<long long>>& rows) {
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = m == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
  RMatrix r(ring, m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw DimensionMismatch("ragged matrix literal");
    for (Eigen::Index j = 0; j < n; ++j)
      r(i, j) = ring.from_integer(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  return r;
}

RMatrix RMatrix::transpose() const { return RMatrix(ring_, ResidueMatrix(values_.transpose())); }

RMatrix RMatrix::block(Eigen::Index i, Eigen::Index j, Eigen::Index rows, Eigen::Index cols) const {
  return RMatrix(ring_, ResidueMatrix(values_.block(i, j, rows, cols)));
}

bool operator==(const RMatrix& a, const RMatrix& b) {
  return a.ring_ == b.ring_ && a.rows() == b.rows() && a.cols() == b.cols() && a.values_ == b.values_;
}

namespace {

void require_same(const RMatrix& a, const RMatrix& b) {
  if (!(a.ring() == b.ring())) throw ConfigMismatch("matrices use different p-adic configurations");
}

}  // namespace

RMatrix operator*(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product dimensions");
  const ResidueRing& ring = a.ring();
  RMatrix r(ring, a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Residue acc = 0;
      for (Eigen::Index t = 0; t < a.cols(); ++t) acc = ring.add(acc, ring.mul(a(i, t), b(t, j)));
      r(i, j) = acc;
    }
  return r;
}

RMatrix operator+(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix sum dimensions");
  RMatrix r(a.ring(), a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a.ring().add(a(i, j), b(i, j));
  return r;
}

RMatrix operator-(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix difference dimensions");
  RMatrix r(a.ring(), a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = a.ring().sub(a(i, j), b(i, j));
  return r;
}

RMatrix hconcat(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  if (a.rows() != b.rows()) throw DimensionMismatch("hconcat row mismatch");
  ResidueMatrix r(a.rows(), a.cols() + b.cols());
  r.leftCols(a.cols()) = a.values();
  r.rightCols(b.cols()) = b.values();
  return RMatrix(a.ring(), std::move(r));
}

RMatrix vconcat(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  if (a.cols() != b.cols()) throw DimensionMismatch("vconcat column mismatch");
  ResidueMatrix r(a.rows() + b.rows(), a.cols());
  r.topRows(a.rows()) = a.values();
  r.bottomRows(b.rows()) = b.values();
  return RMatrix(a.ring(), std::move(r));
}

RMatrix block_diagonal(const RMatrix& a, const RMatrix& b) {
  require_same(a, b);
  RMatrix r(a.ring(), a.rows() + b.rows(), a.cols() + b.cols());
  r.values().block(0, 0, a.rows(), a.cols()) = a.values();
  r.values().block(a.rows(), a.cols(), b.rows(), b.cols()) = b.values();
  return r;
}

RMatrix column_vector(const ResidueRing& ring, const std::vector<Residue>& entries) {
  RMatrix r(ring, static_cast<Eigen::Index>(entries.size()), 1);
  for (std::size_t i = 0; i < entries.size(); ++i) r(static_cast<Eigen::Index>(i), 0) = entries[i] % ring.modulus();
  return r;
}

Norm make_norm(const PadicConfig& cfg, ValExp exponent) { return Norm{exponent, cfg.norm(exponent)}; }

ValExp min_valuation(const RMatrix& a) {
  ValExp best = ValExp::at_least_precision();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::min(best, a.ring().valuation(a(i, j)));
  return best;
}

Norm operator_norm(const PadicConfig& cfg, const RMatrix& a) { return make_norm(cfg, min_valuation(a)); }

namespace {

// Diagonalizes d in place by unimodular row and column operations, pivoting on an
// entry of minimal valuation (first in row-major order). Row operations are
// mirrored into s and column operations into t when given.
std::vector<ValExp> diagonalize(const ResidueRing& ring, ResidueMatrix& d, ResidueMatrix* s, ResidueMatrix* t) {
  const Eigen::Index m = d.rows(), n = d.cols(), r = std::min(m, n);
  std::vector<ValExp> exps;
  exps.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index k = 0; k < r; ++k) {
    ValExp best = ValExp::at_least_precision();
    Eigen::Index bi = k, bj = k;
    for (Eigen::Index i = k; i < m && best != ValExp::finite(0); ++i)
      for (Eigen::Index j = k; j < n; ++j) {
        ValExp v = ring.valuation(d(i, j));
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
          if (v == ValExp::finite(0)) break;
        }
      }
    if (!best.is_finite()) {
      exps.resize(static_cast<std::size_t>(r), ValExp::at_least_precision());
      return exps;
    }
    if (bi != k) {
      d.row(k).swap(d.row(bi));
      if (s) s->row(k).swap(s->row(bi));
    }
    if (bj != k) {
      d.col(k).swap(d.col(bj));
      if (t) t->col(k).swap(t->col(bj));
    }
    const int v = best.value();
    const Residue pk = ring.p_pow(v);
    const Residue uinv = ring.inverse(ring.unit_part(d(k, k)));
    if (uinv != 1) {
      for (Eigen::Index j = k; j < n; ++j) d(k, j) = ring.mul(d(k, j), uinv);
      if (s)
        for (Eigen::Index j = 0; j < s->cols(); ++j) (*s)(k, j) = ring.mul((*s)(k, j), uinv);
    }
    for (Eigen::Index i = k + 1; i < m; ++i) {
      if (d(i, k) == 0) continue;
      const Residue c = d(i, k) / pk;
      for (Eigen::Index j = k; j < n; ++j) d(i, j) = ring.sub(d(i, j), ring.mul(c, d(k, j)));
      if (s)
        for (Eigen::Index j = 0; j < s->cols(); ++j) (*s)(i, j) = ring.sub((*s)(i, j), ring.mul(c, (*s)(k, j)));
    }
    for (Eigen::Index j = k + 1; j < n; ++j) {
      if (d(k, j) == 0) continue;
      const Residue c = d(k, j) / pk;
      d(k, j) = 0;
      if (t)
        for (Eigen::Index i = 0; i < t->rows(); ++i) (*t)(i, j) = ring.sub((*t)(i, j), ring.mul(c, (*t)(i, k)));
    }
    exps.push_back(best);
  }
  return exps;
}

}  // namespace

SmithDecomposition smith_normal_form(const RMatrix& a) {
  const ResidueRing& ring = a.ring();
  ResidueMatrix d = a.values();
  RMatrix s = RMatrix::identity(ring, a.rows());
  RMatrix t = RMatrix::identity(ring, a.cols());
  std::vector<ValExp> exps = diagonalize(ring, d, &s.values(), &t.values());
  int rank = static_cast<int>(std::count_if(exps.begin(), exps.end(), [](ValExp v) { return v.is_finite(); }));
  RMatrix dm(ring, a.rows(), a.cols());
  for (std::size_t i = 0; i < exps.size(); ++i)
    if (exps[i].is_finite()) dm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ring.p_pow(exps[i].value());
  return SmithDecomposition{std::move(s), std::move(t), std::move(dm), std::move(exps), rank};
}

std::vector<ValExp> smith_exponents(const RMatrix& a) {
  ResidueMatrix d = a.values();
  return diagonalize(a.ring(), d, nullptr, nullptr);
}

ValExp exponent_sum(const std::vector<ValExp>& exponents) {
  int total = 0;
  for (ValExp v : exponents) {
    if (!v.is_finite()) return ValExp::at_least_precision();
    total += v.value();
  }
  return ValExp::finite(total);
}

ValExp det_valuation(const RMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("determinant of a non-square matrix");
  ValExp v = exponent_sum(smith_exponents(a));
  if (v.is_finite() && v.value() >= a.ring().precision()) return ValExp::at_least_precision();
  return v;
}

Norm absolute_determinant(const PadicConfig& cfg, const RMatrix& a) {
  return make_norm(cfg, exponent_sum(smith_exponents(a)));
}

namespace {

// Incremental row-echelon basis of a subspace of F_p^k.
class ModPBasis {
 public:
  ModPBasis(Residue p, Eigen::Index k) : p_(p), k_(k) {}

  bool try_add(std::vector<Residue> v) {
    for (std::size_t b = 0; b < rows_.size(); ++b) {
      const Residue c = v[static_cast<std::size_t>(pivots_[b])];
      if (c == 0) continue;
      for (Eigen::Index j = 0; j < k_; ++j) {
        auto jj = static_cast<std::size_t>(j);
        v[jj] = (v[jj] + (p_ - c) * rows_[b][jj]) % p_;
      }
    }
    for (Eigen::Index j = 0; j < k_; ++j) {
      auto jj = static_cast<std::size_t>(j);
      if (v[jj] == 0) continue;
      const Residue inv = inverse_mod_p(v[jj]);
      for (auto& x : v) x = x * inv % p_;
      rows_.push_back(std::move(v));
      pivots_.push_back(j);
      return true;
    }
    return false;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  Residue inverse_mod_p(Residue a) const {
    Residue result = 1, base = a % p_, e = p_ - 2;
    while (e > 0) {
      if (e & 1) result = result * base % p_;
      base = base * base % p_;
      e >>= 1;
    }
    return result;
  }

  Residue p_;
  Eigen::Index k_;
  std::vector<std::vector<Residue>> rows_;
  std::vector<Eigen::Index> pivots_;
};

std::vector<Residue> row_mod_p(const RMatrix& a, Eigen::Index i) {
  std::vector<Residue> v(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) v[static_cast<std::size_t>(j)] = a(i, j) % a.ring().p();
  return v;
}

}  // namespace

int rank_mod_p(const RMatrix& a) {
  ModPBasis basis(a.ring().p(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) basis.try_add(row_mod_p(a, i));
  return static_cast<int>(basis.size());
}

bool is_unit_invertible(const RMatrix& a) { return a.rows() == a.cols() && rank_mod_p(a) == a.rows(); }

bool is_saturated(const RMatrix& a) { return rank_mod_p(a) == a.cols(); }

RMatrix inverse(const RMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("inverse of a non-square matrix");
  const ResidueRing& ring = a.ring();
  const Eigen::Index n = a.rows();
  ResidueMatrix m = a.values();
  ResidueMatrix inv = RMatrix::identity(ring, n).values();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    while (piv < n && !ring.is_unit(m(piv, k))) ++piv;
    if (piv == n) throw PrecisionError("matrix is not invertible over R at this precision");
    if (piv != k) {
      m.row(k).swap(m.row(piv));
      inv.row(k).swap(inv.row(piv));
    }
    const Residue u = ring.inverse(m(k, k));
    for (Eigen::Index j = 0; j < n; ++j) {
      m(k, j) = ring.mul(m(k, j), u);
      inv(k, j) = ring.mul(inv(k, j), u);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == k || m(i, k) == 0) continue;
      const Residue c = m(i, k);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(i, j) = ring.sub(m(i, j), ring.mul(c, m(k, j)));
        inv(i, j) = ring.sub(inv(i, j), ring.mul(c, inv(k, j)));
      }
    }
  }
  return RMatrix(ring, std::move(inv));
}

bool is_block_upper_triangular(const RMatrix& a, int l) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || l < 0 || l > n) return false;
  for (Eigen::Index i = l; i < n; ++i)
    for (Eigen::Index j = 0; j < l; ++j)
      if (a(i, j) != 0) return false;
  return is_unit_invertible(a.block(0, 0, l, l)) && is_unit_invertible(a.block(l, l, n - l, n - l));
}

RectangleBlockSmith rectangle_block_smith(const RMatrix& m, int l) {
  const ResidueRing& ring = m.ring();
  const Eigen::Index n = m.rows(), k = m.cols();
  if (k > l || l > n) throw DimensionMismatch("rectangle_block_smith needs k <= l <= n");
  if (!is_saturated(m)) throw NotSaturated("columns do not form a saturated basis");

  // Make the top l x k block full rank mod p by adding bottom rows into top rows
  // that are dependent mod p.
  RMatrix p0 = RMatrix::identity(ring, n);
  ModPBasis basis(ring.p(), k);
  std::vector<Eigen::Index> dependent;
  for (Eigen::Index i = 0; i < l; ++i)
    if (!basis.try_add(row_mod_p(m, i))) dependent.push_back(i);
  std::size_t next_slot = 0;
  for (Eigen::Index j = l; j < n && static_cast<Eigen::Index>(basis.size()) < k; ++j) {
    if (basis.try_add(row_mod_p(m, j))) p0(dependent[next_slot++], j) = 1;
  }
  if (static_cast<Eigen::Index>(basis.size()) < k) throw NotSaturated("columns do not form a saturated basis");
  const RMatrix m1 = p0 * m;

  SmithDecomposition top = smith_normal_form(m1.block(0, 0, l, k));
  for (ValExp v : top.exponents)
    if (v != ValExp::finite(0)) throw PrecisionError("top block did not become unit-invertible");

  const RMatrix b = m1.block(l, 0, n - l, k) * top.T;
  SmithDecomposition low = smith_normal_form(b);
  RMatrix v_inv = inverse(low.T);

  RMatrix left = block_diagonal(block_diagonal(v_inv, RMatrix::identity(ring, l - k)), low.S);
  RMatrix P = left * block_diagonal(top.S, RMatrix::identity(ring, n - l)) * p0;
  RMatrix Q = top.T * low.T;
  return RectangleBlockSmith{std::move(P), std::move(Q), std::move(low.D), std::move(low.exponents)};
}

BlockSmithDecomposition block_smith(const RMatrix& a, int l) {
  const ResidueRing& ring = a.ring();
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("block_smith needs a square matrix");
  if (l < 1 || l > n) throw DimensionMismatch("block_smith needs 1 <= l <= n");
  if (!is_unit_invertible(a)) throw PrecisionError("matrix is not unit-invertible at this precision");

  RectangleBlockSmith rect = rectangle_block_smith(a.left_cols(l), l);
  RMatrix t1 = block_diagonal(rect.Q, RMatrix::identity(ring, n - l));
  RMatrix x = rect.P * a * t1;
  const RMatrix b12 = x.block(0, l, l, n - l);
  RMatrix t2 = RMatrix::identity(ring, n);
  for (Eigen::Index i = 0; i < l; ++i)
    for (Eigen::Index j = 0; j < n - l; ++j) t2(i, l + j) = ring.neg(b12(i, j));
  RMatrix y = x * t2;
  RMatrix c22_inv = inverse(y.block(l, l, n - l, n - l));
  RMatrix T = t1 * t2 * block_diagonal(RMatrix::identity(ring, l), c22_inv);
  return BlockSmithDecomposition{std::move(rect.P), std::move(T), std::move(rect.D), std::move(rect.exponents)};
}

RMatrix sample_r_matrix(const ResidueRing& ring, int rows, int cols, CounterRng& rng) {
  RMatrix r(ring, rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) r(i, j) = rng.uniform_below(ring.modulus());
  return r;
}

RMatrix sample_gln(const ResidueRing& ring, int n, CounterRng& rng) {
  for (;;) {
    RMatrix g = sample_r_matrix(ring, n, n, rng);
    if (rank_mod_p(g) == n) return g;
  }
}

RMatrix kernel_saturated(const RMatrix& a) {
  SmithDecomposition snf = smith_normal_form(a);
  for (ValExp v : snf.exponents)
    if (!v.is_finite()) throw PrecisionError("rank indeterminate at precision");
  const Eigen::Index rank = static_cast<Eigen::Index>(snf.exponents.size());
  return snf.T.block(0, rank, a.cols(), a.cols() - rank);
}

RMatrix extend_to_basis(const RMatrix& b) {
  if (!is_saturated(b)) throw NotSaturated("cannot extend a non-saturated basis");
  SmithDecomposition snf = smith_normal_form(b);
  RMatrix s_inv = inverse(snf.S);
  return hconcat(b, s_inv.block(0, b.cols(), b.rows(), b.rows() - b.cols()));
}

}  // namespace padicgeom
