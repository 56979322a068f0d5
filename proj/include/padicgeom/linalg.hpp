#pragma once

#include <Eigen/Core>
#include <vector>

#include "padicgeom/padic.hpp"

namespace padicgeom {

template <typename Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ResidueMatrix = Dense<Residue>;

// Matrix over Z_p at precision N: residues plus the ring they live in.
class RMatrix {
 public:
  RMatrix(const ResidueRing& ring, Eigen::Index rows, Eigen::Index cols);
  RMatrix(const ResidueRing& ring, ResidueMatrix values);
  static RMatrix identity(const ResidueRing& ring, Eigen::Index n);
  static RMatrix from_integers(const ResidueRing& ring, const std::vector<std::vector<long long>>& rows);

  const ResidueRing& ring() const { return ring_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  Residue operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  Residue& operator()(Eigen::Index i, Eigen::Index j) { return values_(i, j); }
  const ResidueMatrix& values() const { return values_; }
  ResidueMatrix& values() { return values_; }

  RMatrix transpose() const;
  RMatrix block(Eigen::Index i, Eigen::Index j, Eigen::Index rows, Eigen::Index cols) const;
  RMatrix left_cols(Eigen::Index k) const { return block(0, 0, rows(), k); }
  RMatrix col(Eigen::Index j) const { return block(0, j, rows(), 1); }

  friend bool operator==(const RMatrix& a, const RMatrix& b);

 private:
  ResidueRing ring_;
  ResidueMatrix values_;
};

RMatrix operator*(const RMatrix& a, const RMatrix& b);
RMatrix operator+(const RMatrix& a, const RMatrix& b);
RMatrix operator-(const RMatrix& a, const RMatrix& b);
RMatrix hconcat(const RMatrix& a, const RMatrix& b);
RMatrix vconcat(const RMatrix& a, const RMatrix& b);
RMatrix block_diagonal(const RMatrix& a, const RMatrix& b);
RMatrix column_vector(const ResidueRing& ring, const std::vector<Residue>& entries);

struct Norm {
  ValExp exponent;
  Rational value;
  bool exact() const { return exponent.is_finite(); }
};

Norm make_norm(const PadicConfig& cfg, ValExp exponent);

Norm operator_norm(const PadicConfig& cfg, const RMatrix& a);
ValExp min_valuation(const RMatrix& a);

struct SmithDecomposition {
  RMatrix S;
  RMatrix T;
  RMatrix D;
  std::vector<ValExp> exponents;
  int rank_at_precision = 0;
};

SmithDecomposition smith_normal_form(const RMatrix& a);
// Exponents only; skips the transformation bookkeeping.
std::vector<ValExp> smith_exponents(const RMatrix& a);
ValExp exponent_sum(const std::vector<ValExp>& exponents);

Norm absolute_determinant(const PadicConfig& cfg, const RMatrix& a);
ValExp det_valuation(const RMatrix& a);

// Rank of the reduction mod p.
int rank_mod_p(const RMatrix& a);
bool is_unit_invertible(const RMatrix& a);
bool is_saturated(const RMatrix& a);
RMatrix inverse(const RMatrix& a);

struct BlockSmithDecomposition {
  RMatrix S;
  RMatrix T;
  RMatrix D;
  std::vector<ValExp> exponents;
};

struct RectangleBlockSmith {
  RMatrix P;
  RMatrix Q;
  RMatrix D;
  std::vector<ValExp> exponents;
};

// S, T block upper triangular (l + (n-l)) with S A T = [[I, 0], [D, I]].
BlockSmithDecomposition block_smith(const RMatrix& a, int l);
// P M Q = [I_k; 0; D] with P block upper triangular and Q in GL_k(R).
RectangleBlockSmith rectangle_block_smith(const RMatrix& m, int l);
bool is_block_upper_triangular(const RMatrix& a, int l);

RMatrix sample_gln(const ResidueRing& ring, int n, CounterRng& rng);
RMatrix sample_r_matrix(const ResidueRing& ring, int rows, int cols, CounterRng& rng);

// Columns form an R-basis of ker(A) intersected with R^n. Throws PrecisionError
// when the rank cannot be decided at the working precision.
RMatrix kernel_saturated(const RMatrix& a);
// Completes a saturated n x k basis to an element of GL_n(R) whose first k columns are B.
RMatrix extend_to_basis(const RMatrix& b);

}  // namespace padicgeom
