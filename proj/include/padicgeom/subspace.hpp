#pragma once

#include <vector>

#include "padicgeom/linalg.hpp"

namespace padicgeom {

// Subspace E of K^n stored by a saturated basis (columns R-span E ∩ R^n) in
// canonical form B·B_I^{-1}, where I is the lexicographically first set of rows
// whose minor is a unit.
class Subspace {
 public:
  Eigen::Index ambient() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const RMatrix& basis() const { return basis_; }
  const std::vector<Eigen::Index>& pivots() const { return pivots_; }
  const ResidueRing& ring() const { return basis_.ring(); }

  friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }
  friend Subspace from_saturated(const RMatrix& basis);

 private:
  Subspace(RMatrix basis, std::vector<Eigen::Index> pivots) : basis_(std::move(basis)), pivots_(std::move(pivots)) {}
  RMatrix basis_;
  std::vector<Eigen::Index> pivots_;
};

// Column span of M (rank k at precision) with a saturated basis.
Subspace saturate(const RMatrix& m);
// Canonicalizes an already saturated basis.
Subspace from_saturated(const RMatrix& basis);
Subspace coordinate_subspace(const ResidueRing& ring, Eigen::Index n, Eigen::Index k);
Subspace sample_uniform_subspace(const ResidueRing& ring, int k, int n, CounterRng& rng);
Subspace orthogonal_complement(const Subspace& e);
Subspace transform(const RMatrix& g, const Subspace& e);

using PositionVector = std::vector<ValExp>;

PositionVector position_vector(const Subspace& e, const Subspace& f);
Norm sigma_relative_position(const PadicConfig& cfg, const std::vector<Subspace>& spaces);

}  // namespace padicgeom
