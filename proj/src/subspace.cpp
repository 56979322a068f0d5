#include "padicgeom/subspace.hpp"

#include <stdexcept>
#include <utility>

#include "padicgeom/errors.hpp"

namespace padicgeom {

namespace {

std::vector<Eigen::Index> lex_first_pivots(const RMatrix& b) {
  const Residue p = b.ring().p();
  const Eigen::Index k = b.cols();
  std::vector<Eigen::Index> pivots;
  std::vector<std::vector<Residue>> chosen;
  for (Eigen::Index i = 0; i < b.rows() && static_cast<Eigen::Index>(pivots.size()) < k; ++i) {
    // Test whether the rows chosen so far plus row i stay independent mod p.
    RMatrix trial(b.ring(), static_cast<Eigen::Index>(chosen.size()) + 1, k);
    for (std::size_t r = 0; r < chosen.size(); ++r)
      for (Eigen::Index j = 0; j < k; ++j) trial(static_cast<Eigen::Index>(r), j) = chosen[r][static_cast<std::size_t>(j)];
    std::vector<Residue> row(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
      row[static_cast<std::size_t>(j)] = b(i, j) % p;
      trial(static_cast<Eigen::Index>(chosen.size()), j) = row[static_cast<std::size_t>(j)];
    }
    if (rank_mod_p(trial) == static_cast<int>(chosen.size()) + 1) {
      chosen.push_back(std::move(row));
      pivots.push_back(i);
    }
  }
  if (static_cast<Eigen::Index>(pivots.size()) != k) throw NotSaturated("basis is not saturated");
  return pivots;
}

}  // namespace

Subspace from_saturated(const RMatrix& basis) {
  std::vector<Eigen::Index> pivots = lex_first_pivots(basis);
  const Eigen::Index k = basis.cols();
  RMatrix bi(basis.ring(), k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index j = 0; j < k; ++j) bi(r, j) = basis(pivots[static_cast<std::size_t>(r)], j);
  return Subspace(basis * inverse(bi), std::move(pivots));
}

Subspace saturate(const RMatrix& m) {
  SmithDecomposition snf = smith_normal_form(m);
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.cols()); ++i)
    if (i >= snf.exponents.size() || !snf.exponents[i].is_finite())
      throw PrecisionError("columns are not linearly independent at this precision");
  RMatrix s_inv = inverse(snf.S);
  return from_saturated(s_inv.left_cols(m.cols()));
}

Subspace coordinate_subspace(const ResidueRing& ring, Eigen::Index n, Eigen::Index k) {
  return from_saturated(RMatrix::identity(ring, n).left_cols(k));
}

Subspace sample_uniform_subspace(const ResidueRing& ring, int k, int n, CounterRng& rng) {
  if (k < 0 || k > n) throw DimensionMismatch("subspace dimension out of range");
  return from_saturated(sample_gln(ring, n, rng).left_cols(k));
}

Subspace orthogonal_complement(const Subspace& e) { return from_saturated(kernel_saturated(e.basis().transpose())); }

Subspace transform(const RMatrix& g, const Subspace& e) { return from_saturated(g * e.basis()); }

PositionVector position_vector(const Subspace& e, const Subspace& f) {
  if (e.ambient() != f.ambient()) throw DimensionMismatch("subspaces live in different ambient spaces");
  const Subspace& small = e.dim() <= f.dim() ? e : f;
  const Subspace& large = e.dim() <= f.dim() ? f : e;
  const Eigen::Index n = e.ambient(), k = small.dim(), l = large.dim();
  if (k + l <= n) {
    std::vector<ValExp> exps = smith_exponents(hconcat(small.basis(), large.basis()));
    for (Eigen::Index i = 0; i < l; ++i)
      if (exps[static_cast<std::size_t>(i)] != ValExp::finite(0))
        throw std::logic_error("saturated basis produced a nonzero leading exponent");
    return PositionVector(exps.begin() + l, exps.end());
  }
  PositionVector dual = position_vector(orthogonal_complement(small), orthogonal_complement(large));
  PositionVector out;
  for (ValExp v : dual)
    if (v.is_finite()) out.push_back(v);
  out.resize(static_cast<std::size_t>(k), ValExp::at_least_precision());
  return out;
}

Norm sigma_relative_position(const PadicConfig& cfg, const std::vector<Subspace>& spaces) {
  if (spaces.empty()) return make_norm(cfg, ValExp::finite(0));
  RMatrix all = spaces.front().basis();
  for (std::size_t i = 1; i < spaces.size(); ++i) all = hconcat(all, spaces[i].basis());
  if (all.cols() > all.rows()) throw DimensionMismatch("dimensions exceed the ambient space");
  return absolute_determinant(cfg, all);
}

}  // namespace padicgeom
