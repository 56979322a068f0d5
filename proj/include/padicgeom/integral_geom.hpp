#pragma once

#include <map>
#include <vector>

#include "padicgeom/montecarlo.hpp"
#include "padicgeom/subspace.hpp"
#include "padicgeom/volumes.hpp"

namespace padicgeom {

Estimate estimate_alpha(int k, int m, const McConfig& mc);
Estimate estimate_expected_abs_det(int n, const McConfig& mc);
// E||x|| for x uniform in R^n.
Estimate estimate_expected_norm(int n, const McConfig& mc);

struct PositionHistogram {
  std::map<PositionKey, std::uint64_t> counts;
  std::uint64_t samples = 0;
};

// E uniform in G(k,n), F = span(e_1..e_l).
PositionHistogram empirical_position_histogram(int k, int l, int n, const McConfig& mc);
// Total variation distance between the histogram and rho, with the model tail
// beyond max_entry counted in full.
double total_variation(const PositionHistogram& h, int k, int l, int n, const Rational& q, int max_entry);

struct FourLinesOutcome {
  enum class Kind { Count, Degenerate } kind = Kind::Degenerate;
  int count = 0;
  std::vector<Subspace> solutions;

  bool degenerate() const { return kind == Kind::Degenerate; }
};

// Lines in P^3 (2-planes in K^4) meeting four given lines.
FourLinesOutcome solve_four_lines(const std::vector<Subspace>& lines);
Estimate estimate_eta_2_4(const McConfig& mc);

}  // namespace padicgeom
