#pragma once

#include <map>
#include <vector>

#include "padicgeom/montecarlo.hpp"

namespace padicgeom {

using Exponent = std::vector<int>;

// Finite set of distinct exponent vectors with full-dimensional affine span.
class Support {
 public:
  Support(int n, std::vector<Exponent> points);
  static Support univariate(std::vector<int> exponents);

  int n() const { return n_; }
  const std::vector<Exponent>& points() const { return points_; }

 private:
  int n_;
  std::vector<Exponent> points_;
};

struct PolytopeInfo {
  bool is_rectangular = false;
  Exponent lower, upper;  // bounding box
  std::vector<Exponent> vertices;
  std::map<Exponent, bool> gap_free_at;
  Exponent minimal_vertex;
  // Support spans {a >= 0, sum a <= d} and contains its vertices.
  bool simplex_type = false;
  bool simplex_gap_free = false;
};

PolytopeInfo analyze_support(const Support& a);

enum class Region { Unit, MaxIdealNonzero, RNonzero, KminusR, KTimes };
using RegionSpec = std::vector<Region>;

std::string to_string(Region r);
Region parse_region(const std::string& name);

// J(psi_A) at a point of (R \ 0)^n with coordinate valuations v.
Rational jacobian_psi_A(const Support& a, const std::vector<int>& v, unsigned p, const Rational& q);

struct SeriesValue {
  Rational value;
  Rational tail_bound;
};

// Exact sum over valuation vectors with entries <= truncation; rectangular supports only.
SeriesValue expected_zeros_series(const Support& a, const RegionSpec& region, unsigned p, const Rational& q,
                                  int truncation);

struct ClosedForm {
  Rational value;
  bool exact = false;  // otherwise an upper bound
};

ClosedForm closed_form_expected_zeros(const Support& a, const RegionSpec& region, unsigned p, const Rational& q);

struct QuadraticExpectations {
  Rational units;
  Rational max_ideal;
  // eps^2 / (1 + eps^2), the value displayed alongside the quadratic computation.
  Rational max_ideal_displayed;
};

QuadraticExpectations quadratic_expected_zeros(unsigned p, const Rational& q);

struct Term {
  Exponent exps;
  Residue coef;
};

using Polynomial = std::vector<Term>;

struct RootWitness {
  std::vector<Residue> x;        // root in the region's working coordinates
  std::vector<int> vanishing;    // per equation: f_j(x) = 0 mod p^vanishing[j]
};

struct RootCount {
  int count = 0;
  bool indeterminate = false;
};

// Nondegenerate roots in the region, by residue splitting and Hensel's lemma.
// depth_budget <= 0 means N - 2.
RootCount count_roots(const ResidueRing& ring, const std::vector<Polynomial>& system, const RegionSpec& region,
                      int depth_budget = 0, std::vector<RootWitness>* witnesses = nullptr);

std::vector<Polynomial> random_system(const ResidueRing& ring, const Support& a, CounterRng& rng);
Estimate estimate_expected_zeros_mc(const Support& a, const RegionSpec& region, const McConfig& mc);

}  // namespace padicgeom
