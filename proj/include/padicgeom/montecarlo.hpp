#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>

#include "padicgeom/padic.hpp"

namespace padicgeom {

// Per-label sample counts. A label is either an exponent k (value eps^k, with
// kZeroLabel meaning the value 0) or a nonnegative count, depending on the estimator.
struct Tally {
  static constexpr long kZeroLabel = -1;

  std::map<long, std::uint64_t> counts;
  std::uint64_t discarded = 0;

  std::uint64_t used() const;
  void merge(const Tally& other);
};

struct Estimate {
  Rational mean;
  Rational second_moment;
  double std_error = 0;
  std::uint64_t samples_used = 0;
  std::uint64_t discarded = 0;
};

// Values eps^label with eps = 1/q.
Estimate estimate_from_powers(const Tally& tally, const Rational& q);
// Values equal to the labels.
Estimate estimate_from_counts(const Tally& tally);
Estimate scale(const Estimate& e, const Rational& factor);

struct McConfig {
  PadicConfig padic;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  std::optional<Rational> max_discard_rate;
  unsigned threads = 1;

  explicit McConfig(PadicConfig cfg) : padic(std::move(cfg)) {}
  Rational discard_limit() const;
};

// One sample; returns the label, or nothing when the sample is indeterminate at precision.
using SampleFn = std::function<std::optional<long>(CounterRng&)>;

// Sample i draws from stream (seed, i), so the tally is independent of the thread count.
Tally run_samples(const McConfig& mc, const SampleFn& sample);
void check_discard_rate(const McConfig& mc, const Tally& tally);

}  // namespace padicgeom
