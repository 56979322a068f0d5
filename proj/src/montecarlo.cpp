#include "padicgeom/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "padicgeom/errors.hpp"

namespace padicgeom {

std::uint64_t Tally::used() const {
  std::uint64_t total = 0;
  for (const auto& [label, count] : counts) total += count;
  return total;
}

void Tally::merge(const Tally& other) {
  for (const auto& [label, count] : other.counts) counts[label] += count;
  discarded += other.discarded;
}

namespace {

Estimate summarize(const Tally& tally, const std::function<Rational(long)>& value) {
  Estimate e;
  e.samples_used = tally.used();
  e.discarded = tally.discarded;
  if (e.samples_used == 0) return e;
  Rational sum = 0, sum_sq = 0;
  for (const auto& [label, count] : tally.counts) {
    const Rational v = value(label);
    const Rational c(mpz_class(static_cast<unsigned long>(count)));
    sum += v * c;
    sum_sq += v * v * c;
  }
  const Rational n(mpz_class(static_cast<unsigned long>(e.samples_used)));
  e.mean = sum / n;
  e.second_moment = sum_sq / n;
  if (e.samples_used > 1) {
    const double var = to_double(e.second_moment - e.mean * e.mean) * to_double(n) / (to_double(n) - 1);
    e.std_error = std::sqrt(std::max(var, 0.0) / to_double(n));
  }
  return e;
}

}  // namespace

Estimate estimate_from_powers(const Tally& tally, const Rational& q) {
  return summarize(tally, [&](long label) { return label == Tally::kZeroLabel ? Rational(0) : epsilon_pow(q, label); });
}

Estimate estimate_from_counts(const Tally& tally) {
  return summarize(tally, [](long label) { return Rational(label); });
}

Estimate scale(const Estimate& e, const Rational& factor) {
  Estimate r = e;
  r.mean *= factor;
  r.second_moment *= factor * factor;
  r.std_error *= std::abs(to_double(factor));
  return r;
}

Rational McConfig::discard_limit() const {
  if (max_discard_rate) return *max_discard_rate;
  return 10 * epsilon_pow(Rational(static_cast<unsigned long>(padic.p())), padic.precision() - 3);
}

Tally run_samples(const McConfig& mc, const SampleFn& sample) {
  if (mc.samples == 0) throw InvalidConfig("samples must be positive");
  const unsigned threads = std::max(1u, std::min<unsigned>(mc.threads, static_cast<unsigned>(mc.samples)));
  std::vector<Tally> partial(threads);
  auto work = [&](unsigned t) {
    const std::uint64_t begin = mc.samples * t / threads;
    const std::uint64_t end = mc.samples * (t + 1) / threads;
    Tally& tally = partial[t];
    for (std::uint64_t i = begin; i < end; ++i) {
      CounterRng rng(mc.seed, i);
      if (std::optional<long> label = sample(rng))
        ++tally.counts[*label];
      else
        ++tally.discarded;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  Tally total;
  for (const Tally& t : partial) total.merge(t);
  return total;
}

void check_discard_rate(const McConfig& mc, const Tally& tally) {
  const Rational rate = Rational(mpz_class(static_cast<unsigned long>(tally.discarded))) /
                        Rational(mpz_class(static_cast<unsigned long>(mc.samples)));
  if (rate > mc.discard_limit())
    throw DiscardRateExceeded("discarded " + std::to_string(tally.discarded) + " of " + std::to_string(mc.samples) +
                              " samples, above the limit " + to_string(mc.discard_limit()));
}

}  // namespace padicgeom
