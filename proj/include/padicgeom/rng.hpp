#pragma once

#include <array>
#include <cstdint>

namespace padicgeom {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Philox stream keyed by (seed, stream). Sample i of a Monte Carlo run owns
// stream i, so results do not depend on how samples are spread over threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace padicgeom
