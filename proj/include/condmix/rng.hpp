#pragma once

#include <cstdint>

namespace condmix {

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

// SplitMix64 stream keyed by (seed, stream). Fully pinned: no standard-library
// engines or distributions anywhere, so draws are identical across platforms
// and across thread counts as long as each logical stream stays sequential.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform01() noexcept;                       // strictly inside (0,1)
  std::uint64_t uniform_below(std::uint64_t n) noexcept;  // in [0, n), n >= 1
  double normal();                                   // standard normal
  double gumbel_centered() noexcept;                 // standard Gumbel minus its mean

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace condmix
