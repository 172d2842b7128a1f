#include "condmix/rng.hpp"

#include <cmath>

#include "condmix/gauss.hpp"

namespace condmix {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : state_(mix(seed + kGolden) ^ mix(stream * kGolden + 0x6A09E667F3BCC909ULL)) {}

std::uint64_t CounterRng::next_u64() noexcept {
  state_ += kGolden;
  return mix(state_);
}

double CounterRng::uniform01() noexcept {
  // 53-bit mantissa centered in its bin, so 0 and 1 are unreachable.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterRng::uniform_below(std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double CounterRng::normal() { return normal_quantile(uniform01()); }

double CounterRng::gumbel_centered() noexcept {
  return -std::log(-std::log(uniform01())) - kEulerGamma;
}

}  // namespace condmix
