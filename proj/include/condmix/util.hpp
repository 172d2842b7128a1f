#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace condmix {

// Compensated (Kahan) accumulator; keeps long sums accurate to ~1 ulp.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Hex digest used to stamp outputs with the run manifest.
std::string hex64(std::uint64_t value);

// Splits [0, n) into contiguous chunks and runs them on `threads` workers.
// Workers write disjoint output slots, so results are thread-count independent.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& run_range);

unsigned resolve_threads(unsigned requested) noexcept;  // 0 -> hardware concurrency

std::vector<double> linspace(double lo, double hi, std::size_t count);

double sample_mean(std::span<const double> values);
double sample_std(std::span<const double> values);  // (n-1) denominator

}  // namespace condmix
