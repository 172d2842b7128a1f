#include "condmix/util.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "condmix/errors.hpp"

namespace condmix {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& run_range) {
  if (n == 0) return;
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2 * threads) {
    run_range(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&run_range, begin, end] { run_range(begin, end); });
  }
  for (auto& th : pool) th.join();
}

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) raise(Errc::InvalidArgument, "linspace needs at least 2 points");
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) raise(Errc::EmptyList, "mean of empty sample");
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value() / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) raise(Errc::TooFewPoints, "sample std needs at least 2 values");
  const double mean = sample_mean(values);
  KahanSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  return std::sqrt(sq.value() / static_cast<double>(values.size() - 1));
}

}  // namespace condmix
