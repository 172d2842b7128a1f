#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace condmix {

enum class IndexBackend { BruteForce, Accelerated };

// Immutable exact k-nearest-neighbor index over whitened coordinates.
// Results are ordered by ascending (distance, original index); both backends
// return identical output, tie order included. Queries are thread-safe.
class NeighborIndex {
 public:
  struct Hit {
    std::size_t index;
    double distance;
    bool operator==(const Hit&) const = default;
  };

  static NeighborIndex build(std::vector<double> points_row_major, std::size_t count,
                             std::size_t dim, IndexBackend backend);

  // Exact k nearest; k > size() truncates to size() and bumps the warning counter.
  std::vector<Hit> query_knn(std::span<const double> x, std::size_t k) const;
  double avg_knn_distance(std::span<const double> x, std::size_t k) const;

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  IndexBackend backend() const noexcept { return backend_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {points_.data() + i * dim_, dim_};
  }
  std::uint64_t truncated_query_count() const noexcept {
    return truncated_queries_->load(std::memory_order_relaxed);
  }

 private:
  struct KdNode {
    // Internal: children + split plane. Leaf: point range [begin, end).
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
  };

  NeighborIndex() = default;

  void build_tree();
  std::int32_t build_node(std::size_t begin, std::size_t end);

  std::vector<double> points_;
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  IndexBackend backend_ = IndexBackend::BruteForce;
  std::vector<std::uint32_t> order_;  // kd leaf ranges index into this permutation
  std::vector<KdNode> nodes_;
  std::int32_t root_ = -1;
  std::shared_ptr<std::atomic<std::uint64_t>> truncated_queries_;
};

}  // namespace condmix
