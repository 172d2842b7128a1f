#include "condmix/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "condmix/errors.hpp"

namespace condmix {

namespace {

constexpr std::size_t kLeafSize = 16;

// Candidate ordering: ascending (squared distance, original index).
struct Cand {
  double sq;
  std::size_t index;
  bool operator<(const Cand& o) const {
    return sq < o.sq || (sq == o.sq && index < o.index);
  }
};

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sq += diff * diff;
  }
  return sq;
}

// Bounded max-heap of the k smallest candidates under Cand ordering.
class KBest {
 public:
  explicit KBest(std::size_t k) : k_(k) { heap_.reserve(k); }

  bool full() const { return heap_.size() == k_; }
  const Cand& worst() const { return heap_.front(); }

  void offer(const Cand& c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  std::vector<Cand> sorted() && {
    std::sort(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Cand> heap_;
};

std::vector<NeighborIndex::Hit> to_hits(std::vector<Cand> cands) {
  std::vector<NeighborIndex::Hit> hits;
  hits.reserve(cands.size());
  for (const Cand& c : cands) hits.push_back({c.index, std::sqrt(c.sq)});
  return hits;
}

}  // namespace

NeighborIndex NeighborIndex::build(std::vector<double> points_row_major, std::size_t count,
                                   std::size_t dim, IndexBackend backend) {
  if (count == 0) raise(Errc::EmptyPointSet, "cannot index zero points");
  if (dim == 0 || points_row_major.size() != count * dim)
    raise(Errc::DimensionMismatch, "point matrix shape mismatch");

  NeighborIndex idx;
  idx.points_ = std::move(points_row_major);
  idx.count_ = count;
  idx.dim_ = dim;
  idx.backend_ = backend;
  idx.truncated_queries_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  if (backend == IndexBackend::Accelerated) idx.build_tree();
  return idx;
}

void NeighborIndex::build_tree() {
  order_.resize(count_);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * count_ / kLeafSize + 2);
  root_ = build_node(0, count_);
}

std::int32_t NeighborIndex::build_node(std::size_t begin, std::size_t end) {
  KdNode node;
  node.box_lo.assign(dim_, std::numeric_limits<double>::infinity());
  node.box_hi.assign(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    const auto p = point(order_[i]);
    for (std::size_t j = 0; j < dim_; ++j) {
      node.box_lo[j] = std::min(node.box_lo[j], p[j]);
      node.box_hi[j] = std::max(node.box_hi[j], p[j]);
    }
  }

  // Widest axis, lowest index on ties; a zero-spread box becomes a leaf.
  std::size_t axis = 0;
  double spread = -1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double s = node.box_hi[j] - node.box_lo[j];
    if (s > spread) {
      spread = s;
      axis = j;
    }
  }

  if (end - begin <= kLeafSize || spread <= 0.0) {
    node.begin = static_cast<std::uint32_t>(begin);
    node.end = static_cast<std::uint32_t>(end);
    nodes_.push_back(std::move(node));
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_[a * dim_ + axis];
                     const double vb = points_[b * dim_ + axis];
                     return va < vb || (va == vb && a < b);
                   });

  const std::int32_t left = build_node(begin, mid);
  const std::int32_t right = build_node(mid, end);
  node.left = left;
  node.right = right;
  nodes_.push_back(std::move(node));
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

namespace {

// Squared distance from x to a node's bounding box. Never exceeds the squared
// distance to any point inside the box, even under floating-point rounding,
// so pruning on a strict comparison cannot drop a true neighbor or a tie.
double box_sq_distance(std::span<const double> x, const std::vector<double>& lo,
                       const std::vector<double>& hi) {
  double sq = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double off = 0.0;
    if (x[j] < lo[j])
      off = lo[j] - x[j];
    else if (x[j] > hi[j])
      off = x[j] - hi[j];
    sq += off * off;
  }
  return sq;
}

}  // namespace

std::vector<NeighborIndex::Hit> NeighborIndex::query_knn(std::span<const double> x,
                                                         std::size_t k) const {
  if (x.size() != dim_) raise(Errc::DimensionMismatch, "query dimension mismatch");
  if (k == 0) raise(Errc::InvalidArgument, "k must be >= 1");
  if (k > count_) {
    truncated_queries_->fetch_add(1, std::memory_order_relaxed);
    k = count_;
  }

  KBest best(k);
  if (backend_ == IndexBackend::BruteForce) {
    for (std::size_t i = 0; i < count_; ++i) best.offer({squared_distance(x, point(i)), i});
    return to_hits(std::move(best).sorted());
  }

  // Iterative depth-first descent, near child first. Prune only when the box
  // bound strictly exceeds the current worst: equal-distance points with a
  // smaller index may still displace it.
  std::vector<std::int32_t> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const std::int32_t ni = stack.back();
    stack.pop_back();
    const KdNode& node = nodes_[static_cast<std::size_t>(ni)];
    if (best.full() && box_sq_distance(x, node.box_lo, node.box_hi) > best.worst().sq)
      continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t pi = order_[i];
        best.offer({squared_distance(x, point(pi)), pi});
      }
      continue;
    }
    const KdNode& l = nodes_[static_cast<std::size_t>(node.left)];
    const KdNode& r = nodes_[static_cast<std::size_t>(node.right)];
    const double dl = box_sq_distance(x, l.box_lo, l.box_hi);
    const double dr = box_sq_distance(x, r.box_lo, r.box_hi);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return to_hits(std::move(best).sorted());
}

double NeighborIndex::avg_knn_distance(std::span<const double> x, std::size_t k) const {
  const auto hits = query_knn(x, k);
  double sum = 0.0;
  for (const Hit& h : hits) sum += h.distance;
  return sum / static_cast<double>(hits.size());
}

}  // namespace condmix
