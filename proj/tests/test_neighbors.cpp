#include <doctest.h>

#include <cmath>

#include "condmix/errors.hpp"
#include "condmix/neighbors.hpp"
#include "condmix/rng.hpp"

using namespace condmix;

TEST_CASE("build_index handles singleton and rejects empty sets") {
  const auto idx = NeighborIndex::build({1.5}, 1, 1, IndexBackend::Accelerated);
  CHECK(idx.size() == 1);
  CHECK_THROWS_AS(NeighborIndex::build({}, 0, 1, IndexBackend::BruteForce), Error);
}

TEST_CASE("query_knn returns exact neighbors in (distance, index) order") {
  const auto idx = NeighborIndex::build({0.0, 1.0, 10.0}, 3, 1, IndexBackend::BruteForce);
  const std::vector<double> x = {0.4};
  const auto hits = idx.query_knn(x, 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].index == 0);
  CHECK(hits[0].distance == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(hits[1].index == 1);
  CHECK(hits[1].distance == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("k equal to point count returns everything sorted") {
  const auto idx = NeighborIndex::build({3.0, 1.0, 2.0}, 3, 1, IndexBackend::Accelerated);
  const std::vector<double> x = {0.0};
  const auto hits = idx.query_knn(x, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].index == 1);
  CHECK(hits[1].index == 2);
  CHECK(hits[2].index == 0);
}

TEST_CASE("duplicate points tie-break by original index") {
  const auto idx =
      NeighborIndex::build({5.0, 5.0, 5.0, 9.0}, 4, 1, IndexBackend::Accelerated);
  const std::vector<double> x = {5.0};
  const auto hits = idx.query_knn(x, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].index == 0);
  CHECK(hits[1].index == 1);
  CHECK(hits[2].index == 2);
  CHECK(hits[0].distance == 0.0);
}

TEST_CASE("avg_knn_distance matches hand averages") {
  const auto idx = NeighborIndex::build({0.0, 2.0}, 2, 1, IndexBackend::BruteForce);
  const std::vector<double> x = {1.0};
  CHECK(idx.avg_knn_distance(x, 2) == doctest::Approx(1.0).epsilon(1e-15));

  const auto idx2 = NeighborIndex::build({0.0, 1.0, 10.0}, 3, 1, IndexBackend::Accelerated);
  const std::vector<double> zero = {0.0};
  CHECK(idx2.avg_knn_distance(zero, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(idx2.avg_knn_distance(zero, 1) == 0.0);
}

TEST_CASE("k beyond point count truncates and counts a warning") {
  const auto idx = NeighborIndex::build({0.0, 1.0}, 2, 1, IndexBackend::Accelerated);
  const std::vector<double> x = {0.5};
  CHECK(idx.truncated_query_count() == 0);
  const auto hits = idx.query_knn(x, 5);
  CHECK(hits.size() == 2);
  CHECK(idx.truncated_query_count() == 1);
}

TEST_CASE("dimension mismatch is rejected") {
  const auto idx = NeighborIndex::build({0.0, 1.0, 2.0, 3.0}, 2, 2, IndexBackend::BruteForce);
  const std::vector<double> x = {0.0};
  CHECK_THROWS_AS(idx.query_knn(x, 1), Error);
}

TEST_CASE("accelerated backend equals brute force including tie order") {
  CounterRng rng(31);
  for (int config = 0; config < 50; ++config) {
    const std::size_t p = 1 + rng.uniform_below(500);
    const std::size_t d = 1 + rng.uniform_below(6);
    const std::size_t k = 1 + rng.uniform_below(20);
    std::vector<double> pts(p * d);
    for (auto& v : pts) v = rng.uniform01() * 4.0 - 2.0;
    if (config % 2 == 0 && p > 2) {
      for (std::size_t c = 0; c < p / 3; ++c) {
        const std::size_t src = rng.uniform_below(p), dst = rng.uniform_below(p);
        std::copy_n(pts.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                    pts.begin() + static_cast<std::ptrdiff_t>(dst * d));
      }
    }
    const auto brute = NeighborIndex::build(pts, p, d, IndexBackend::BruteForce);
    const auto fast = NeighborIndex::build(pts, p, d, IndexBackend::Accelerated);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> x(d);
      for (auto& v : x) v = rng.uniform01() * 5.0 - 2.5;
      CHECK(brute.query_knn(x, k) == fast.query_knn(x, k));
    }
  }
}

TEST_CASE("backends agree on a ten-thousand-point cloud") {
  CounterRng rng(33);
  const std::size_t p = 10000, d = 4;
  std::vector<double> pts(p * d);
  for (auto& v : pts) v = rng.normal();
  const auto brute = NeighborIndex::build(pts, p, d, IndexBackend::BruteForce);
  const auto fast = NeighborIndex::build(pts, p, d, IndexBackend::Accelerated);
  for (int q = 0; q < 10; ++q) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.normal();
    CHECK(brute.query_knn(x, 25) == fast.query_knn(x, 25));
  }
}

TEST_CASE("avg_knn_distance is nondecreasing in k") {
  CounterRng rng(32);
  const std::size_t p = 120, d = 3;
  std::vector<double> pts(p * d);
  for (auto& v : pts) v = rng.normal();
  const auto idx = NeighborIndex::build(pts, p, d, IndexBackend::Accelerated);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.normal();
    double prev = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
      const double avg = idx.avg_knn_distance(x, k);
      CHECK(avg >= prev - 1e-12);
      prev = avg;
    }
  }
}
