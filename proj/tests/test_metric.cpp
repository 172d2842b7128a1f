#include <doctest.h>

#include <cmath>

#include "condmix/dataset.hpp"
#include "condmix/errors.hpp"
#include "condmix/metric.hpp"
#include "condmix/rng.hpp"

using namespace condmix;

namespace {

Dataset make(std::vector<double> x, std::size_t n, std::size_t d,
             Origin origin = Origin::Simulated) {
  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = "c" + std::to_string(j);
  return Dataset(names, std::move(x), n, d, std::nullopt, origin);
}

}  // namespace

TEST_CASE("fit_standardizer computes sample mean and std") {
  const Dataset sim = make({1, 2, 3}, 3, 1);
  const Standardizer s = fit_standardizer(sim);
  CHECK(s.means[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.stds[0] == doctest::Approx(1.0).epsilon(1e-15));

  const Dataset sim2 = make({0, 0, 3, 3}, 4, 1);
  const Standardizer s2 = fit_standardizer(sim2);
  CHECK(s2.means[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(s2.stds[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("fit_standardizer rejects constant columns") {
  const Dataset sim = make({5, 5, 5}, 3, 1);
  CHECK_THROWS_AS(fit_standardizer(sim), Error);
  try {
    fit_standardizer(sim);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateColumn);
  }
}

TEST_CASE("apply_standardizer centers and scales") {
  Standardizer s{{2.0}, {1.0}};
  const Dataset a = apply_standardizer(s, make({2.0}, 1, 1, Origin::Measured));
  CHECK(a.x(0, 0) == 0.0);

  Standardizer s2{{0.0}, {2.0}};
  const Dataset b = apply_standardizer(s2, make({4.0}, 1, 1, Origin::Measured));
  CHECK(b.x(0, 0) == 2.0);

  // Simulation-fitted constants applied to measured data unchanged.
  const Dataset sim = make({1, 2, 3}, 3, 1);
  const Standardizer fitted = fit_standardizer(sim);
  const Dataset c = apply_standardizer(fitted, make({2.0}, 1, 1, Origin::Measured));
  CHECK(c.x(0, 0) == 0.0);

  Standardizer wrong{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(apply_standardizer(wrong, make({1.0}, 1, 1)), Error);
}

TEST_CASE("fit_whitener: Euclidean keeps the identity factor") {
  const Dataset data = make({1, 2, 3, 4}, 2, 2);
  const Whitener w = fit_whitener(data, MetricKind::Euclidean, 0.0);
  CHECK(w.chol == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("fit_whitener: diagonal covariance gives diagonal Cholesky factor") {
  const double r3 = 1.0 / std::sqrt(3.0);
  // Sample covariance (m-1 denominator) is exactly diag(4, 1).
  const Dataset data = make({-2, r3, 0, -2 * r3, 2, r3}, 3, 2);
  const Whitener w = fit_whitener(data, MetricKind::Mahalanobis, 0.0);
  CHECK(w.chol[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w.chol[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.chol[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_whitener flags collinear covariates without ridge") {
  const Dataset data = make({1, 1, 2, 2, 3, 3, 4, 4}, 4, 2);
  try {
    fit_whitener(data, MetricKind::Mahalanobis, 0.0);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotPositiveDefinite);
  }
}

TEST_CASE("distance: Euclidean and Mahalanobis closed forms") {
  const Dataset data = make({1, 2, 3, 4, 5, 6}, 3, 2);
  const Whitener euclid = fit_whitener(data, MetricKind::Euclidean, 0.0);
  const std::vector<double> a = {0, 0}, b = {3, 4};
  CHECK(euclid.distance(a, b) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(euclid.distance(a, a) == 0.0);

  const double r3 = 1.0 / std::sqrt(3.0);
  const Dataset diag = make({-2, r3, 0, -2 * r3, 2, r3}, 3, 2);
  const Whitener mahal = fit_whitener(diag, MetricKind::Mahalanobis, 0.0);
  const std::vector<double> x = {0, 0}, y = {2, 0};
  CHECK(mahal.distance(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mahal.distance(y, y) == 0.0);

  const std::vector<double> short_vec = {1.0};
  CHECK_THROWS_AS(mahal.distance(short_vec, short_vec), Error);
}

TEST_CASE("metric axioms and whitened-space equivalence on random SPD data") {
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.uniform_below(4);
    const std::size_t m = 40 + rng.uniform_below(100);
    std::vector<double> x(m * d);
    for (auto& v : x) v = rng.normal();
    // Mild coordinate coupling for a non-diagonal covariance.
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 1; j < d; ++j) x[i * d + j] += 0.5 * x[i * d + j - 1];
    const Dataset data = make(std::move(x), m, d);
    const Whitener w = fit_whitener(data, MetricKind::Mahalanobis, 0.0);

    std::vector<double> p(d), q(d), r(d);
    for (int rep = 0; rep < 10; ++rep) {
      for (std::size_t j = 0; j < d; ++j) {
        p[j] = rng.normal();
        q[j] = rng.normal();
        r[j] = rng.normal();
      }
      const double pq = w.distance(p, q);
      CHECK(pq == w.distance(q, p));  // symmetry is exact
      CHECK(w.distance(p, r) <= pq + w.distance(q, r) + 1e-9 * (1.0 + pq));

      // Whitened-space equivalence: metric equals plain Euclidean distance
      // between whitened points.
      std::vector<double> wp(d), wq(d);
      w.whiten(p, wp);
      w.whiten(q, wq);
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) sq += (wp[j] - wq[j]) * (wp[j] - wq[j]);
      CHECK(pq == doctest::Approx(std::sqrt(sq)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Mahalanobis pipeline distances are invariant under linear re-coding") {
  CounterRng rng(11);
  const std::size_t d = 3, m = 400;
  std::vector<double> x(m * d);
  for (auto& v : x) v = rng.normal() + 1.5;

  // Well-conditioned invertible re-coding A = I + 0.3 * N.
  std::vector<double> a(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) a[i * d + i] = 1.0;
  for (auto& v : a) v += 0.3 * rng.normal();

  std::vector<double> xr(m * d, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) xr[i * d + j] += a[j * d + k] * x[i * d + k];

  const Dataset orig = make(std::vector<double>(x), m, d);
  const Dataset recoded = make(std::move(xr), m, d);
  const FittedMetric fm1 = fit_metric(orig, MetricKind::Mahalanobis, 0.0);
  const FittedMetric fm2 = fit_metric(recoded, MetricKind::Mahalanobis, 0.0);

  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t i = rng.uniform_below(m);
    const std::size_t j = rng.uniform_below(m);
    const auto wi1 = fm1.whiten_row(orig.row(i));
    const auto wj1 = fm1.whiten_row(orig.row(j));
    const auto wi2 = fm2.whiten_row(recoded.row(i));
    const auto wj2 = fm2.whiten_row(recoded.row(j));
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      d1 += (wi1[c] - wj1[c]) * (wi1[c] - wj1[c]);
      d2 += (wi2[c] - wj2[c]) * (wi2[c] - wj2[c]);
    }
    CHECK(std::sqrt(d1) == doctest::Approx(std::sqrt(d2)).epsilon(1e-8));
  }
}

TEST_CASE("Mahalanobis whitener needs at least d+1 rows") {
  const Dataset tiny = make({1, 2, 3, 4}, 2, 2);
  CHECK_THROWS_AS(fit_whitener(tiny, MetricKind::Mahalanobis, 0.0), Error);
}
