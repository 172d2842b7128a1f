#include <doctest.h>

#include <cmath>

#include "condmix/errors.hpp"
#include "condmix/knn.hpp"
#include "condmix/rng.hpp"
#include "condmix/synthbench.hpp"

using namespace condmix;

namespace {

Dataset sim_1d(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  return Dataset({"x"}, std::move(x), n, 1, std::move(y), Origin::Simulated);
}

}  // namespace

TEST_CASE("fit_knn validates k and the response column") {
  const Dataset sim = sim_1d({0, 1, 2}, {10, 20, 30});
  const FittedMetric metric = fit_metric(sim, MetricKind::Euclidean);
  CHECK_NOTHROW(fit_knn(sim, metric, 3, 0.0));

  try {
    fit_knn(sim, metric, 4, 0.0);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KTooLarge);
  }

  const Dataset no_y({"x"}, {0, 1, 2}, 3, 1, std::nullopt, Origin::Simulated);
  try {
    fit_knn(no_y, metric, 2, 0.0);
    FAIL("expected MissingResponse");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingResponse);
  }
}

TEST_CASE("knn_conditional: point mass, even split, smoothed CDF") {
  const Dataset sim = sim_1d({0, 1, 2}, {10, 20, 30});
  const FittedMetric metric = fit_metric(sim, MetricKind::Euclidean);
  const std::vector<double> q = {0.1};

  const auto m1 = fit_knn(sim, metric, 1, 0.0);
  const auto d1 = knn_conditional(m1, q);
  CHECK(d1.size() == 1);
  CHECK(d1.means()[0] == 10.0);
  CHECK(d1.cdf(10.0) == 1.0);
  CHECK(d1.cdf(9.999) == 0.0);

  const auto m2 = fit_knn(sim, metric, 2, 0.0);
  const auto d2 = knn_conditional(m2, q);
  CHECK(d2.cdf(15.0) == 0.5);
  CHECK(d2.weights() == std::vector<double>{0.5, 0.5});

  const auto m2s = fit_knn(sim, metric, 2, 2.0);
  const auto d2s = knn_conditional(m2s, q);
  // 0.5 * (Phi(0) + Phi(-5)); Phi(-5) = 2.866515718791933e-07.
  CHECK(d2s.cdf(10.0) == doctest::Approx(0.2500001433257859).epsilon(1e-12));
}

TEST_CASE("weights are exactly 1/k and the mixture mean is the neighbor average") {
  CounterRng rng(5);
  const std::size_t m = 60;
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = rng.uniform01() * 4.0;
    y[i] = rng.normal() * 3.0;
  }
  const Dataset sim = sim_1d(x, y);
  const FittedMetric metric = fit_metric(sim, MetricKind::Euclidean);
  const auto model = fit_knn(sim, metric, 7, 0.0);

  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<double> q = {rng.uniform01() * 4.0};
    const auto hits = knn_neighbors(model, q);
    double sum = 0.0;
    for (const auto& h : hits) sum += model.responses[h.index];
    const auto dist = knn_conditional(model, q);
    CHECK(dist.moments().mean == doctest::Approx(sum / 7.0).epsilon(1e-12));
    CHECK(knn_conditional_mean(model, q) == doctest::Approx(sum / 7.0).epsilon(1e-15));
    double total = 0.0;
    for (double w : dist.weights()) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("sigma=0 CDF is a staircase with multiplicity/k jumps") {
  const Dataset sim = sim_1d({0, 0.1, 0.2, 5}, {7, 7, 3, 100});
  const FittedMetric metric = fit_metric(sim, MetricKind::Euclidean);
  const auto model = fit_knn(sim, metric, 3, 0.0);
  const std::vector<double> q = {0.0};
  const auto dist = knn_conditional(model, q);
  // Neighbors are the first three rows: responses {7, 7, 3}.
  CHECK(dist.cdf(2.999) == 0.0);
  CHECK(dist.cdf(3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(dist.cdf(7.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dist.size() == 2);  // duplicate response merged
}

TEST_CASE("consistency smoke test against the true conditional median") {
  SyntheticModel model;
  model.noise = NoiseFamily::Gaussian;
  model.seed = 17;
  const GeneratedData data = generate(model, 200, 4000);
  const FittedMetric metric = fit_metric(data.simulated, MetricKind::Mahalanobis);
  const auto knn_model = fit_knn(data.simulated, metric, 10, 0.0);

  double sum = 0.0;
  int banded = 0;
  const int queries = 200;
  for (int i = 0; i < queries; ++i) {
    const auto x = data.measured.row(static_cast<std::size_t>(i));
    const double median = model.cond_mean(x) + model.cond_scale(x) * model.noise_median();
    const double v = knn_conditional(knn_model, x).cdf(median);
    sum += v;
    banded += v >= 0.15 && v <= 0.85;
  }
  const double avg = sum / queries;
  CHECK(avg >= 0.35);
  CHECK(avg <= 0.65);
  CHECK(banded >= static_cast<int>(0.9 * queries));
}
