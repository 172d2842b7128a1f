#include "condmix/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "condmix/errors.hpp"
#include "condmix/forest.hpp"
#include "condmix/knn.hpp"
#include "condmix/metric.hpp"
#include "condmix/rng.hpp"
#include "condmix/screening.hpp"
#include "condmix/surrogate.hpp"
#include "condmix/synthbench.hpp"
#include "condmix/util.hpp"

namespace condmix {

namespace {

constexpr std::uint64_t kOracleSeedOffset = 1000003;

std::function<double(double)> empirical_cdf_fn(const std::vector<double>& sorted) {
  return [&sorted](double t) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
  };
}

double sorted_quantile(const std::vector<double>& sorted, double level) {
  // Left-continuous generalized inverse of the 1/n empirical CDF.
  const auto rank = static_cast<std::size_t>(
      std::max(0.0, std::ceil(level * static_cast<double>(sorted.size())) - 1.0));
  return sorted[std::min(rank, sorted.size() - 1)];
}

double variance_of(std::span<const double> values) {
  const double s = sample_std(values);
  return s * s;
}

}  // namespace

RecoveryResult bench_surrogate_recovery(const RecoveryConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();

  SyntheticModel model;
  model.seed = cfg.seed;
  const GeneratedData data = generate(model, cfg.n_measured, cfg.m_simulated);

  std::vector<double> oracle =
      sample_response_marginal(model, cfg.n_mc, cfg.seed + kOracleSeedOffset);
  std::sort(oracle.begin(), oracle.end());
  const auto oracle_cdf = empirical_cdf_fn(oracle);

  const FittedMetric metric = fit_metric(data.simulated, MetricKind::Mahalanobis);
  const KnnConditionalModel knn_model =
      fit_knn(data.simulated, metric, cfg.k_neighbors, 0.0);
  const KnnSurrogateResult knn =
      knn_surrogate(knn_model, data.measured, SigmaPolicy::fixed(0.0), cfg.threads);

  const ThresholdGrid grid = make_quantile_grid(data.simulated.y(), cfg.k_grid);
  const auto classes = discretize_targets(data.simulated.y(), grid);
  ForestHyper hyper;
  hyper.n_trees = cfg.n_trees;
  const Forest forest =
      fit_forest(data.simulated.x_data(), data.simulated.rows(), data.simulated.cols(),
                 classes, static_cast<int>(grid.size()) + 1, hyper, cfg.seed, cfg.threads);
  const SurrogateDistribution forest_dist =
      forest_surrogate(forest, grid, data.measured, 0.0, cfg.threads);

  const double lo = std::min(oracle.front(), knn.dist.mixture.min_mean());
  const double hi = std::max(oracle.back(), knn.dist.mixture.max_mean());
  const auto grid_pts = linspace(lo, hi, 512);

  RecoveryResult result;
  result.knn_ks = ks_distance([&](double t) { return knn.dist.cdf(t); }, oracle_cdf, grid_pts);

  result.forest_alpha_max = grid.alphas.back();
  result.forest_deficit = forest_dist.deficit();
  std::vector<double> sub_deficit_grid;
  for (double t : grid_pts)
    if (t <= result.forest_alpha_max) sub_deficit_grid.push_back(t);
  result.forest_ks = ks_distance([&](double t) { return forest_dist.cdf(t); }, oracle_cdf,
                                 sub_deficit_grid);

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

TailQuantileResult bench_tail_quantiles(const TailQuantileConfig& cfg) {
  TailQuantileResult result;

  std::vector<double> oracle =
      sample_response_marginal(SyntheticModel{.seed = cfg.base_seed},
                               cfg.n_mc, cfg.base_seed + kOracleSeedOffset);
  std::sort(oracle.begin(), oracle.end());
  result.sigma_y = sample_std(oracle);
  for (double level : cfg.levels)
    result.oracle_quantiles.push_back(sorted_quantile(oracle, level));

  result.passes_per_level.assign(cfg.levels.size(), 0);
  for (int s = 0; s < cfg.n_seeds; ++s) {
    SyntheticModel model;
    model.seed = cfg.base_seed + static_cast<std::uint64_t>(s);
    const GeneratedData data = generate(model, cfg.n_measured, cfg.m_simulated);
    const FittedMetric metric = fit_metric(data.simulated, MetricKind::Mahalanobis);
    const KnnConditionalModel knn_model =
        fit_knn(data.simulated, metric, cfg.k_neighbors, 0.0);
    const KnnSurrogateResult surr =
        knn_surrogate(knn_model, data.measured, SigmaPolicy::fixed(0.0), cfg.threads);

    std::vector<double> errs;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
      const double q = surr.dist.quantile(cfg.levels[li]);
      const double err = std::abs(q - result.oracle_quantiles[li]) / result.sigma_y;
      errs.push_back(err);
      if (err <= cfg.tolerance) ++result.passes_per_level[li];
    }
    result.std_errors.push_back(std::move(errs));
  }
  return result;
}

VarianceResult bench_variance_deficit(const VarianceConfig& cfg) {
  SyntheticModel model;
  model.seed = cfg.seed;
  model.scale_base = cfg.scale_base;

  VarianceResult result;
  {
    const auto y = sample_response_marginal(model, cfg.n_mc, cfg.seed + kOracleSeedOffset);
    result.oracle_variance = variance_of(y);
  }
  {
    const auto g = sample_cond_mean_marginal(model, cfg.n_mc, cfg.seed + kOracleSeedOffset);
    result.var_cond_mean = variance_of(g);
  }
  {
    const auto v = sample_cond_var_marginal(model, cfg.n_mc, cfg.seed + kOracleSeedOffset);
    result.mean_cond_variance = sample_mean(v);
  }
  result.cond_var_share = result.mean_cond_variance / result.oracle_variance;

  const GeneratedData data = generate(model, cfg.n_measured, cfg.m_simulated);
  const FittedMetric metric = fit_metric(data.simulated, MetricKind::Mahalanobis);
  const KnnConditionalModel knn_model =
      fit_knn(data.simulated, metric, cfg.k_neighbors, 0.0);

  result.baseline_variance =
      regression_imputation_baseline(data.measured, knn_model, cfg.threads)
          .moments().variance;
  result.surrogate_variance =
      knn_surrogate(knn_model, data.measured, SigmaPolicy::fixed(0.0), cfg.threads)
          .dist.moments().variance;
  return result;
}

double trapezoid_l1_oracle(const std::vector<double>& sorted_distances, std::size_t tau) {
  const std::size_t n = sorted_distances.size();
  const double first = sorted_distances.front();
  const double knee = sorted_distances[tau - 1];
  const double last = sorted_distances.back();
  const double slope_left = (knee - first) / (static_cast<double>(tau) - 1.0);
  const double slope_right = (last - knee) / (static_cast<double>(n - tau));

  const auto f = [&](double x) {
    const auto i = std::min(static_cast<std::size_t>(x - 1.0), n - 2);
    return sorted_distances[i] +
           (sorted_distances[i + 1] - sorted_distances[i]) * (x - static_cast<double>(i + 1));
  };
  const auto chord = [&](double x) {
    return x <= static_cast<double>(tau)
               ? first + slope_left * (x - 1.0)
               : knee + slope_right * (x - static_cast<double>(tau));
  };
  const auto gap = [&](double x) { return f(x) - chord(x); };

  constexpr int kSteps = 1000;  // per unit interval, nodes land on the knots
  KahanSum total;
  for (std::size_t seg = 1; seg < n; ++seg) {
    double x_prev = static_cast<double>(seg);
    double g_prev = gap(x_prev);
    for (int s = 1; s <= kSteps; ++s) {
      const double x = static_cast<double>(seg) + static_cast<double>(s) / kSteps;
      const double g = gap(x);
      if ((g_prev < 0.0 && g > 0.0) || (g_prev > 0.0 && g < 0.0)) {
        // Linear sign change inside the step: split at the root so the
        // trapezoid rule is exact for |g|.
        const double root = x_prev + (x - x_prev) * (g_prev / (g_prev - g));
        total.add(0.5 * std::abs(g_prev) * (root - x_prev));
        total.add(0.5 * std::abs(g) * (x - root));
      } else {
        total.add(0.5 * (std::abs(g_prev) + std::abs(g)) * (x - x_prev));
      }
      x_prev = x;
      g_prev = g;
    }
  }
  return total.value();
}

SelectorResult bench_threshold_selector(int n_trials, std::uint64_t seed) {
  SelectorResult result;
  CounterRng rng(seed, 301);

  // Exact kink recovery on two-segment curves with distinct slopes.
  for (int trial = 0; trial < n_trials; ++trial) {
    const std::size_t n = 10 + rng.uniform_below(191);
    const std::size_t j = 3 + rng.uniform_below(n - 4);  // kink in [3, n-2]
    const double s1 = 0.1 + 1.9 * rng.uniform01();
    const double s2 = s1 + 0.5 + 5.0 * rng.uniform01();
    const double base = rng.uniform01();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i + 1);
      d[i] = x <= static_cast<double>(j)
                 ? base + s1 * (x - 1.0)
                 : base + s1 * (static_cast<double>(j) - 1.0) +
                       s2 * (x - static_cast<double>(j));
    }
    ++result.kink_trials;
    if (l1_threshold(d).tau == j) ++result.kink_hits;
  }

  // Closed-form integral against the trapezoid oracle on random monotone curves.
  for (int trial = 0; trial < n_trials; ++trial) {
    const std::size_t n = 10 + rng.uniform_below(141);
    std::vector<double> d(n);
    double acc = rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) {
      acc += rng.uniform01();
      d[i] = acc;
    }
    for (int q = 0; q < 5; ++q) {
      const std::size_t tau = 2 + rng.uniform_below(n - 2);
      const double exact = l1_error_for_tau(d, tau);
      const double numeric = trapezoid_l1_oracle(d, tau);
      const double rel = std::abs(exact - numeric) / std::max(numeric, 1e-12);
      result.max_rel_err = std::max(result.max_rel_err, rel);
      ++result.integral_trials;
    }
  }
  return result;
}

NeighborOracleResult bench_neighbor_oracle(int configs, std::uint64_t seed) {
  NeighborOracleResult result;
  CounterRng rng(seed, 401);
  for (int c = 0; c < configs; ++c) {
    const std::size_t p = 1 + rng.uniform_below(2000);
    const std::size_t d = 1 + rng.uniform_below(8);
    const std::size_t k = 1 + rng.uniform_below(25);

    std::vector<double> pts(p * d);
    for (auto& v : pts) v = rng.uniform01() * 10.0 - 5.0;
    // A third of the configs duplicate rows to force distance ties.
    if (c % 3 == 0 && p > 1) {
      const std::size_t copies = 1 + rng.uniform_below(p / 2 + 1);
      for (std::size_t i = 0; i < copies; ++i) {
        const std::size_t src = rng.uniform_below(p);
        const std::size_t dst = rng.uniform_below(p);
        std::copy_n(pts.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                    pts.begin() + static_cast<std::ptrdiff_t>(dst * d));
      }
    }

    const auto brute = NeighborIndex::build(pts, p, d, IndexBackend::BruteForce);
    const auto fast = NeighborIndex::build(pts, p, d, IndexBackend::Accelerated);

    ++result.configs;
    for (int q = 0; q < 20; ++q) {
      std::vector<double> x(d);
      if (q % 4 == 0) {
        const auto src = brute.point(rng.uniform_below(p));
        std::copy(src.begin(), src.end(), x.begin());  // query exactly on a point
      } else {
        for (auto& v : x) v = rng.uniform01() * 12.0 - 6.0;
      }
      if (brute.query_knn(x, k) != fast.query_knn(x, k)) {
        ++result.mismatches;
        break;
      }
    }
  }
  return result;
}

ForestCheckResult bench_forest_checks(int monotone_trials, std::uint64_t seed) {
  ForestCheckResult result;
  CounterRng rng(seed, 501);

  {  // Depth-0 single tree without bootstrap reproduces training priors exactly.
    const std::size_t n = 40;
    std::vector<double> x(n * 2);
    std::vector<int> classes(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[2 * i] = rng.uniform01();
      x[2 * i + 1] = rng.uniform01();
      classes[i] = static_cast<int>(rng.uniform_below(5));
    }
    std::vector<std::int64_t> counts(5, 0);
    for (int c : classes) ++counts[static_cast<std::size_t>(c)];
    ForestHyper hyper;
    hyper.n_trees = 1;
    hyper.max_depth = 0;
    hyper.bootstrap = false;
    const Forest forest = fit_forest(x, n, 2, classes, 5, hyper, seed);
    const std::vector<double> probe = {0.3, 0.7};
    const auto probs = predict_class_probs(forest, probe);
    result.prior_exact = true;
    for (std::size_t c = 0; c < 5; ++c)
      if (probs[c] != static_cast<double>(counts[c]) / static_cast<double>(n))
        result.prior_exact = false;
  }

  {  // Separable stump yields one-hot probabilities.
    std::vector<double> x = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
    std::vector<int> classes = {0, 0, 0, 1, 1, 1};
    ForestHyper hyper;
    hyper.n_trees = 1;
    hyper.max_depth = 1;
    hyper.min_leaf = 1;
    hyper.mtry = 1;
    hyper.bootstrap = false;
    const Forest forest = fit_forest(x, 6, 1, classes, 2, hyper, seed);
    const std::vector<double> left = {-1.0};
    const std::vector<double> right = {1.0};
    const auto pl = predict_class_probs(forest, left);
    const auto pr = predict_class_probs(forest, right);
    result.stump_onehot = pl[0] == 1.0 && pl[1] == 0.0 && pr[0] == 0.0 && pr[1] == 1.0;
  }

  {  // sigma = 0 CDF at grid points equals compensated cumulative sums exactly.
    result.cumsum_exact = true;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 120;
      const std::size_t kg = 2 + rng.uniform_below(10);
      std::vector<double> x(n * 3), y(n);
      for (auto& v : x) v = rng.uniform01() * 2.0 - 1.0;
      for (std::size_t i = 0; i < n; ++i) y[i] = x[3 * i] + 0.3 * rng.normal();
      const ThresholdGrid grid = make_quantile_grid(y, kg);
      const auto classes = discretize_targets(y, grid);
      ForestHyper hyper;
      hyper.n_trees = 7;
      hyper.min_leaf = 3;
      const Forest forest =
          fit_forest(x, n, 3, classes, static_cast<int>(grid.size()) + 1, hyper,
                     seed + static_cast<std::uint64_t>(trial));
      std::vector<double> probe(3);
      for (auto& v : probe) v = rng.uniform01() * 2.0 - 1.0;
      const auto probs = predict_class_probs(forest, probe);
      const auto cdf = forest_conditional_cdf(forest, grid, probe, 0.0);
      long double cum = 0.0L;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        cum += probs[i];
        if (cdf.cdf(grid.alphas[i]) != static_cast<double>(cum))
          result.cumsum_exact = false;
      }
    }
  }

  {  // CDF monotonicity on random (forest, grid, x) triples, sigma 0 and > 0.
    for (int trial = 0; trial < monotone_trials; ++trial) {
      const std::size_t n = 60;
      const std::size_t kg = 1 + rng.uniform_below(12);
      std::vector<double> x(n * 2), y(n);
      for (auto& v : x) v = rng.uniform01() * 2.0 - 1.0;
      for (std::size_t i = 0; i < n; ++i)
        y[i] = std::sin(3.0 * x[2 * i]) + 0.5 * rng.normal();
      const ThresholdGrid grid = make_quantile_grid(y, kg);
      const auto classes = discretize_targets(y, grid);
      ForestHyper hyper;
      hyper.n_trees = 3;
      hyper.max_depth = 4;
      hyper.min_leaf = 2;
      const Forest forest =
          fit_forest(x, n, 2, classes, static_cast<int>(grid.size()) + 1, hyper,
                     seed + 7777 + static_cast<std::uint64_t>(trial));
      std::vector<double> probe = {rng.uniform01() * 2.0 - 1.0, rng.uniform01() * 2.0 - 1.0};
      const double sigma = trial % 2 == 0 ? 0.0 : 0.05 + rng.uniform01();
      const auto dist = forest_conditional_cdf(forest, grid, probe, sigma);

      // The smoothed CDF is a sum of monotone terms evaluated independently
      // per t, so it can wobble by an ulp; anything beyond that is a defect.
      bool ok = true;
      double prev = -1.0;
      for (double t : linspace(grid.alphas.front() - 1.0, grid.alphas.back() + 1.0, 60)) {
        const double v = dist.cdf(t);
        if (v < prev - 1e-13) ok = false;
        prev = std::max(prev, v);
      }
      ++result.monotone_trials;
      if (ok) ++result.monotone_ok;
    }
  }

  {  // OOB accuracy on linearly separable two-class data.
    const std::size_t n = 400;
    std::vector<double> x(n * 2);
    std::vector<int> classes(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[2 * i] = rng.uniform01() * 2.0 - 1.0;
      x[2 * i + 1] = rng.uniform01() * 2.0 - 1.0;
      classes[i] = x[2 * i] + 0.2 * x[2 * i + 1] > 0.0 ? 1 : 0;
    }
    ForestHyper hyper;
    hyper.n_trees = 100;
    const Forest forest = fit_forest(x, n, 2, classes, 2, hyper, seed + 13);
    result.oob_accuracy = oob_accuracy(forest, x, n, classes);
  }

  {  // Permuting training rows leaves fitted predictions unchanged.
    const std::size_t n = 150;
    std::vector<double> x(n * 3), y(n);
    for (auto& v : x) v = rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) y[i] = x[3 * i] + x[3 * i + 1];
    const ThresholdGrid grid = make_quantile_grid(y, 5);
    const auto classes = discretize_targets(y, grid);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = n - 1 - i;
    std::vector<double> x_perm(n * 3);
    std::vector<int> classes_perm(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(perm[i] * 3), 3,
                  x_perm.begin() + static_cast<std::ptrdiff_t>(i * 3));
      classes_perm[i] = classes[perm[i]];
    }

    ForestHyper hyper;
    hyper.n_trees = 11;
    hyper.min_leaf = 2;
    const Forest a = fit_forest(x, n, 3, classes, 6, hyper, seed + 99);
    const Forest b = fit_forest(x_perm, n, 3, classes_perm, 6, hyper, seed + 99);
    result.permutation_invariant = true;
    for (int q = 0; q < 20; ++q) {
      std::vector<double> probe = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
      if (predict_class_probs(a, probe) != predict_class_probs(b, probe))
        result.permutation_invariant = false;
    }
  }

  return result;
}

ClosedFormResult bench_closed_form() {
  ClosedFormResult result;
  const double got = silverman_bandwidth(10, 18399, 1.0);
  const long double kn = 183990.0L;
  const long double expected = 1.06L * std::exp(-0.2L * std::log(kn));
  result.silverman_rel_err =
      std::abs(static_cast<double>((static_cast<long double>(got) - expected) / expected));
  result.gumbel_abs_err = std::abs(gumbel_transform(std::exp(-1.0)));
  return result;
}

ScreeningRecallResult bench_screening_recall(const ScreeningRecallConfig& cfg) {
  ScreeningRecallResult result;
  result.min_recall = 1.0;
  result.max_fpr = 0.0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    SyntheticModel model;
    model.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
    model.contamination_fraction = cfg.contamination_fraction;
    model.contamination_distance = cfg.contamination_distance;
    const GeneratedData data = generate(model, cfg.n_measured, cfg.m_simulated);

    const FittedMetric metric = fit_metric(data.simulated, MetricKind::Mahalanobis);
    const auto index = NeighborIndex::build(metric.whiten_matrix(data.simulated),
                                            data.simulated.rows(), data.simulated.cols(),
                                            IndexBackend::Accelerated);
    const ScreeningReport report =
        screen_outliers(data.measured, metric, index, cfg.k_neighbors, cfg.threads);

    std::size_t planted = 0, caught = 0, clean = 0, false_pos = 0;
    for (std::size_t i = 0; i < data.measured.rows(); ++i) {
      if (data.contaminated[i]) {
        ++planted;
        caught += report.outlier_flags[i] != 0;
      } else {
        ++clean;
        false_pos += report.outlier_flags[i] != 0;
      }
    }
    const double recall =
        planted == 0 ? 1.0 : static_cast<double>(caught) / static_cast<double>(planted);
    const double fpr =
        clean == 0 ? 0.0 : static_cast<double>(false_pos) / static_cast<double>(clean);
    result.recalls.push_back(recall);
    result.fprs.push_back(fpr);
    result.min_recall = std::min(result.min_recall, recall);
    result.max_fpr = std::max(result.max_fpr, fpr);
    ++result.trials;
  }
  return result;
}

}  // namespace condmix
