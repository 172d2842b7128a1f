#include "condmix/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "condmix/errors.hpp"
#include "condmix/util.hpp"

namespace condmix {

SurrogateDistribution aggregate(const std::vector<MixtureDistribution>& conditionals) {
  if (conditionals.empty()) raise(Errc::EmptyList, "nothing to aggregate");
  const double sigma = conditionals.front().sigma();
  std::size_t total = 0;
  for (const auto& c : conditionals) {
    if (c.sigma() != sigma)
      raise(Errc::MixedBandwidth, "conditionals must share one bandwidth");
    total += c.size();
  }

  const double inv_n = 1.0 / static_cast<double>(conditionals.size());
  std::vector<double> means, weights;
  means.reserve(total);
  weights.reserve(total);
  KahanSum deficit;
  for (const auto& c : conditionals) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      means.push_back(c.means()[i]);
      weights.push_back(c.weights()[i] * inv_n);
    }
    deficit.add(c.tail_deficit() * inv_n);
  }
  return SurrogateDistribution{
      MixtureDistribution(std::move(means), std::move(weights), sigma, deficit.value()),
      conditionals.size()};
}

double gumbel_transform(double p) {
  if (!(p > 0.0 && p < 1.0))
    raise(Errc::OutOfDomain, "gumbel transform requires p strictly inside (0,1)");
  return -std::log(-std::log(p));
}

double silverman_bandwidth(std::size_t k_neighbors, std::size_t n_measured,
                           double pooled_std) {
  if (k_neighbors == 0 || n_measured == 0)
    raise(Errc::NonPositiveInput, "k and n must be positive");
  if (!(pooled_std >= 0.0) || !std::isfinite(pooled_std))
    raise(Errc::NonPositiveInput, "pooled std must be finite and >= 0");
  const double kn = static_cast<double>(k_neighbors) * static_cast<double>(n_measured);
  return 1.06 * std::pow(kn, -0.2) * pooled_std;
}

KnnSurrogateResult knn_surrogate(const KnnConditionalModel& model, const Dataset& measured,
                                 SigmaPolicy sigma, unsigned threads) {
  const std::size_t n = measured.rows();
  std::vector<std::vector<NeighborIndex::Hit>> hits(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) hits[i] = knn_neighbors(model, measured.row(i));
  });

  // Pooled responses keep their multiplicity; the pooled std feeds Silverman.
  std::vector<double> pooled;
  pooled.reserve(n * model.k);
  for (const auto& row_hits : hits)
    for (const auto& h : row_hits) pooled.push_back(model.responses[h.index]);
  const std::size_t pooled_count = pooled.size();
  const double pooled_std = pooled.size() >= 2 ? sample_std(pooled) : 0.0;

  const double bandwidth = sigma.mode == SigmaPolicy::Mode::Silverman
                               ? silverman_bandwidth(model.k, n, pooled_std)
                               : sigma.value;

  std::vector<MixtureDistribution> conditionals;
  conditionals.reserve(n);
  for (const auto& row_hits : hits) {
    std::vector<double> means, weights;
    means.reserve(row_hits.size());
    const double w = 1.0 / static_cast<double>(row_hits.size());
    for (const auto& h : row_hits) {
      means.push_back(model.responses[h.index]);
      weights.push_back(w);
    }
    conditionals.emplace_back(std::move(means), std::move(weights), bandwidth);
  }
  return KnnSurrogateResult{aggregate(conditionals), bandwidth, pooled_std, pooled_count};
}

SurrogateDistribution forest_surrogate(const Forest& forest, const ThresholdGrid& grid,
                                       const Dataset& measured, double sigma,
                                       unsigned threads) {
  const std::size_t n = measured.rows();
  std::vector<std::vector<double>> probs(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      probs[i] = predict_class_probs(forest, measured.row(i));
  });

  // All conditionals share the grid means, so pool the probabilities directly.
  const std::size_t k = grid.size();
  std::vector<KahanSum> pooled(k);
  KahanSum deficit;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (const auto& p : probs) {
    for (std::size_t j = 0; j < k; ++j) pooled[j].add(p[j] * inv_n);
    deficit.add(p[k] * inv_n);
  }
  std::vector<double> weights(k);
  for (std::size_t j = 0; j < k; ++j) weights[j] = pooled[j].value();
  return SurrogateDistribution{
      MixtureDistribution(grid.alphas, std::move(weights), sigma, deficit.value()), n};
}

SurrogateDistribution regression_imputation_baseline(const Dataset& measured,
                                                     const KnnConditionalModel& model,
                                                     unsigned threads) {
  const std::size_t n = measured.rows();
  std::vector<double> means(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      means[i] = knn_conditional_mean(model, measured.row(i));
  });
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return SurrogateDistribution{
      MixtureDistribution(std::move(means), std::move(weights), 0.0), n};
}

MixtureDistribution empirical_distribution(std::span<const double> values) {
  if (values.empty()) raise(Errc::EmptyList, "empirical distribution of nothing");
  std::vector<double> means(values.begin(), values.end());
  std::vector<double> weights(values.size(), 1.0 / static_cast<double>(values.size()));
  return MixtureDistribution(std::move(means), std::move(weights), 0.0);
}

std::vector<CurvePoint> cdf_curve(const SurrogateDistribution& dist,
                                  std::span<const double> grid) {
  if (grid.empty()) raise(Errc::EmptyGrid, "empty evaluation grid");
  std::vector<CurvePoint> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {grid[i], dist.cdf(grid[i]), false};
  return out;
}

std::vector<CurvePoint> gumbel_curve(const SurrogateDistribution& dist,
                                     std::span<const double> grid, double eps) {
  auto curve = cdf_curve(dist, grid);
  for (auto& pt : curve) {
    double p = pt.value;
    if (p < eps) {
      p = eps;
      pt.clipped = true;
    } else if (p > 1.0 - eps) {
      p = 1.0 - eps;
      pt.clipped = true;
    }
    pt.value = gumbel_transform(p);
  }
  return curve;
}

}  // namespace condmix
