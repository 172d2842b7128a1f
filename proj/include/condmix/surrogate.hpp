#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "condmix/dataset.hpp"
#include "condmix/forest.hpp"
#include "condmix/knn.hpp"
#include "condmix/mixture.hpp"

namespace condmix {

// Equal-weight average of n conditional distributions: the estimate of the
// unconditional response law. Component weights are pooled and divided by n;
// tail deficits average the same way.
struct SurrogateDistribution {
  MixtureDistribution mixture;
  std::size_t n_conditionals = 0;

  double cdf(double t) const { return mixture.cdf(t); }
  double quantile(double level) const { return mixture.quantile(level); }
  MixtureDistribution::Moments moments() const { return mixture.moments(); }
  double deficit() const { return mixture.tail_deficit(); }
};

// All conditionals must share one bandwidth; mixed bandwidths are rejected
// rather than silently averaged.
SurrogateDistribution aggregate(const std::vector<MixtureDistribution>& conditionals);

// -log(-log p) on (0,1) strictly; straightens Gumbel CDFs.
double gumbel_transform(double p);

// sigma = 1.06 * (k*n)^(-1/5) * pooled_std. pooled_std is the sample standard
// deviation of the k*n simulated responses pooled over all conditionals; zero
// yields a zero bandwidth (degenerate pooled sample).
double silverman_bandwidth(std::size_t k_neighbors, std::size_t n_measured,
                           double pooled_std);

struct SigmaPolicy {
  enum class Mode { Fixed, Silverman };
  Mode mode = Mode::Fixed;
  double value = 0.0;

  static SigmaPolicy fixed(double v) { return {Mode::Fixed, v}; }
  static SigmaPolicy silverman() { return {Mode::Silverman, 0.0}; }
};

struct KnnSurrogateResult {
  SurrogateDistribution dist;
  double sigma;
  double pooled_std;       // sample std of the pooled neighbor responses
  std::size_t pooled_count;  // k * n
};

// Full pipeline for the kNN path: query neighbors for every measured row,
// resolve the bandwidth policy, build conditionals and aggregate.
KnnSurrogateResult knn_surrogate(const KnnConditionalModel& model, const Dataset& measured,
                                 SigmaPolicy sigma, unsigned threads = 1);

SurrogateDistribution forest_surrogate(const Forest& forest, const ThresholdGrid& grid,
                                       const Dataset& measured, double sigma,
                                       unsigned threads = 1);

// Dirac at the kNN conditional mean of each measured row: the regression-
// imputation strawman whose variance undershoots the target law.
SurrogateDistribution regression_imputation_baseline(const Dataset& measured,
                                                     const KnnConditionalModel& model,
                                                     unsigned threads = 1);

// Right-continuous 1/n empirical distribution as a point-mass mixture.
MixtureDistribution empirical_distribution(std::span<const double> values);

struct CurvePoint {
  double t = 0.0;
  double value = 0.0;
  bool clipped = false;
};

std::vector<CurvePoint> cdf_curve(const SurrogateDistribution& dist,
                                  std::span<const double> grid);

// Transform curve; CDF values are clipped into [eps, 1-eps] first and clipped
// points are marked.
std::vector<CurvePoint> gumbel_curve(const SurrogateDistribution& dist,
                                     std::span<const double> grid, double eps = 1e-12);

}  // namespace condmix
