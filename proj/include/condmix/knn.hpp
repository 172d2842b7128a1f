#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "condmix/dataset.hpp"
#include "condmix/metric.hpp"
#include "condmix/mixture.hpp"
#include "condmix/neighbors.hpp"

namespace condmix {

// Smoothed k-nearest-neighbor conditional estimator: the conditional law at x
// is the equal-weight mixture of Gaussians centered at the k nearest simulated
// responses, all sharing one bandwidth. Queries take covariates in measured
// (raw) units; the model whitens with its simulation-fitted metric.
struct KnnConditionalModel {
  FittedMetric metric;
  NeighborIndex index;  // whitened simulated covariates
  std::vector<double> responses;
  std::size_t k = 10;
  double sigma = 0.0;
};

KnnConditionalModel fit_knn(const Dataset& sim, const FittedMetric& metric, std::size_t k,
                            double sigma, IndexBackend backend = IndexBackend::Accelerated);

std::vector<NeighborIndex::Hit> knn_neighbors(const KnnConditionalModel& model,
                                              std::span<const double> x_raw);

MixtureDistribution knn_conditional(const KnnConditionalModel& model,
                                    std::span<const double> x_raw);

// Conditional mean used by the regression-imputation baseline.
double knn_conditional_mean(const KnnConditionalModel& model, std::span<const double> x_raw);

}  // namespace condmix
