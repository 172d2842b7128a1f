#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "condmix/dataset.hpp"

namespace condmix {

enum class MetricKind { Euclidean, Mahalanobis };

// Per-column standardization constants, always fitted on the simulated data.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;  // strictly positive

  std::size_t dim() const noexcept { return means.size(); }
};

Standardizer fit_standardizer(const Dataset& sim);
Dataset apply_standardizer(const Standardizer& s, const Dataset& data);
void standardize_row(const Standardizer& s, std::span<const double> raw,
                     std::span<double> out);

// Quadratic-form metric d(x,y) = sqrt((x-y)^T M (x-y)) over standardized
// covariates. For Mahalanobis, M is the inverse of (sample covariance +
// ridge*I) and `chol` holds the lower Cholesky factor of that covariance;
// distances are Euclidean norms of forward-solved differences. Euclidean
// keeps the identity factor.
struct Whitener {
  MetricKind kind = MetricKind::Euclidean;
  std::size_t dim = 0;
  double ridge = 0.0;
  std::vector<double> chol;  // lower-triangular, row-major d*d

  // L^{-1} x for a standardized point: coordinates in which the metric is Euclidean.
  void whiten(std::span<const double> standardized, std::span<double> out) const;
  double distance(std::span<const double> x, std::span<const double> y) const;
};

inline constexpr double kDefaultRidgeScale = 1e-9;  // ridge = scale * trace(cov)/d

// `ridge` < 0 selects the default ridge; pass 0 for no regularization.
Whitener fit_whitener(const Dataset& standardized, MetricKind kind, double ridge = -1.0);

// Simulation-fitted standardizer + whitener, the transform every distance-based
// module runs in.
struct FittedMetric {
  Standardizer standardizer;
  Whitener whitener;

  std::size_t dim() const noexcept { return standardizer.dim(); }
  std::vector<double> whiten_row(std::span<const double> raw) const;
  // Row-major rows x dim matrix of whitened coordinates.
  std::vector<double> whiten_matrix(const Dataset& raw) const;
};

FittedMetric fit_metric(const Dataset& sim, MetricKind kind, double ridge = -1.0);

}  // namespace condmix
