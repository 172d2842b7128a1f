#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "condmix/dataset.hpp"
#include "condmix/metric.hpp"
#include "condmix/neighbors.hpp"

namespace condmix {

// Automatic threshold over a sorted average-distance curve: tau minimizes the
// exact integral of |f - f_tau| over [1, n], where f interpolates every point
// and f_tau only the first, the tau-th and the last. raw_l1[i] holds the error
// for tau = i + 2; tau runs over {2, ..., n-1}; ties go to the smallest tau.
struct ThresholdSelection {
  std::size_t tau = 0;      // 1-based rank
  double threshold = 0.0;   // tau-th smallest average distance
  std::vector<double> raw_l1;
  std::vector<double> normalized_l1;  // raw / max(raw); plotting only

  static constexpr std::size_t kTauMin = 2;
};

ThresholdSelection l1_threshold(std::span<const double> sorted_avg_distances,
                                unsigned threads = 0);

// Exact integral of |f - f_tau| for one tau; exposed for the numeric oracle tests.
double l1_error_for_tau(std::span<const double> sorted_avg_distances, std::size_t tau);

struct ScreeningReport {
  std::vector<double> avg_distances;       // per input row
  std::vector<std::size_t> sorted_order;   // ranks: avg_distances[sorted_order[r]] ascending
  ThresholdSelection selection;
  std::vector<char> outlier_flags;         // avg_distances[i] >= threshold
  bool flat_curve = false;                 // degenerate rule applied: nothing flagged
  bool overridden = false;                 // manual threshold supplied

  std::size_t outlier_count() const;
};

// Average distance from each query row to its k nearest indexed points, then
// the L1 threshold over the sorted curve. Queries are whitened with `metric`;
// the index must hold coordinates whitened the same way.
ScreeningReport screen_points(const Dataset& queries, const FittedMetric& metric,
                              const NeighborIndex& index, std::size_t k, unsigned threads,
                              std::optional<double> threshold_override = std::nullopt);

// Measurement screening: distances from measured rows to simulated points.
ScreeningReport screen_outliers(const Dataset& measured, const FittedMetric& metric,
                                const NeighborIndex& sim_index, std::size_t k = 10,
                                unsigned threads = 1,
                                std::optional<double> threshold_override = std::nullopt);

// Reverse trimming: distances from simulated rows to measured points; rows at
// or above the threshold are discarded.
struct TrimResult {
  std::vector<std::size_t> kept;
  ScreeningReport report;
};

TrimResult trim_simulations(const Dataset& sim, const FittedMetric& metric,
                            const NeighborIndex& measured_index, std::size_t k = 1,
                            unsigned threads = 1,
                            std::optional<double> threshold_override = std::nullopt);

}  // namespace condmix
