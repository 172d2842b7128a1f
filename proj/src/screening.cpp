#include "condmix/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "condmix/errors.hpp"
#include "condmix/util.hpp"

namespace condmix {

namespace {

// Integral of |g| over one unit interval where g is linear with endpoint
// values g0, g1. With a sign change the interval splits at the root.
double abs_linear_integral(double g0, double g1) {
  if ((g0 >= 0.0 && g1 >= 0.0) || (g0 <= 0.0 && g1 <= 0.0))
    return 0.5 * std::abs(g0 + g1);
  const double a0 = std::abs(g0);
  const double a1 = std::abs(g1);
  return 0.5 * (g0 * g0 + g1 * g1) / (a0 + a1);
}

double chord_gap_integral(std::span<const double> d, std::size_t tau) {
  const std::size_t n = d.size();
  const double first = d.front();
  const double knee = d[tau - 1];
  const double last = d.back();
  const double slope_left = (knee - first) / static_cast<double>(tau - 1);
  const double slope_right = (last - knee) / static_cast<double>(n - tau);

  KahanSum total;
  double prev_gap = 0.0;  // f and f_tau agree at x = 1
  for (std::size_t i = 1; i < n; ++i) {
    const double x = static_cast<double>(i + 1);  // curve knot positions are 1..n
    const double chord =
        x <= static_cast<double>(tau)
            ? first + slope_left * (x - 1.0)
            : knee + slope_right * (x - static_cast<double>(tau));
    const double gap = d[i] - chord;
    total.add(abs_linear_integral(prev_gap, gap));
    prev_gap = gap;
  }
  return total.value();
}

}  // namespace

double l1_error_for_tau(std::span<const double> sorted_avg_distances, std::size_t tau) {
  const std::size_t n = sorted_avg_distances.size();
  if (n < 3) raise(Errc::TooFewPoints, "threshold selection needs n >= 3");
  if (tau < ThresholdSelection::kTauMin || tau > n - 1)
    raise(Errc::InvalidArgument, "tau outside admissible range {2, ..., n-1}");
  return chord_gap_integral(sorted_avg_distances, tau);
}

ThresholdSelection l1_threshold(std::span<const double> sorted_avg_distances,
                                unsigned threads) {
  const std::size_t n = sorted_avg_distances.size();
  if (n < 3) raise(Errc::TooFewPoints, "threshold selection needs n >= 3");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (sorted_avg_distances[i] > sorted_avg_distances[i + 1])
      raise(Errc::NotSorted, "average distances must be sorted ascending");

  ThresholdSelection sel;
  sel.raw_l1.resize(n - 2);
  // Each tau is an independent O(n) closed-form pass; the argmin below is a
  // sequential reduction, so results do not depend on the thread count.
  parallel_for(n - 2, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      sel.raw_l1[i] = chord_gap_integral(sorted_avg_distances, i + ThresholdSelection::kTauMin);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.raw_l1.size(); ++i)
    if (sel.raw_l1[i] < sel.raw_l1[best]) best = i;
  sel.tau = best + ThresholdSelection::kTauMin;
  sel.threshold = sorted_avg_distances[sel.tau - 1];

  const double max_raw = *std::max_element(sel.raw_l1.begin(), sel.raw_l1.end());
  sel.normalized_l1.resize(sel.raw_l1.size());
  for (std::size_t i = 0; i < sel.raw_l1.size(); ++i)
    sel.normalized_l1[i] = max_raw > 0.0 ? sel.raw_l1[i] / max_raw : 0.0;
  return sel;
}

std::size_t ScreeningReport::outlier_count() const {
  std::size_t count = 0;
  for (char f : outlier_flags) count += f != 0;
  return count;
}

ScreeningReport screen_points(const Dataset& queries, const FittedMetric& metric,
                              const NeighborIndex& index, std::size_t k, unsigned threads,
                              std::optional<double> threshold_override) {
  if (k == 0) raise(Errc::InvalidArgument, "k must be >= 1");
  const std::size_t n = queries.rows();

  ScreeningReport report;
  report.avg_distances.resize(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto w = metric.whiten_row(queries.row(i));
      report.avg_distances[i] = index.avg_knn_distance(w, k);
    }
  });

  report.sorted_order.resize(n);
  std::iota(report.sorted_order.begin(), report.sorted_order.end(), std::size_t{0});
  std::sort(report.sorted_order.begin(), report.sorted_order.end(),
            [&](std::size_t a, std::size_t b) {
              return report.avg_distances[a] < report.avg_distances[b] ||
                     (report.avg_distances[a] == report.avg_distances[b] && a < b);
            });

  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) sorted[r] = report.avg_distances[report.sorted_order[r]];

  report.selection = l1_threshold(sorted, threads);

  if (threshold_override) {
    report.overridden = true;
    report.selection.threshold = *threshold_override;
    // Report the rank the override lands on: first sorted value >= threshold.
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), *threshold_override);
    report.selection.tau = static_cast<std::size_t>(it - sorted.begin()) + 1;
  }

  // Flat curve: no structural change exists to detect, so nothing is flagged.
  const double lo = sorted.front();
  const double hi = sorted.back();
  report.flat_curve = !report.overridden && (hi - lo) < 1e-12 * std::max(1.0, hi);

  report.outlier_flags.assign(n, 0);
  if (!report.flat_curve) {
    for (std::size_t i = 0; i < n; ++i)
      report.outlier_flags[i] = report.avg_distances[i] >= report.selection.threshold;
  }
  return report;
}

ScreeningReport screen_outliers(const Dataset& measured, const FittedMetric& metric,
                                const NeighborIndex& sim_index, std::size_t k,
                                unsigned threads, std::optional<double> threshold_override) {
  return screen_points(measured, metric, sim_index, k, threads, threshold_override);
}

TrimResult trim_simulations(const Dataset& sim, const FittedMetric& metric,
                            const NeighborIndex& measured_index, std::size_t k,
                            unsigned threads, std::optional<double> threshold_override) {
  TrimResult result;
  result.report = screen_points(sim, metric, measured_index, k, threads, threshold_override);
  result.kept.reserve(sim.rows());
  for (std::size_t i = 0; i < sim.rows(); ++i)
    if (!result.report.outlier_flags[i]) result.kept.push_back(i);
  return result;
}

}  // namespace condmix
