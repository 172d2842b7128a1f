#include "condmix/metric.hpp"

#include <cmath>

#include "condmix/errors.hpp"
#include "condmix/util.hpp"

namespace condmix {

namespace {

// In-place lower Cholesky of a symmetric matrix given by its lower triangle.
// Fails when a pivot drops below tol relative to the largest diagonal entry.
bool cholesky_lower(std::vector<double>& a, std::size_t d) {
  double max_diag = 0.0;
  for (std::size_t j = 0; j < d; ++j) max_diag = std::max(max_diag, a[j * d + j]);
  const double tol = 1e-12 * std::max(1.0, max_diag);

  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= a[j * d + k] * a[j * d + k];
    if (!(pivot > tol)) return false;
    const double ljj = std::sqrt(pivot);
    a[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = v / ljj;
    }
    for (std::size_t k = j + 1; k < d; ++k) a[j * d + k] = 0.0;  // keep upper part clean
  }
  return true;
}

}  // namespace

Standardizer fit_standardizer(const Dataset& sim) {
  if (sim.origin() != Origin::Simulated)
    raise(Errc::InvalidArgument, "standardizer is fitted on simulated data only");
  const std::size_t m = sim.rows();
  const std::size_t d = sim.cols();
  if (m < 2) raise(Errc::TooFewPoints, "standardizer needs at least 2 rows");

  Standardizer s;
  s.means.resize(d);
  s.stds.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    KahanSum sum;
    for (std::size_t i = 0; i < m; ++i) sum.add(sim.x(i, j));
    const double mean = sum.value() / static_cast<double>(m);
    KahanSum sq;
    for (std::size_t i = 0; i < m; ++i) {
      const double c = sim.x(i, j) - mean;
      sq.add(c * c);
    }
    const double std_j = std::sqrt(sq.value() / static_cast<double>(m - 1));
    if (std_j < 1e-12)
      raise(Errc::DegenerateColumn,
            "column '" + sim.column_names()[j] + "' is (near-)constant");
    s.means[j] = mean;
    s.stds[j] = std_j;
  }
  return s;
}

void standardize_row(const Standardizer& s, std::span<const double> raw,
                     std::span<double> out) {
  if (raw.size() != s.dim() || out.size() != s.dim())
    raise(Errc::DimensionMismatch, "standardizer dimension mismatch");
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - s.means[j]) / s.stds[j];
}

Dataset apply_standardizer(const Standardizer& s, const Dataset& data) {
  if (data.cols() != s.dim())
    raise(Errc::DimensionMismatch, "standardizer fitted for d=" + std::to_string(s.dim()) +
                                       ", data has d=" + std::to_string(data.cols()));
  std::vector<double> x(data.rows() * data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i)
    standardize_row(s, data.row(i), {x.data() + i * data.cols(), data.cols()});
  std::optional<std::vector<double>> y;
  if (data.has_y()) y = data.y();
  return Dataset(data.column_names(), std::move(x), data.rows(), data.cols(), std::move(y),
                 data.origin());
}

Whitener fit_whitener(const Dataset& standardized, MetricKind kind, double ridge) {
  const std::size_t d = standardized.cols();
  Whitener w;
  w.kind = kind;
  w.dim = d;
  w.chol.assign(d * d, 0.0);

  if (kind == MetricKind::Euclidean) {
    w.ridge = 0.0;
    for (std::size_t j = 0; j < d; ++j) w.chol[j * d + j] = 1.0;
    return w;
  }

  const std::size_t m = standardized.rows();
  if (m < d + 1)
    raise(Errc::TooFewPoints, "Mahalanobis whitener needs at least d+1 rows");

  std::vector<double> mean(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    KahanSum sum;
    for (std::size_t i = 0; i < m; ++i) sum.add(standardized.x(i, j));
    mean[j] = sum.value() / static_cast<double>(m);
  }

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      KahanSum sum;
      for (std::size_t i = 0; i < m; ++i)
        sum.add((standardized.x(i, j) - mean[j]) * (standardized.x(i, k) - mean[k]));
      const double v = sum.value() / static_cast<double>(m - 1);
      cov[j * d + k] = v;
      cov[k * d + j] = v;
    }
  }

  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov[j * d + j];
  if (ridge < 0.0) ridge = kDefaultRidgeScale * trace / static_cast<double>(d);
  for (std::size_t j = 0; j < d; ++j) cov[j * d + j] += ridge;

  if (!cholesky_lower(cov, d))
    raise(Errc::NotPositiveDefinite,
          "covariance + ridge*I is not positive definite (collinear covariates?)");
  w.ridge = ridge;
  w.chol = std::move(cov);
  return w;
}

void Whitener::whiten(std::span<const double> standardized, std::span<double> out) const {
  if (standardized.size() != dim || out.size() != dim)
    raise(Errc::DimensionMismatch, "whitener dimension mismatch");
  if (kind == MetricKind::Euclidean) {
    for (std::size_t i = 0; i < dim; ++i) out[i] = standardized[i];
    return;
  }
  // Forward solve L * out = x.
  for (std::size_t i = 0; i < dim; ++i) {
    double v = standardized[i];
    for (std::size_t k = 0; k < i; ++k) v -= chol[i * dim + k] * out[k];
    out[i] = v / chol[i * dim + i];
  }
}

double Whitener::distance(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim || y.size() != dim)
    raise(Errc::DimensionMismatch, "distance dimension mismatch");
  std::vector<double> diff(dim), solved(dim);
  for (std::size_t i = 0; i < dim; ++i) diff[i] = x[i] - y[i];
  whiten(diff, solved);
  double sq = 0.0;
  for (double v : solved) sq += v * v;
  return std::sqrt(sq);
}

std::vector<double> FittedMetric::whiten_row(std::span<const double> raw) const {
  std::vector<double> std_row(dim()), out(dim());
  standardize_row(standardizer, raw, std_row);
  whitener.whiten(std_row, out);
  return out;
}

std::vector<double> FittedMetric::whiten_matrix(const Dataset& raw) const {
  const std::size_t d = dim();
  if (raw.cols() != d) raise(Errc::DimensionMismatch, "metric/data dimension mismatch");
  std::vector<double> out(raw.rows() * d);
  std::vector<double> std_row(d);
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    standardize_row(standardizer, raw.row(i), std_row);
    whitener.whiten(std_row, {out.data() + i * d, d});
  }
  return out;
}

FittedMetric fit_metric(const Dataset& sim, MetricKind kind, double ridge) {
  FittedMetric fm;
  fm.standardizer = fit_standardizer(sim);
  const Dataset standardized = apply_standardizer(fm.standardizer, sim);
  fm.whitener = fit_whitener(standardized, kind, ridge);
  return fm;
}

}  // namespace condmix
