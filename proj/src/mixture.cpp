#include "condmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "condmix/errors.hpp"
#include "condmix/gauss.hpp"
#include "condmix/util.hpp"

namespace condmix {

MixtureDistribution::MixtureDistribution(std::vector<double> means, std::vector<double> weights,
                                         double sigma, double tail_deficit)
    : sigma_(sigma), deficit_(tail_deficit) {
  if (means.empty()) raise(Errc::EmptyList, "mixture needs at least one component");
  if (means.size() != weights.size())
    raise(Errc::DimensionMismatch, "means/weights length mismatch");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    raise(Errc::NonPositiveInput, "bandwidth must be finite and >= 0");
  if (!(tail_deficit >= 0.0 && tail_deficit <= 1.0))
    raise(Errc::InvalidArgument, "tail deficit must lie in [0,1]");

  std::vector<std::size_t> order(means.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });

  means_.reserve(means.size());
  weights_.reserve(means.size());
  for (std::size_t idx : order) {
    const double m = means[idx];
    const double w = weights[idx];
    if (!std::isfinite(m)) raise(Errc::NonFiniteValue, "mixture mean is not finite");
    if (!(w >= 0.0) || !std::isfinite(w))
      raise(Errc::InvalidArgument, "mixture weight must be finite and >= 0");
    if (!means_.empty() && m == means_.back())
      weights_.back() += w;  // exact duplicates collapse; CDF values are unchanged
    else {
      means_.push_back(m);
      weights_.push_back(w);
    }
  }

  // Plain extended-precision accumulation: adding nonnegative terms without a
  // compensation carry keeps the staircase nondecreasing to the last ulp.
  cumulative_.resize(weights_.size());
  long double acc = 0.0L;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc += weights_[i];
    cumulative_[i] = static_cast<double>(acc);
  }
  total_weight_ = cumulative_.back();

  if (std::abs(total_weight_ + deficit_ - 1.0) > 1e-9)
    raise(Errc::InvalidArgument, "mixture weights plus deficit must sum to 1");
}

double MixtureDistribution::cdf(double t) const {
  if (sigma_ == 0.0) {
    // Right-continuous staircase: mass at or below t.
    const auto it = std::upper_bound(means_.begin(), means_.end(), t);
    if (it == means_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - means_.begin()) - 1];
  }
  KahanSum acc;
  for (std::size_t i = 0; i < means_.size(); ++i)
    acc.add(weights_[i] * normal_cdf((t - means_[i]) / sigma_));
  return acc.value();
}

double MixtureDistribution::quantile(double level) const {
  if (!(level > 0.0 && level < 1.0))
    raise(Errc::OutOfDomain, "quantile level must lie strictly in (0,1)");
  if (level > total_weight_)
    raise(Errc::LevelBeyondDeficit,
          "level " + std::to_string(level) + " exceeds placeable mass " +
              std::to_string(total_weight_));

  if (sigma_ == 0.0) {
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), level);
    return means_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

  double lo = means_.front() - 12.0 * sigma_;
  double hi = means_.back() + 12.0 * sigma_;
  // Widen until bracketed; fails only for levels pathologically close to the ceiling.
  for (int i = 0; cdf(hi) < level; ++i) {
    if (i >= 40) raise(Errc::LevelBeyondDeficit, "level unreachable within bracket expansion");
    hi += (hi - lo);
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
    if (cdf(mid) >= level)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

MixtureDistribution::Moments MixtureDistribution::moments() const {
  if (total_weight_ <= 0.0)
    raise(Errc::LevelBeyondDeficit, "no located mass to take moments of");
  KahanSum mean_acc;
  for (std::size_t i = 0; i < means_.size(); ++i) mean_acc.add(weights_[i] * means_[i]);
  const double mean = mean_acc.value() / total_weight_;

  KahanSum var_acc;
  for (std::size_t i = 0; i < means_.size(); ++i) {
    const double c = means_[i] - mean;
    var_acc.add(weights_[i] * (c * c + sigma_ * sigma_));
  }
  return Moments{mean, var_acc.value() / total_weight_, deficit_ > 0.0};
}

}  // namespace condmix
