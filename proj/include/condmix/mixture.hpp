#pragma once

#include <cstddef>
#include <vector>

namespace condmix {

// Weighted mixture of Gaussians with one shared bandwidth; sigma = 0 means
// point masses. `tail_deficit` is probability mass the estimator could not
// place above its largest component (forest CDF path); weights + deficit = 1.
//
// Components are canonicalized at construction: sorted by mean, exact
// duplicate means merged, cumulative weights precomputed with compensated
// summation. The CDF is right-continuous with limits 0 and 1 - deficit.
class MixtureDistribution {
 public:
  MixtureDistribution(std::vector<double> means, std::vector<double> weights, double sigma,
                      double tail_deficit = 0.0);

  static MixtureDistribution dirac(double at) { return MixtureDistribution({at}, {1.0}, 0.0); }

  double cdf(double t) const;

  // Left-continuous generalized inverse inf{t : cdf(t) >= level}.
  // Raises LevelBeyondDeficit when the level exceeds the placeable mass.
  double quantile(double level) const;

  struct Moments {
    double mean;
    double variance;
    bool deficit_excluded;  // true when tail mass was left out of the moments
  };
  Moments moments() const;

  double sigma() const noexcept { return sigma_; }
  double tail_deficit() const noexcept { return deficit_; }
  double total_weight() const noexcept { return total_weight_; }
  std::size_t size() const noexcept { return means_.size(); }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& cumulative_weights() const noexcept { return cumulative_; }
  double min_mean() const noexcept { return means_.front(); }
  double max_mean() const noexcept { return means_.back(); }

 private:
  std::vector<double> means_;       // ascending, unique
  std::vector<double> weights_;     // aligned with means_
  std::vector<double> cumulative_;  // compensated prefix sums of weights_
  double sigma_;
  double deficit_;
  double total_weight_;
};

}  // namespace condmix
