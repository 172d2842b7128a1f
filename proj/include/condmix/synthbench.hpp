#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "condmix/dataset.hpp"
#include "condmix/rng.hpp"

namespace condmix {

enum class NoiseFamily { Gaussian, Gumbel };

// Synthetic ground truth with a valid simulation environment by construction:
// measured covariates are drawn from a truncated Gaussian mixture strictly
// inside the simulated covariates' uniform support, and both origins share one
// conditional response sampler.
//
//   X under Q: uniform on [-1, 1]^d
//   X under P: equal mixture of N(+-0.35*1, 0.3^2 I), rejected to [-0.8, 0.8]^d
//   Y | X = x: g(x) + s(x) * noise,   noise centered to mean zero
//   g(x) = mean_scale * (x1 + 0.5*x2^2 + sin(pi*x3))
//   s(x) = scale_base * (1 + scale_slope*|x4|)
//
// Coordinates beyond the fourth are inert covariates. The centered Gumbel
// noise keeps g(x) the exact conditional mean while mimicking block-maximum
// response shapes.
struct SyntheticModel {
  std::size_t d = 4;
  NoiseFamily noise = NoiseFamily::Gumbel;
  double mean_scale = 1.0;
  double scale_base = 0.3;
  double scale_slope = 0.5;
  // Fraction of measured rows planted outside [-1,1]^d, roughly
  // contamination_distance whitened units from the simulated support.
  double contamination_fraction = 0.0;
  double contamination_distance = 6.0;
  std::uint64_t seed = 1;

  double cond_mean(std::span<const double> x) const;
  double cond_scale(std::span<const double> x) const;
  double draw_noise(CounterRng& rng) const;
  double noise_variance() const noexcept;
  double noise_median() const noexcept;
  double draw_conditional(std::span<const double> x, CounterRng& rng) const;

  // Covariance of X under Q: (1/3) I, for generator sanity checks.
  double analytic_cov_q_diag() const noexcept { return 1.0 / 3.0; }
};

struct GeneratedData {
  Dataset measured;                    // covariates only
  std::vector<double> measured_y_eval; // evaluation-only responses, one per row
  std::vector<char> contaminated;      // planted-outlier marker, one per row
  Dataset simulated;                   // covariates + responses
};

GeneratedData generate(const SyntheticModel& model, std::size_t n_measured,
                       std::size_t m_simulated);

struct CdfEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of P(Y <= t) under the measured law; n_mc >= 10^4.
CdfEstimate true_cdf(const SyntheticModel& model, double t, std::size_t n_mc,
                     std::uint64_t seed);

// Fresh draws of Y under the measured law; sorted draws make oracle quantiles.
std::vector<double> sample_response_marginal(const SyntheticModel& model, std::size_t n_mc,
                                             std::uint64_t seed);

// Draws of g(X) under the measured law, for variance-decomposition oracles.
std::vector<double> sample_cond_mean_marginal(const SyntheticModel& model, std::size_t n_mc,
                                              std::uint64_t seed);
std::vector<double> sample_cond_var_marginal(const SyntheticModel& model, std::size_t n_mc,
                                             std::uint64_t seed);

// Matched conditional samples at a fixed x, for the shared-conditional check.
std::vector<double> sample_conditional(const SyntheticModel& model, std::span<const double> x,
                                       std::size_t count, std::uint64_t seed);

double ks_distance(const std::function<double(double)>& cdf_a,
                   const std::function<double(double)>& cdf_b, std::span<const double> grid);

}  // namespace condmix
