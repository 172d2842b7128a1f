#include "condmix/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "condmix/errors.hpp"
#include "condmix/util.hpp"

namespace condmix {

namespace {

constexpr double kMixtureCenter = 0.35;
constexpr double kMixtureStd = 0.3;
constexpr double kMeasuredBox = 0.8;
constexpr double kSqrt3 = 1.7320508075688772;

// Stream ids per logical purpose; sizes stay independent across purposes.
enum Stream : std::uint64_t {
  kStreamMeasured = 1,
  kStreamSimulated = 2,
  kStreamContamination = 3,
};

void draw_measured_covariates(const SyntheticModel& model, CounterRng& rng,
                              std::span<double> x) {
  for (;;) {
    const double center = rng.uniform01() < 0.5 ? -kMixtureCenter : kMixtureCenter;
    bool inside = true;
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = center + kMixtureStd * rng.normal();
      if (std::abs(x[j]) > kMeasuredBox) inside = false;
    }
    if (inside) return;
  }
  (void)model;
}

void draw_simulated_covariates(CounterRng& rng, std::span<double> x) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = 2.0 * rng.uniform01() - 1.0;
}

std::vector<std::string> covariate_names(std::size_t d) {
  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

}  // namespace

double SyntheticModel::cond_mean(std::span<const double> x) const {
  return mean_scale * (x[0] + 0.5 * x[1] * x[1] + std::sin(std::numbers::pi * x[2]));
}

double SyntheticModel::cond_scale(std::span<const double> x) const {
  return scale_base * (1.0 + scale_slope * std::abs(x[3]));
}

double SyntheticModel::draw_noise(CounterRng& rng) const {
  return noise == NoiseFamily::Gaussian ? rng.normal() : rng.gumbel_centered();
}

double SyntheticModel::noise_variance() const noexcept {
  return noise == NoiseFamily::Gaussian
             ? 1.0
             : std::numbers::pi * std::numbers::pi / 6.0;
}

double SyntheticModel::noise_median() const noexcept {
  return noise == NoiseFamily::Gaussian ? 0.0
                                        : -std::log(std::log(2.0)) - kEulerGamma;
}

double SyntheticModel::draw_conditional(std::span<const double> x, CounterRng& rng) const {
  return cond_mean(x) + cond_scale(x) * draw_noise(rng);
}

GeneratedData generate(const SyntheticModel& model, std::size_t n_measured,
                       std::size_t m_simulated) {
  if (model.d < 4) raise(Errc::InvalidArgument, "model needs d >= 4");
  if (n_measured == 0 || m_simulated == 0)
    raise(Errc::InvalidArgument, "sample sizes must be >= 1");
  if (!(model.contamination_fraction >= 0.0 && model.contamination_fraction < 1.0))
    raise(Errc::InvalidArgument, "contamination fraction must lie in [0,1)");

  const std::size_t d = model.d;
  const auto names = covariate_names(d);

  CounterRng rng_meas(model.seed, kStreamMeasured);
  CounterRng rng_sim(model.seed, kStreamSimulated);
  CounterRng rng_cont(model.seed, kStreamContamination);

  const auto n_cont = static_cast<std::size_t>(
      std::floor(model.contamination_fraction * static_cast<double>(n_measured)));

  std::vector<double> xm(n_measured * d);
  std::vector<double> ym(n_measured);
  std::vector<char> contaminated(n_measured, 0);
  for (std::size_t i = 0; i < n_measured; ++i) {
    std::span<double> row{xm.data() + i * d, d};
    if (i < n_cont) {
      // Planted support violation: one coordinate pushed past the simulated
      // box by about contamination_distance whitened units (simulated
      // coordinates have std 1/sqrt(3), so raw offsets shrink by sqrt(3)).
      for (std::size_t j = 0; j < d; ++j)
        row[j] = kMeasuredBox * (2.0 * rng_cont.uniform01() - 1.0);
      const std::size_t axis = static_cast<std::size_t>(rng_cont.uniform_below(d));
      const double sign = rng_cont.uniform01() < 0.5 ? -1.0 : 1.0;
      const double reach = model.contamination_distance + 3.0 * rng_cont.uniform01();
      row[axis] = sign * (1.0 + reach / kSqrt3);
      contaminated[i] = 1;
      ym[i] = model.draw_conditional(row, rng_cont);
    } else {
      draw_measured_covariates(model, rng_meas, row);
      ym[i] = model.draw_conditional(row, rng_meas);
    }
  }

  std::vector<double> xs(m_simulated * d);
  std::vector<double> ys(m_simulated);
  for (std::size_t i = 0; i < m_simulated; ++i) {
    std::span<double> row{xs.data() + i * d, d};
    draw_simulated_covariates(rng_sim, row);
    ys[i] = model.draw_conditional(row, rng_sim);
  }

  return GeneratedData{
      Dataset(names, std::move(xm), n_measured, d, std::nullopt, Origin::Measured),
      std::move(ym), std::move(contaminated),
      Dataset(names, std::move(xs), m_simulated, d, std::move(ys), Origin::Simulated)};
}

CdfEstimate true_cdf(const SyntheticModel& model, double t, std::size_t n_mc,
                     std::uint64_t seed) {
  if (n_mc < 10000) raise(Errc::InvalidArgument, "oracle needs n_mc >= 10^4");
  CounterRng rng(seed, 101);
  std::vector<double> x(model.d);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    draw_measured_covariates(model, rng, x);
    hits += model.draw_conditional(x, rng) <= t;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_mc);
  return CdfEstimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_mc))};
}

std::vector<double> sample_response_marginal(const SyntheticModel& model, std::size_t n_mc,
                                             std::uint64_t seed) {
  CounterRng rng(seed, 102);
  std::vector<double> x(model.d);
  std::vector<double> out(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    draw_measured_covariates(model, rng, x);
    out[i] = model.draw_conditional(x, rng);
  }
  return out;
}

std::vector<double> sample_cond_mean_marginal(const SyntheticModel& model, std::size_t n_mc,
                                              std::uint64_t seed) {
  CounterRng rng(seed, 103);
  std::vector<double> x(model.d);
  std::vector<double> out(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    draw_measured_covariates(model, rng, x);
    out[i] = model.cond_mean(x);
  }
  return out;
}

std::vector<double> sample_cond_var_marginal(const SyntheticModel& model, std::size_t n_mc,
                                             std::uint64_t seed) {
  CounterRng rng(seed, 104);
  std::vector<double> x(model.d);
  std::vector<double> out(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    draw_measured_covariates(model, rng, x);
    const double s = model.cond_scale(x);
    out[i] = s * s * model.noise_variance();
  }
  return out;
}

std::vector<double> sample_conditional(const SyntheticModel& model, std::span<const double> x,
                                       std::size_t count, std::uint64_t seed) {
  CounterRng rng(seed, 105);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = model.draw_conditional(x, rng);
  return out;
}

double ks_distance(const std::function<double(double)>& cdf_a,
                   const std::function<double(double)>& cdf_b, std::span<const double> grid) {
  if (grid.empty()) raise(Errc::EmptyGrid, "KS distance needs a nonempty grid");
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, std::abs(cdf_a(t) - cdf_b(t)));
  return worst;
}

}  // namespace condmix
