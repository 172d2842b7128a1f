#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace condmix {

// Synthetic-oracle benchmark battery. Every function is deterministic given
// its config, thread-count independent, and uses Monte-Carlo oracles that are
// independent of the estimation path they check.

struct RecoveryConfig {
  std::size_t n_measured = 5000;
  std::size_t m_simulated = 20000;
  std::size_t k_neighbors = 10;
  std::size_t k_grid = 64;
  int n_trees = 200;
  std::size_t n_mc = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct RecoveryResult {
  double knn_ks = 0.0;
  double forest_ks = 0.0;       // over the sub-deficit range t <= last threshold
  double forest_alpha_max = 0.0;
  double forest_deficit = 0.0;
  double elapsed_seconds = 0.0; // never written into reports
};

RecoveryResult bench_surrogate_recovery(const RecoveryConfig& cfg);

// Tail quantiles are evaluated at the application-scale dataset size, where
// the estimator's sampling noise at the 99.5% level sits well inside the
// tolerance; errors are measured in units of the oracle response std.
struct TailQuantileConfig {
  std::size_t n_measured = 18000;
  std::size_t m_simulated = 50000;
  std::size_t k_neighbors = 10;
  std::size_t n_mc = 1000000;
  int n_seeds = 5;
  std::uint64_t base_seed = 1;
  unsigned threads = 1;
  std::vector<double> levels = {0.95, 0.99, 0.995};
  double tolerance = 0.10;  // in standardized response units
};

struct TailQuantileResult {
  double sigma_y = 0.0;                        // oracle marginal std
  std::vector<double> oracle_quantiles;        // per level
  std::vector<std::vector<double>> std_errors; // [seed][level], |dq| / sigma_y
  std::vector<int> passes_per_level;
};

TailQuantileResult bench_tail_quantiles(const TailQuantileConfig& cfg);

struct VarianceConfig {
  std::size_t n_measured = 8000;
  std::size_t m_simulated = 40000;
  std::size_t k_neighbors = 64;
  std::size_t n_mc = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double scale_base = 0.5;  // heteroscedastic scale keeps E[Var(Y|X)] >= 0.2 Var(Y)
};

struct VarianceResult {
  double baseline_variance = 0.0;   // regression-imputation surrogate
  double surrogate_variance = 0.0;  // full kNN surrogate, sigma = 0
  double var_cond_mean = 0.0;       // Var(g(X)), Monte Carlo
  double mean_cond_variance = 0.0;  // E[Var(Y|X)], Monte Carlo
  double oracle_variance = 0.0;     // Var(Y), Monte Carlo
  double cond_var_share = 0.0;      // E[Var(Y|X)] / Var(Y)
};

VarianceResult bench_variance_deficit(const VarianceConfig& cfg);

struct SelectorResult {
  int kink_trials = 0;
  int kink_hits = 0;
  int integral_trials = 0;
  double max_rel_err = 0.0;  // closed form vs trapezoid oracle
};

SelectorResult bench_threshold_selector(int n_trials, std::uint64_t seed);

// Trapezoid integration of |f - f_tau| at step 1e-3, refined at sign changes
// so the piecewise-linear integrand is captured exactly. Test oracle only;
// shares no code with the closed-form integral.
double trapezoid_l1_oracle(const std::vector<double>& sorted_distances, std::size_t tau);

struct NeighborOracleResult {
  int configs = 0;
  int mismatches = 0;
};

NeighborOracleResult bench_neighbor_oracle(int configs, std::uint64_t seed);

struct ForestCheckResult {
  bool prior_exact = false;
  bool stump_onehot = false;
  bool cumsum_exact = false;
  bool permutation_invariant = false;
  int monotone_trials = 0;
  int monotone_ok = 0;
  double oob_accuracy = 0.0;
};

ForestCheckResult bench_forest_checks(int monotone_trials, std::uint64_t seed);

struct ClosedFormResult {
  double silverman_rel_err = 0.0;
  double gumbel_abs_err = 0.0;
};

ClosedFormResult bench_closed_form();

struct ScreeningRecallConfig {
  int trials = 20;
  std::size_t n_measured = 2000;
  std::size_t m_simulated = 8000;
  std::size_t k_neighbors = 10;
  double contamination_fraction = 0.05;
  double contamination_distance = 6.0;  // >= 5 whitened units with margin
  std::uint64_t base_seed = 1;
  unsigned threads = 1;
};

struct ScreeningRecallResult {
  int trials = 0;
  double min_recall = 0.0;
  double max_fpr = 0.0;
  std::vector<double> recalls;
  std::vector<double> fprs;
};

ScreeningRecallResult bench_screening_recall(const ScreeningRecallConfig& cfg);

}  // namespace condmix
