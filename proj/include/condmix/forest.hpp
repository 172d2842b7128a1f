#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "condmix/mixture.hpp"

namespace condmix {

// Strictly increasing response thresholds; class c(y) counts how many of them
// y strictly exceeds, so classes live in {0, ..., size()}.
struct ThresholdGrid {
  std::vector<double> alphas;

  std::size_t size() const noexcept { return alphas.size(); }
};

ThresholdGrid validate_grid(std::vector<double> alphas);

// Empirical quantiles of `responses` at levels (i - 0.5)/k_grid, deduplicated.
ThresholdGrid make_quantile_grid(std::span<const double> responses, std::size_t k_grid);

std::vector<int> discretize_targets(std::span<const double> y, const ThresholdGrid& grid);

struct ForestHyper {
  int n_trees = 200;
  int max_depth = -1;  // -1 = unlimited
  int min_leaf = 5;
  int mtry = 0;        // features per split; 0 = ceil(sqrt(d))
  bool bootstrap = true;  // false trains every tree on the full sample (test hook)
};

struct Tree {
  struct Node {
    double threshold = 0.0;
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf_begin = 0;  // slice of leaf_counts for leaves
    std::int32_t leaf_end = 0;
  };
  std::vector<Node> nodes;  // nodes[0] is the root
  // Sparse per-leaf class counts: (class id, count), ascending class id.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> leaf_counts;
};

// From-scratch random forest classifier with soft voting. Fully deterministic:
// training rows are put into a canonical order (lexicographic by covariates,
// then class) so fitted predictions do not depend on input row order, and each
// tree draws from its own counter-based stream keyed by (seed, tree id), so
// parallel training equals sequential training bit for bit.
struct Forest {
  ForestHyper hyper;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  int n_classes = 0;
  std::vector<Tree> trees;
  std::vector<std::uint32_t> canonical_rows;   // original row per canonical slot
  std::vector<std::vector<bool>> inbag;        // per tree, over canonical slots
};

Forest fit_forest(std::span<const double> x_row_major, std::size_t rows, std::size_t dim,
                  std::span<const int> classes, int n_classes, const ForestHyper& hyper,
                  std::uint64_t seed, unsigned threads = 1);

// Average of per-tree leaf class-frequency vectors; entries in [0,1], sums to 1.
std::vector<double> predict_class_probs(const Forest& forest, std::span<const double> x);

// Smoothed CDF estimate at x: component mean alpha_j carries weight p_{j-1}(x);
// the mass p_k(x) beyond the last threshold stays an explicit tail deficit.
MixtureDistribution forest_conditional_cdf(const Forest& forest, const ThresholdGrid& grid,
                                           std::span<const double> x, double sigma);

// Majority-vote accuracy over out-of-bag trees; rows never out of bag are skipped.
double oob_accuracy(const Forest& forest, std::span<const double> x_row_major,
                    std::size_t rows, std::span<const int> classes);

std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);

}  // namespace condmix
