#include "condmix/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "condmix/errors.hpp"
#include "condmix/rng.hpp"
#include "condmix/util.hpp"

namespace condmix {

ThresholdGrid validate_grid(std::vector<double> alphas) {
  if (alphas.empty()) raise(Errc::EmptyGrid, "threshold grid needs at least one point");
  for (std::size_t i = 0; i + 1 < alphas.size(); ++i)
    if (!(alphas[i] < alphas[i + 1]))
      raise(Errc::NotSorted, "threshold grid must be strictly increasing");
  for (double a : alphas)
    if (!std::isfinite(a)) raise(Errc::NonFiniteValue, "threshold grid entry is not finite");
  return ThresholdGrid{std::move(alphas)};
}

ThresholdGrid make_quantile_grid(std::span<const double> responses, std::size_t k_grid) {
  if (responses.empty()) raise(Errc::EmptyList, "no responses to build a grid from");
  if (k_grid == 0) raise(Errc::InvalidArgument, "grid size must be >= 1");
  std::vector<double> sorted(responses.begin(), responses.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());

  std::vector<double> alphas;
  alphas.reserve(k_grid);
  for (std::size_t i = 1; i <= k_grid; ++i) {
    const double level = (static_cast<double>(i) - 0.5) / static_cast<double>(k_grid);
    const auto rank = static_cast<std::size_t>(std::max(
        0.0, std::ceil(level * m) - 1.0));
    const double q = sorted[std::min(rank, sorted.size() - 1)];
    if (alphas.empty() || q > alphas.back()) alphas.push_back(q);
  }
  return validate_grid(std::move(alphas));
}

std::vector<int> discretize_targets(std::span<const double> y, const ThresholdGrid& grid) {
  std::vector<int> classes(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Number of thresholds strictly below y (strict '>' per the class definition).
    const auto it = std::lower_bound(grid.alphas.begin(), grid.alphas.end(), y[i]);
    classes[i] = static_cast<int>(it - grid.alphas.begin());
  }
  return classes;
}

namespace {

using i128 = __int128;

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  std::int64_t score_num = 0;  // score = num/den = sq_l/n_l + sq_r/n_r
  std::int64_t score_den = 1;
};

// Exact rational comparison keeps split selection and its ties
// platform-independent. Valid while node sizes stay below ~2.5e5.
bool better_score(std::int64_t num_a, std::int64_t den_a, std::int64_t num_b,
                  std::int64_t den_b) {
  return static_cast<i128>(num_a) * den_b > static_cast<i128>(num_b) * den_a;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const double> x, std::size_t dim, std::span<const int> classes,
              int n_classes, const ForestHyper& hyper)
      : x_(x), dim_(dim), classes_(classes), n_classes_(n_classes), hyper_(hyper) {}

  Tree build(CounterRng& rng, std::vector<std::uint32_t> sample) {
    Tree tree;
    counts_.assign(static_cast<std::size_t>(n_classes_), 0);
    left_counts_.assign(static_cast<std::size_t>(n_classes_), 0);
    feature_pool_.resize(dim_);
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);

    ids_ = std::move(sample);
    sorted_.resize(ids_.size());

    tree.nodes.emplace_back();
    struct Work {
      std::int32_t node;
      std::uint32_t begin;
      std::uint32_t end;
      std::int32_t depth;
    };
    std::vector<Work> stack;
    stack.push_back({0, 0, static_cast<std::uint32_t>(ids_.size()), 0});

    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const std::uint32_t size = w.end - w.begin;

      std::fill(counts_.begin(), counts_.end(), 0);
      for (std::uint32_t i = w.begin; i < w.end; ++i)
        ++counts_[static_cast<std::size_t>(classes_[ids_[i]])];
      std::int64_t sq_parent = 0;
      int present = 0;
      for (std::int64_t c : counts_) {
        sq_parent += c * c;
        present += c > 0;
      }

      const bool depth_capped = hyper_.max_depth >= 0 && w.depth >= hyper_.max_depth;
      SplitChoice best;
      if (!depth_capped && present > 1 &&
          size >= 2 * static_cast<std::uint32_t>(hyper_.min_leaf))
        best = find_split(rng, w.begin, w.end, sq_parent);

      if (!best.found) {
        make_leaf(tree, w.node);
        continue;
      }

      const auto mid_it = std::partition(
          ids_.begin() + w.begin, ids_.begin() + w.end, [&](std::uint32_t id) {
            return x_[id * dim_ + static_cast<std::size_t>(best.feature)] <= best.threshold;
          });
      const auto mid = static_cast<std::uint32_t>(mid_it - ids_.begin());

      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      const auto right_id = left_id + 1;
      {
        Tree::Node& node = tree.nodes[static_cast<std::size_t>(w.node)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
      }
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      // Right pushed first so the left child is processed next (DFS order fixes
      // the per-node RNG consumption sequence).
      stack.push_back({right_id, mid, w.end, w.depth + 1});
      stack.push_back({left_id, w.begin, mid, w.depth + 1});
    }
    return tree;
  }

 private:
  void make_leaf(Tree& tree, std::int32_t node_id) {
    Tree::Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = -1;
    node.leaf_begin = static_cast<std::int32_t>(tree.leaf_counts.size());
    for (std::size_t c = 0; c < counts_.size(); ++c)
      if (counts_[c] > 0)
        tree.leaf_counts.emplace_back(static_cast<std::uint32_t>(c),
                                      static_cast<std::uint32_t>(counts_[c]));
    node.leaf_end = static_cast<std::int32_t>(tree.leaf_counts.size());
  }

  SplitChoice find_split(CounterRng& rng, std::uint32_t begin, std::uint32_t end,
                         std::int64_t sq_parent) {
    const std::int64_t n = end - begin;
    const int mtry = hyper_.mtry > 0
                         ? std::min<int>(hyper_.mtry, static_cast<int>(dim_))
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim_))));

    // mtry distinct features without replacement (partial Fisher-Yates),
    // iterated in ascending order for reproducible tie handling.
    for (int i = 0; i < mtry; ++i) {
      const auto j = i + static_cast<int>(rng.uniform_below(dim_ - static_cast<std::size_t>(i)));
      std::swap(feature_pool_[static_cast<std::size_t>(i)],
                feature_pool_[static_cast<std::size_t>(j)]);
    }
    chosen_.assign(feature_pool_.begin(), feature_pool_.begin() + mtry);
    std::sort(chosen_.begin(), chosen_.end());

    SplitChoice best;
    for (int feature : chosen_) {
      auto* sorted = sorted_.data();
      std::size_t s = 0;
      for (std::uint32_t i = begin; i < end; ++i) sorted[s++] = ids_[i];
      const std::size_t f = static_cast<std::size_t>(feature);
      std::sort(sorted, sorted + s, [&](std::uint32_t a, std::uint32_t b) {
        const double va = x_[a * dim_ + f];
        const double vb = x_[b * dim_ + f];
        return va < vb || (va == vb && a < b);
      });

      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      std::int64_t sq_left = 0;
      std::int64_t sq_right = sq_parent;
      std::int64_t n_left = 0;

      for (std::size_t i = 0; i + 1 < s; ++i) {
        const auto cls = static_cast<std::size_t>(classes_[sorted[i]]);
        sq_left += 2 * left_counts_[cls] + 1;
        sq_right -= 2 * counts_rem(cls) - 1;
        ++left_counts_[cls];
        ++n_left;

        const double lo = x_[sorted[i] * dim_ + f];
        const double hi = x_[sorted[i + 1] * dim_ + f];
        if (lo == hi) continue;
        const std::int64_t n_right = n - n_left;
        if (n_left < hyper_.min_leaf || n_right < hyper_.min_leaf) continue;

        double threshold = 0.5 * (lo + hi);
        if (!(threshold < hi)) threshold = lo;  // midpoint collapsed onto hi

        const std::int64_t num = sq_left * n_right + sq_right * n_left;
        const std::int64_t den = n_left * n_right;
        // Candidate must strictly reduce Gini: num/den > sq_parent/n.
        if (!(static_cast<i128>(num) * n > static_cast<i128>(sq_parent) * den)) continue;
        if (!best.found || better_score(num, den, best.score_num, best.score_den)) {
          best.found = true;
          best.feature = feature;
          best.threshold = threshold;
          best.score_num = num;
          best.score_den = den;
        }
      }
    }
    return best;
  }

  // Remaining (right-side) count for a class during the sweep.
  std::int64_t counts_rem(std::size_t cls) const {
    return counts_[cls] - left_counts_[cls];
  }

  std::span<const double> x_;
  std::size_t dim_;
  std::span<const int> classes_;
  int n_classes_;
  ForestHyper hyper_;

  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> sorted_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> left_counts_;
  std::vector<int> feature_pool_;
  std::vector<int> chosen_;
};

}  // namespace

Forest fit_forest(std::span<const double> x_row_major, std::size_t rows, std::size_t dim,
                  std::span<const int> classes, int n_classes, const ForestHyper& hyper,
                  std::uint64_t seed, unsigned threads) {
  if (rows < 2) raise(Errc::EmptyTraining, "forest needs at least 2 training rows");
  if (dim == 0 || x_row_major.size() != rows * dim)
    raise(Errc::DimensionMismatch, "training matrix shape mismatch");
  if (classes.size() != rows) raise(Errc::DimensionMismatch, "class vector length mismatch");
  if (n_classes < 1) raise(Errc::InvalidArgument, "need at least one class");
  if (hyper.n_trees < 1 || hyper.min_leaf < 1)
    raise(Errc::InvalidArgument, "n_trees and min_leaf must be >= 1");
  if (rows > 250000)
    raise(Errc::InvalidArgument, "exact split scoring supports at most 250000 rows");
  for (int c : classes)
    if (c < 0 || c >= n_classes)
      raise(Errc::ClassOutOfRange, "class " + std::to_string(c) + " outside [0, " +
                                       std::to_string(n_classes) + ")");

  Forest forest;
  forest.hyper = hyper;
  forest.seed = seed;
  forest.dim = dim;
  forest.n_classes = n_classes;

  // Canonical row order: the fitted forest depends on the training multiset,
  // not on how the rows happened to be listed.
  forest.canonical_rows.resize(rows);
  std::iota(forest.canonical_rows.begin(), forest.canonical_rows.end(), 0u);
  std::sort(forest.canonical_rows.begin(), forest.canonical_rows.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              for (std::size_t j = 0; j < dim; ++j) {
                const double va = x_row_major[a * dim + j];
                const double vb = x_row_major[b * dim + j];
                if (va != vb) return va < vb;
              }
              return classes[a] < classes[b];
            });

  std::vector<double> xc(rows * dim);
  std::vector<int> cc(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint32_t src = forest.canonical_rows[i];
    std::copy_n(x_row_major.data() + src * dim, dim, xc.data() + i * dim);
    cc[i] = classes[src];
  }

  forest.trees.resize(static_cast<std::size_t>(hyper.n_trees));
  forest.inbag.assign(static_cast<std::size_t>(hyper.n_trees),
                      std::vector<bool>(rows, false));

  parallel_for(static_cast<std::size_t>(hyper.n_trees), threads,
               [&](std::size_t t0, std::size_t t1) {
                 TreeBuilder builder(xc, dim, cc, n_classes, hyper);
                 for (std::size_t t = t0; t < t1; ++t) {
                   CounterRng rng(seed, t);
                   std::vector<std::uint32_t> sample(rows);
                   if (hyper.bootstrap) {
                     for (auto& id : sample) {
                       id = static_cast<std::uint32_t>(rng.uniform_below(rows));
                       forest.inbag[t][id] = true;
                     }
                   } else {
                     std::iota(sample.begin(), sample.end(), 0u);
                     forest.inbag[t].assign(rows, true);
                   }
                   forest.trees[t] = builder.build(rng, std::move(sample));
                 }
               });
  return forest;
}

namespace {

const Tree::Node& descend(const Tree& tree, std::span<const double> x) {
  const Tree::Node* node = &tree.nodes[0];
  while (node->feature >= 0) {
    const double v = x[static_cast<std::size_t>(node->feature)];
    node = &tree.nodes[static_cast<std::size_t>(v <= node->threshold ? node->left
                                                                     : node->right)];
  }
  return *node;
}

void add_leaf_probs(const Tree& tree, const Tree::Node& leaf, std::vector<double>& probs) {
  std::int64_t total = 0;
  for (std::int32_t i = leaf.leaf_begin; i < leaf.leaf_end; ++i)
    total += tree.leaf_counts[static_cast<std::size_t>(i)].second;
  for (std::int32_t i = leaf.leaf_begin; i < leaf.leaf_end; ++i) {
    const auto& [cls, count] = tree.leaf_counts[static_cast<std::size_t>(i)];
    probs[cls] += static_cast<double>(count) / static_cast<double>(total);
  }
}

}  // namespace

std::vector<double> predict_class_probs(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.dim) raise(Errc::DimensionMismatch, "query dimension mismatch");
  std::vector<double> probs(static_cast<std::size_t>(forest.n_classes), 0.0);
  for (const Tree& tree : forest.trees) add_leaf_probs(tree, descend(tree, x), probs);
  const double inv = 1.0 / static_cast<double>(forest.trees.size());
  for (double& p : probs) p *= inv;
  return probs;
}

MixtureDistribution forest_conditional_cdf(const Forest& forest, const ThresholdGrid& grid,
                                           std::span<const double> x, double sigma) {
  if (grid.size() + 1 != static_cast<std::size_t>(forest.n_classes))
    raise(Errc::DimensionMismatch, "grid size does not match forest classes");
  std::vector<double> probs = predict_class_probs(forest, x);
  const double deficit = probs.back();
  probs.pop_back();
  return MixtureDistribution(grid.alphas, std::move(probs), sigma, deficit);
}

double oob_accuracy(const Forest& forest, std::span<const double> x_row_major,
                    std::size_t rows, std::span<const int> classes) {
  if (x_row_major.size() != rows * forest.dim || classes.size() != rows)
    raise(Errc::DimensionMismatch, "training data shape mismatch");
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::vector<double> probs(static_cast<std::size_t>(forest.n_classes));
  for (std::size_t slot = 0; slot < rows; ++slot) {
    const std::uint32_t row = forest.canonical_rows[slot];
    std::fill(probs.begin(), probs.end(), 0.0);
    std::size_t used = 0;
    const std::span<const double> x{x_row_major.data() + row * forest.dim, forest.dim};
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      if (forest.inbag[t][slot]) continue;
      add_leaf_probs(forest.trees[t], descend(forest.trees[t], x), probs);
      ++used;
    }
    if (used == 0) continue;
    const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
    ++evaluated;
    correct += static_cast<long>(classes[row]) == best;
  }
  if (evaluated == 0) raise(Errc::EmptyTraining, "no out-of-bag rows to score");
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

std::string forest_to_json(const Forest& forest) {
  nlohmann::json doc;
  doc["format"] = "condmix-forest";
  doc["version"] = 1;
  doc["dim"] = forest.dim;
  doc["n_classes"] = forest.n_classes;
  doc["seed"] = forest.seed;
  doc["hyper"] = {{"n_trees", forest.hyper.n_trees},
                  {"max_depth", forest.hyper.max_depth},
                  {"min_leaf", forest.hyper.min_leaf},
                  {"mtry", forest.hyper.mtry},
                  {"bootstrap", forest.hyper.bootstrap}};
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : forest.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_begin, n.leaf_end});
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [cls, count] : tree.leaf_counts) counts.push_back({cls, count});
    trees.push_back({{"nodes", std::move(nodes)}, {"leaf_counts", std::move(counts)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

Forest forest_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "condmix-forest" || doc.value("version", 0) != 1)
    raise(Errc::InvalidArgument, "not a condmix-forest v1 model file");

  Forest forest;
  forest.dim = doc.at("dim").get<std::size_t>();
  forest.n_classes = doc.at("n_classes").get<int>();
  forest.seed = doc.at("seed").get<std::uint64_t>();
  const auto& h = doc.at("hyper");
  forest.hyper.n_trees = h.at("n_trees").get<int>();
  forest.hyper.max_depth = h.at("max_depth").get<int>();
  forest.hyper.min_leaf = h.at("min_leaf").get<int>();
  forest.hyper.mtry = h.at("mtry").get<int>();
  forest.hyper.bootstrap = h.at("bootstrap").get<bool>();

  for (const auto& jt : doc.at("trees")) {
    Tree tree;
    for (const auto& jn : jt.at("nodes")) {
      Tree::Node n;
      n.feature = jn.at(0).get<std::int32_t>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<std::int32_t>();
      n.right = jn.at(3).get<std::int32_t>();
      n.leaf_begin = jn.at(4).get<std::int32_t>();
      n.leaf_end = jn.at(5).get<std::int32_t>();
      tree.nodes.push_back(n);
    }
    for (const auto& jc : jt.at("leaf_counts"))
      tree.leaf_counts.emplace_back(jc.at(0).get<std::uint32_t>(),
                                    jc.at(1).get<std::uint32_t>());
    forest.trees.push_back(std::move(tree));
  }
  if (forest.trees.empty()) raise(Errc::InvalidArgument, "model file carries no trees");
  return forest;
}

}  // namespace condmix
