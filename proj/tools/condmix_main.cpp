// condmix command-line pipeline:
//   synth -> trim -> screen -> estimate / quantiles, plus the validate benchmark.
// Every output file is stamped with the run-manifest digest and a provenance
// tag; estimate refuses measured inputs that skipped screening unless told so.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "condmix/benchmark.hpp"
#include "condmix/csv.hpp"
#include "condmix/dataset.hpp"
#include "condmix/errors.hpp"
#include "condmix/forest.hpp"
#include "condmix/knn.hpp"
#include "condmix/manifest.hpp"
#include "condmix/metric.hpp"
#include "condmix/screening.hpp"
#include "condmix/surrogate.hpp"
#include "condmix/synthbench.hpp"
#include "condmix/util.hpp"
#include "condmix/version.hpp"

namespace {

using namespace condmix;

constexpr const char* kEvalOnlyTag = ".evalonly.";

void refuse_eval_only(const std::string& path) {
  if (path.find(kEvalOnlyTag) != std::string::npos)
    raise(Errc::InvalidArgument,
          "'" + path + "' is an evaluation-only file; the estimation pipeline must not read it");
}

std::optional<std::string> comment_value(const RawTable& table, const std::string& key) {
  const std::string prefix = "# " + key + ":";
  for (const auto& line : table.comments) {
    if (line.rfind(prefix, 0) == 0) {
      std::string value = line.substr(prefix.size());
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      return value;
    }
  }
  return std::nullopt;
}

struct LoadedDataset {
  Dataset data;
  RawTable raw;
};

// Validates a covariate CSV; the response column is split off when present.
LoadedDataset load_dataset(const std::string& path, Origin origin,
                           const std::string& response_col, bool require_y,
                           RunManifest& manifest, const std::string& role) {
  refuse_eval_only(path);
  const std::string content = read_file(path);
  manifest.add_input(role, path, content);
  RawTable raw = parse_csv(content);
  const bool has_response =
      std::find(raw.header.begin(), raw.header.end(), response_col) != raw.header.end();
  if (require_y && !has_response)
    raise(Errc::MissingResponse, "'" + path + "' has no '" + response_col + "' column");
  Dataset data = validate_dataset(
      raw, origin, has_response ? std::optional<std::string>(response_col) : std::nullopt);
  return LoadedDataset{std::move(data), std::move(raw)};
}

MetricKind parse_metric(const std::string& name) {
  if (name == "euclidean") return MetricKind::Euclidean;
  if (name == "mahalanobis") return MetricKind::Mahalanobis;
  raise(Errc::InvalidArgument, "unknown metric '" + name + "'");
}

SigmaPolicy parse_sigma(const std::string& text) {
  if (text == "silverman") return SigmaPolicy::silverman();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v) && v >= 0.0) return SigmaPolicy::fixed(v);
  } catch (const std::exception&) {
  }
  raise(Errc::InvalidArgument, "--sigma must be a number >= 0 or 'silverman'");
}

void write_screening_report(const std::string& path, const ScreeningReport& report,
                            const RunManifest& manifest) {
  std::vector<std::size_t> rank(report.avg_distances.size());
  for (std::size_t r = 0; r < report.sorted_order.size(); ++r)
    rank[report.sorted_order[r]] = r + 1;

  std::vector<std::vector<std::string>> rows;
  rows.reserve(report.avg_distances.size());
  for (std::size_t i = 0; i < report.avg_distances.size(); ++i)
    rows.push_back({std::to_string(i), format_double(report.avg_distances[i]),
                    std::to_string(rank[i]), report.outlier_flags[i] ? "1" : "0"});
  write_file(path, table_to_csv({manifest.digest_comment()},
                                {"row_id", "avg_distance", "rank", "flagged"}, rows));
}

void write_l1_curve(const std::string& path, const ThresholdSelection& sel,
                    const RunManifest& manifest) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(sel.normalized_l1.size());
  for (std::size_t i = 0; i < sel.normalized_l1.size(); ++i)
    rows.push_back({std::to_string(i + ThresholdSelection::kTauMin),
                    format_double(sel.normalized_l1[i])});
  write_file(path,
             table_to_csv({manifest.digest_comment()}, {"tau", "normalized_l1"}, rows));
}

void maybe_write_manifest(const std::string& path, const RunManifest& manifest) {
  if (!path.empty()) write_file(path, manifest.dump());
}

// Row subsets can legitimately be empty (e.g. no outliers under an override);
// those become header-only files.
void write_subset_csv(const std::string& path, const Dataset& data,
                      const std::vector<std::size_t>& rows,
                      const std::vector<std::string>& comments,
                      const std::string& response_name) {
  if (rows.empty()) {
    std::vector<std::string> header = data.column_names();
    if (data.has_y()) header.push_back(response_name);
    write_file(path, table_to_csv(comments, header, {}));
    return;
  }
  write_file(path, dataset_to_csv(data.select_rows(rows), comments, true, response_name));
}

std::string quantile_cell(const SurrogateDistribution& dist, double level) {
  try {
    return format_double(dist.quantile(level));
  } catch (const Error& e) {
    if (e.code() == Errc::LevelBeyondDeficit) return "na";
    throw;
  }
}

std::vector<double> curve_grid(const SurrogateDistribution& dist, std::size_t points) {
  const double lo = dist.mixture.min_mean();
  const double hi = dist.mixture.max_mean();
  const double pad = 0.05 * std::max(hi - lo, 1e-6) + 4.0 * dist.mixture.sigma();
  return linspace(lo - pad, hi + pad, points);
}

void write_curves(const SurrogateDistribution& dist, const std::string& cdf_path,
                  const std::string& gumbel_path, std::size_t points,
                  const RunManifest& manifest) {
  if (cdf_path.empty() && gumbel_path.empty()) return;
  const auto grid = curve_grid(dist, points);
  // The CDF tops out at 1 - deficit; the ceiling rides along as a comment.
  const std::vector<std::string> comments = {
      manifest.digest_comment(), "# tail_deficit: " + format_double(dist.deficit())};
  if (!cdf_path.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : cdf_curve(dist, grid))
      rows.push_back({format_double(pt.t), format_double(pt.value)});
    write_file(cdf_path, table_to_csv(comments, {"t", "cdf"}, rows));
  }
  if (!gumbel_path.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : gumbel_curve(dist, grid))
      rows.push_back(
          {format_double(pt.t), format_double(pt.value), pt.clipped ? "1" : "0"});
    write_file(gumbel_path,
               table_to_csv(comments, {"t", "neg_log_neg_log_cdf", "clipped"}, rows));
  }
}

std::string surrogate_to_json(const SurrogateDistribution& dist, const std::string& estimator,
                              double sigma, const RunManifest& manifest) {
  nlohmann::json doc;
  doc["format"] = "condmix-surrogate";
  doc["version"] = 1;
  doc["estimator"] = estimator;
  doc["sigma"] = sigma;
  doc["n_conditionals"] = dist.n_conditionals;
  doc["tail_deficit"] = dist.mixture.tail_deficit();
  doc["means"] = dist.mixture.means();
  doc["weights"] = dist.mixture.weights();
  doc["manifest_digest"] = manifest.digest();
  return doc.dump() + "\n";
}

// --------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out_dir;
  std::size_t n = 1000;
  std::size_t m = 4000;
  std::uint64_t seed = 1;
  std::string noise = "gumbel";
  double scale_base = 0.3;
  double scale_slope = 0.5;
  double contamination = 0.0;
  double contamination_distance = 6.0;
  std::string manifest_out;
};

int run_synth(const SynthArgs& args) {
  SyntheticModel model;
  model.seed = args.seed;
  model.noise = args.noise == "gaussian" ? NoiseFamily::Gaussian : NoiseFamily::Gumbel;
  model.scale_base = args.scale_base;
  model.scale_slope = args.scale_slope;
  model.contamination_fraction = args.contamination;
  model.contamination_distance = args.contamination_distance;

  RunManifest manifest("synth");
  manifest.set_param("n", args.n);
  manifest.set_param("m", args.m);
  manifest.set_param("seed", args.seed);
  manifest.set_param("noise", args.noise);
  manifest.set_param("scale_base", args.scale_base);
  manifest.set_param("scale_slope", args.scale_slope);
  manifest.set_param("contamination", args.contamination);
  manifest.set_param("contamination_distance", args.contamination_distance);

  const GeneratedData data = generate(model, args.n, args.m);

  std::filesystem::create_directories(args.out_dir);
  const auto in_dir = [&](const char* name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };

  const std::vector<std::string> comments = {manifest.digest_comment(),
                                             "# provenance: synth"};
  write_file(in_dir("measured.csv"), dataset_to_csv(data.measured, comments, false));
  write_file(in_dir("simulated.csv"), dataset_to_csv(data.simulated, comments, true));

  std::vector<std::vector<std::string>> rows;
  rows.reserve(args.n);
  for (std::size_t i = 0; i < args.n; ++i)
    rows.push_back({std::to_string(i), format_double(data.measured_y_eval[i]),
                    data.contaminated[i] ? "1" : "0"});
  write_file(in_dir("measured_y.evalonly.csv"),
             table_to_csv(comments, {"row_id", "y", "contaminated"}, rows));

  maybe_write_manifest(args.manifest_out, manifest);
  std::cout << "synth: wrote measured.csv (" << args.n << " rows), simulated.csv (" << args.m
            << " rows), measured_y.evalonly.csv under " << args.out_dir << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// trim

struct TrimArgs {
  std::string sim_path;
  std::string measured_path;
  std::string out;
  std::string report_out;
  std::string curve_out;
  std::size_t k = 1;
  std::string metric = "mahalanobis";
  double ridge = -1.0;
  std::optional<double> threshold_override;
  unsigned threads = 0;
  std::string manifest_out;
  std::string response_col = "y";
};

int run_trim(const TrimArgs& args) {
  RunManifest manifest("trim");
  auto sim = load_dataset(args.sim_path, Origin::Simulated, args.response_col, false,
                          manifest, "simulated");
  auto measured = load_dataset(args.measured_path, Origin::Measured, args.response_col,
                               false, manifest, "measured");
  manifest.set_param("k", args.k);
  manifest.set_param("metric", args.metric);
  manifest.set_param("ridge", args.ridge);

  const FittedMetric metric = fit_metric(sim.data, parse_metric(args.metric), args.ridge);
  const auto measured_index =
      NeighborIndex::build(metric.whiten_matrix(measured.data), measured.data.rows(),
                           measured.data.cols(), IndexBackend::Accelerated);

  const TrimResult result = trim_simulations(sim.data, metric, measured_index, args.k,
                                             args.threads, args.threshold_override);
  if (measured_index.truncated_query_count() > 0)
    std::cerr << "condmix: warning: k exceeded the indexed point count for "
              << measured_index.truncated_query_count() << " queries (truncated)\n";

  manifest.set_param("selected_tau", result.report.selection.tau);
  manifest.set_param("selected_threshold", result.report.selection.threshold);
  manifest.set_param("threshold_override", args.threshold_override.has_value());
  manifest.set_param("whitener",
                     {{"kind", args.metric},
                      {"ridge", metric.whitener.ridge},
                      {"standardizer_means", metric.standardizer.means},
                      {"standardizer_stds", metric.standardizer.stds},
                      {"cholesky", metric.whitener.chol}});

  write_subset_csv(args.out, sim.data, result.kept,
                   {manifest.digest_comment(), "# provenance: trim"}, args.response_col);
  if (!args.report_out.empty())
    write_screening_report(args.report_out, result.report, manifest);
  if (!args.curve_out.empty())
    write_l1_curve(args.curve_out, result.report.selection, manifest);
  maybe_write_manifest(args.manifest_out, manifest);

  const std::size_t discarded = sim.data.rows() - result.kept.size();
  std::cout << "trim: kept " << result.kept.size() << " of " << sim.data.rows()
            << " simulations (discarded " << discarded << "), threshold "
            << format_double(result.report.selection.threshold) << " at tau="
            << result.report.selection.tau << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// screen

struct ScreenArgs {
  std::string measured_path;
  std::string sim_path;
  std::string inliers_out;
  std::string outliers_out;
  std::string report_out;
  std::string curve_out;
  std::size_t k = 10;
  std::string metric = "mahalanobis";
  double ridge = -1.0;
  std::optional<double> threshold_override;
  bool no_screen = false;
  unsigned threads = 0;
  std::string manifest_out;
  std::string response_col = "y";
};

int run_screen(const ScreenArgs& args) {
  RunManifest manifest("screen");
  auto measured = load_dataset(args.measured_path, Origin::Measured, args.response_col,
                               false, manifest, "measured");
  auto sim = load_dataset(args.sim_path, Origin::Simulated, args.response_col, false,
                          manifest, "simulated");
  manifest.set_param("k", args.k);
  manifest.set_param("metric", args.metric);
  manifest.set_param("ridge", args.ridge);
  manifest.set_param("no_screen", args.no_screen);

  if (args.no_screen) {
    write_file(args.inliers_out,
               dataset_to_csv(measured.data,
                              {manifest.digest_comment(), "# provenance: no-screen"}, true,
                              args.response_col));
    maybe_write_manifest(args.manifest_out, manifest);
    std::cout << "screen: --no-screen, passed all " << measured.data.rows()
              << " rows through\n";
    return 0;
  }

  const FittedMetric metric = fit_metric(sim.data, parse_metric(args.metric), args.ridge);
  const auto sim_index =
      NeighborIndex::build(metric.whiten_matrix(sim.data), sim.data.rows(),
                           sim.data.cols(), IndexBackend::Accelerated);

  const ScreeningReport report = screen_outliers(measured.data, metric, sim_index, args.k,
                                                 args.threads, args.threshold_override);
  if (sim_index.truncated_query_count() > 0)
    std::cerr << "condmix: warning: k exceeded the indexed point count for "
              << sim_index.truncated_query_count() << " queries (truncated)\n";

  manifest.set_param("selected_tau", report.selection.tau);
  manifest.set_param("selected_threshold", report.selection.threshold);
  manifest.set_param("threshold_override", args.threshold_override.has_value());
  manifest.set_param("whitener",
                     {{"kind", args.metric},
                      {"ridge", metric.whitener.ridge},
                      {"standardizer_means", metric.standardizer.means},
                      {"standardizer_stds", metric.standardizer.stds},
                      {"cholesky", metric.whitener.chol}});

  std::vector<std::size_t> inliers, outliers;
  for (std::size_t i = 0; i < measured.data.rows(); ++i)
    (report.outlier_flags[i] ? outliers : inliers).push_back(i);

  write_subset_csv(args.inliers_out, measured.data, inliers,
                   {manifest.digest_comment(), "# provenance: screen"}, args.response_col);
  if (!args.outliers_out.empty())
    write_subset_csv(args.outliers_out, measured.data, outliers,
                     {manifest.digest_comment(), "# provenance: screen-outliers"},
                     args.response_col);
  if (!args.report_out.empty()) write_screening_report(args.report_out, report, manifest);
  if (!args.curve_out.empty()) write_l1_curve(args.curve_out, report.selection, manifest);
  maybe_write_manifest(args.manifest_out, manifest);

  std::cout << "screen: flagged " << outliers.size() << " of " << measured.data.rows()
            << " measurements as outliers, threshold "
            << format_double(report.selection.threshold) << " at tau="
            << report.selection.tau << (report.flat_curve ? " (flat curve: none flagged)" : "")
            << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// estimate / quantiles

void check_screening_provenance(const RawTable& raw, bool no_screen_flag,
                                const std::string& path) {
  if (no_screen_flag) return;
  const auto prov = comment_value(raw, "provenance");
  if (prov && (*prov == "screen" || *prov == "no-screen")) return;
  raise(Errc::InvalidArgument,
        "'" + path +
            "' lacks a screening provenance header; run 'condmix screen' first or pass "
            "--no-screen to accept it as-is");
}

struct EstimateArgs {
  std::string measured_path;
  std::string sim_path;
  std::string estimator = "knn";
  std::string sigma = "0";
  std::size_t k = 10;
  std::size_t grid_size = 64;
  int trees = 200;
  int min_leaf = 5;
  int mtry = 0;
  int max_depth = -1;
  std::string metric = "mahalanobis";
  double ridge = -1.0;
  std::uint64_t seed = 1;
  std::vector<double> levels = {25.0, 50.0, 75.0, 95.0, 99.0, 99.5};
  std::string quantiles_out;
  std::string cdf_out;
  std::string gumbel_out;
  std::string model_out;
  std::string forest_model_out;
  std::string forest_model_in;
  std::size_t curve_points = 512;
  bool no_screen = false;
  unsigned threads = 0;
  std::string manifest_out;
  std::string response_col = "y";
};

int run_estimate(const EstimateArgs& args) {
  RunManifest manifest("estimate");
  auto measured = load_dataset(args.measured_path, Origin::Measured, args.response_col,
                               false, manifest, "measured");
  check_screening_provenance(measured.raw, args.no_screen, args.measured_path);
  auto sim = load_dataset(args.sim_path, Origin::Simulated, args.response_col, true,
                          manifest, "simulated");

  manifest.set_param("estimator", args.estimator);
  manifest.set_param("sigma_policy", args.sigma);
  manifest.set_param("k_neighbors", args.k);
  manifest.set_param("k_grid", args.grid_size);
  manifest.set_param("n_trees", args.trees);
  manifest.set_param("min_leaf", args.min_leaf);
  manifest.set_param("mtry", args.mtry);
  manifest.set_param("max_depth", args.max_depth);
  manifest.set_param("metric", args.metric);
  manifest.set_param("ridge", args.ridge);
  manifest.set_param("seed", args.seed);
  manifest.set_param("no_screen", args.no_screen);
  manifest.set_param("levels", args.levels);

  const SigmaPolicy policy = parse_sigma(args.sigma);
  const FittedMetric metric = fit_metric(sim.data, parse_metric(args.metric), args.ridge);

  std::string label = args.estimator;
  double sigma_used = 0.0;
  std::optional<SurrogateDistribution> dist;
  std::optional<Forest> forest;

  if (args.estimator == "knn") {
    const KnnConditionalModel knn_model = fit_knn(sim.data, metric, args.k, 0.0);
    const KnnSurrogateResult result =
        knn_surrogate(knn_model, measured.data, policy, args.threads);
    sigma_used = result.sigma;
    manifest.set_param("pooled_std", result.pooled_std);
    manifest.set_param("pooled_count", result.pooled_count);
    dist = result.dist;
  } else {
    // Silverman smoothing pools the k nearest simulated responses per measured
    // row, exactly as in the kNN path; a fixed sigma is used verbatim.
    if (policy.mode == SigmaPolicy::Mode::Silverman) {
      const KnnConditionalModel knn_model = fit_knn(sim.data, metric, args.k, 0.0);
      const KnnSurrogateResult pooled =
          knn_surrogate(knn_model, measured.data, SigmaPolicy::silverman(), args.threads);
      sigma_used = pooled.sigma;
      manifest.set_param("pooled_std", pooled.pooled_std);
      manifest.set_param("pooled_count", pooled.pooled_count);
    } else {
      sigma_used = policy.value;
    }
    // The grid derives from the simulated responses, so reloading a model
    // against the same kept-sim file and grid size reproduces it; a mismatch
    // in class count is rejected below.
    const ThresholdGrid grid = make_quantile_grid(sim.data.y(), args.grid_size);
    if (!args.forest_model_in.empty()) {
      const std::string content = read_file(args.forest_model_in);
      manifest.add_input("forest_model", args.forest_model_in, content);
      forest = forest_from_json(content);
    } else {
      const auto classes = discretize_targets(sim.data.y(), grid);
      ForestHyper hyper;
      hyper.n_trees = args.trees;
      hyper.max_depth = args.max_depth;
      hyper.min_leaf = args.min_leaf;
      hyper.mtry = args.mtry;
      forest = fit_forest(sim.data.x_data(), sim.data.rows(), sim.data.cols(), classes,
                          static_cast<int>(grid.size()) + 1, hyper, args.seed,
                          args.threads);
    }
    dist = forest_surrogate(*forest, grid, measured.data, sigma_used, args.threads);
  }
  if (policy.mode == SigmaPolicy::Mode::Silverman && sigma_used == 0.0)
    std::cerr << "condmix: warning: degenerate pooled sample, bandwidth fell back to 0\n";
  if (sigma_used > 0.0) label += "_smoothed";
  manifest.set_param("sigma", sigma_used);

  // The manifest is complete from here on; all outputs carry one digest.
  if (forest && !args.forest_model_out.empty()) {
    auto doc = nlohmann::json::parse(forest_to_json(*forest));
    doc["manifest_digest"] = manifest.digest();
    write_file(args.forest_model_out, doc.dump() + "\n");
  }

  if (!args.quantiles_out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (double level_pct : args.levels)
      rows.push_back({format_double(level_pct), quantile_cell(*dist, level_pct / 100.0)});
    write_file(args.quantiles_out,
               table_to_csv({manifest.digest_comment(), "# provenance: estimate"},
                            {"level_percent", label}, rows));
  }
  write_curves(*dist, args.cdf_out, args.gumbel_out, args.curve_points, manifest);
  if (!args.model_out.empty())
    write_file(args.model_out, surrogate_to_json(*dist, args.estimator, sigma_used, manifest));
  maybe_write_manifest(args.manifest_out, manifest);

  const auto mom = dist->moments();
  std::cout << "estimate: " << label << " surrogate over " << dist->n_conditionals
            << " conditionals, sigma=" << format_double(sigma_used)
            << ", deficit=" << format_double(dist->deficit())
            << ", mean=" << format_double(mom.mean)
            << ", variance=" << format_double(mom.variance) << "\n";
  return 0;
}

struct QuantilesArgs {
  std::string measured_path;
  std::string sim_path;
  std::string out;
  std::size_t k = 10;
  std::size_t grid_size = 64;
  int trees = 200;
  std::uint64_t seed = 1;
  std::string metric = "mahalanobis";
  double ridge = -1.0;
  std::vector<double> levels = {25.0, 50.0, 75.0, 95.0, 99.0, 99.5};
  std::string eval_responses;
  bool no_screen = false;
  unsigned threads = 0;
  std::string manifest_out;
  std::string response_col = "y";
};

int run_quantiles(const QuantilesArgs& args) {
  RunManifest manifest("quantiles");
  auto measured = load_dataset(args.measured_path, Origin::Measured, args.response_col,
                               false, manifest, "measured");
  check_screening_provenance(measured.raw, args.no_screen, args.measured_path);
  auto sim = load_dataset(args.sim_path, Origin::Simulated, args.response_col, true,
                          manifest, "simulated");
  manifest.set_param("k_neighbors", args.k);
  manifest.set_param("k_grid", args.grid_size);
  manifest.set_param("n_trees", args.trees);
  manifest.set_param("seed", args.seed);
  manifest.set_param("metric", args.metric);
  manifest.set_param("ridge", args.ridge);
  manifest.set_param("levels", args.levels);

  const FittedMetric metric = fit_metric(sim.data, parse_metric(args.metric), args.ridge);
  const KnnConditionalModel knn_model = fit_knn(sim.data, metric, args.k, 0.0);

  const KnnSurrogateResult knn_plain =
      knn_surrogate(knn_model, measured.data, SigmaPolicy::fixed(0.0), args.threads);
  const KnnSurrogateResult knn_smooth =
      knn_surrogate(knn_model, measured.data, SigmaPolicy::silverman(), args.threads);
  manifest.set_param("sigma_silverman", knn_smooth.sigma);
  if (knn_smooth.sigma == 0.0)
    std::cerr << "condmix: warning: degenerate pooled sample, bandwidth fell back to 0\n";

  const ThresholdGrid grid = make_quantile_grid(sim.data.y(), args.grid_size);
  const auto classes = discretize_targets(sim.data.y(), grid);
  ForestHyper hyper;
  hyper.n_trees = args.trees;
  const Forest forest =
      fit_forest(sim.data.x_data(), sim.data.rows(), sim.data.cols(), classes,
                 static_cast<int>(grid.size()) + 1, hyper, args.seed, args.threads);
  const SurrogateDistribution forest_plain =
      forest_surrogate(forest, grid, measured.data, 0.0, args.threads);
  const SurrogateDistribution forest_smooth =
      forest_surrogate(forest, grid, measured.data, knn_smooth.sigma, args.threads);

  std::optional<MixtureDistribution> empirical;
  if (!args.eval_responses.empty()) {
    // The one place evaluation-only responses may enter: an explicit request
    // for the empirical comparison column.
    const std::string content = read_file(args.eval_responses);
    manifest.add_input("eval_responses", args.eval_responses, content);
    const RawTable raw = parse_csv(content);
    const auto it = std::find(raw.header.begin(), raw.header.end(), args.response_col);
    if (it == raw.header.end())
      raise(Errc::MissingResponse,
            "'" + args.eval_responses + "' has no '" + args.response_col + "' column");
    const auto col = static_cast<std::size_t>(it - raw.header.begin());
    std::vector<double> values;
    values.reserve(raw.rows.size());
    for (const auto& row : raw.rows) values.push_back(row.at(col));
    empirical = empirical_distribution(values);
  }

  std::vector<std::string> header = {"level_percent", "knn", "knn_smoothed", "forest",
                                     "forest_smoothed"};
  if (empirical) header.push_back("empirical");

  std::vector<std::vector<std::string>> rows;
  for (double level_pct : args.levels) {
    const double level = level_pct / 100.0;
    std::vector<std::string> row = {format_double(level_pct),
                                    quantile_cell(knn_plain.dist, level),
                                    quantile_cell(knn_smooth.dist, level),
                                    quantile_cell(forest_plain, level),
                                    quantile_cell(forest_smooth, level)};
    if (empirical) row.push_back(format_double(empirical->quantile(level)));
    rows.push_back(std::move(row));
  }
  write_file(args.out, table_to_csv({manifest.digest_comment(), "# provenance: quantiles"},
                                    header, rows));
  maybe_write_manifest(args.manifest_out, manifest);
  std::cout << "quantiles: wrote " << rows.size() << " levels to " << args.out
            << " (silverman sigma " << format_double(knn_smooth.sigma) << ")\n";
  return 0;
}

// --------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool quick = false;
  bool baseline_only = false;
  // -1 keeps the preset value.
  long long n = -1, m = -1, n_mc = -1, trees = -1, k = -1, seeds = -1, trials = -1;
  long long selector_curves = -1, neighbor_configs = -1, monotone_trials = -1;
};

int run_validate(const ValidateArgs& args) {
  RecoveryConfig rec;
  TailQuantileConfig tail;
  VarianceConfig var;
  int selector_curves = 100;
  int neighbor_configs = 200;
  int monotone_trials = 1000;
  ScreeningRecallConfig recall;

  if (args.quick) {
    rec.n_measured = 800;
    rec.m_simulated = 3000;
    rec.k_grid = 32;
    rec.n_trees = 50;
    rec.n_mc = 50000;
    tail.n_measured = 800;
    tail.m_simulated = 3000;
    tail.n_mc = 50000;
    tail.n_seeds = 2;
    var.n_measured = 1500;
    var.m_simulated = 6000;
    var.k_neighbors = 32;
    var.n_mc = 100000;
    selector_curves = 25;
    neighbor_configs = 40;
    monotone_trials = 100;
    recall.trials = 4;
    recall.n_measured = 600;
    recall.m_simulated = 2400;
  }

  if (args.n >= 0) rec.n_measured = tail.n_measured = static_cast<std::size_t>(args.n);
  if (args.m >= 0) rec.m_simulated = tail.m_simulated = static_cast<std::size_t>(args.m);
  if (args.n_mc >= 0) rec.n_mc = tail.n_mc = var.n_mc = static_cast<std::size_t>(args.n_mc);
  if (args.trees >= 0) rec.n_trees = static_cast<int>(args.trees);
  if (args.k >= 0) rec.k_neighbors = tail.k_neighbors = static_cast<std::size_t>(args.k);
  if (args.seeds >= 0) tail.n_seeds = static_cast<int>(args.seeds);
  if (args.trials >= 0) recall.trials = static_cast<int>(args.trials);
  if (args.selector_curves >= 0) selector_curves = static_cast<int>(args.selector_curves);
  if (args.neighbor_configs >= 0) neighbor_configs = static_cast<int>(args.neighbor_configs);
  if (args.monotone_trials >= 0) monotone_trials = static_cast<int>(args.monotone_trials);

  rec.seed = args.seed;
  rec.threads = args.threads;
  tail.base_seed = args.seed;
  tail.threads = args.threads;
  var.seed = args.seed;
  var.threads = args.threads;
  recall.base_seed = args.seed;
  recall.threads = args.threads;

  RunManifest manifest("validate");
  manifest.set_param("seed", args.seed);
  manifest.set_param("quick", args.quick);
  manifest.set_param("baseline_only", args.baseline_only);
  manifest.set_param("n", rec.n_measured);
  manifest.set_param("m", rec.m_simulated);
  manifest.set_param("n_mc", rec.n_mc);
  manifest.set_param("trees", rec.n_trees);
  manifest.set_param("k", rec.k_neighbors);
  manifest.set_param("tail_seeds", tail.n_seeds);
  manifest.set_param("recall_trials", recall.trials);

  std::string report;
  report += "# condmix validation report\n";
  report += manifest.digest_comment() + "\n";
  report += "config: n=" + std::to_string(rec.n_measured) +
            " m=" + std::to_string(rec.m_simulated) + " n_mc=" + std::to_string(rec.n_mc) +
            " k=" + std::to_string(rec.k_neighbors) + " trees=" + std::to_string(rec.n_trees) +
            " seed=" + std::to_string(args.seed) + "\n\n";

  const VarianceResult vres = bench_variance_deficit(var);
  report += "[variance-deficit]\n";
  report += "baseline_variance=" + format_double(vres.baseline_variance) + "\n";
  report += "surrogate_variance=" + format_double(vres.surrogate_variance) + "\n";
  report += "var_cond_mean=" + format_double(vres.var_cond_mean) + "\n";
  report += "mean_cond_variance=" + format_double(vres.mean_cond_variance) + "\n";
  report += "oracle_variance=" + format_double(vres.oracle_variance) + "\n";
  report += "cond_var_share=" + format_double(vres.cond_var_share) + "\n\n";

  if (!args.baseline_only) {
    const RecoveryResult rres = bench_surrogate_recovery(rec);
    std::cerr << "validate: surrogate recovery took "
              << format_double(rres.elapsed_seconds) << " s\n";
    report += "[surrogate-recovery]\n";
    report += "knn_ks=" + format_double(rres.knn_ks) + "\n";
    report += "forest_ks=" + format_double(rres.forest_ks) + "\n";
    report += "forest_alpha_max=" + format_double(rres.forest_alpha_max) + "\n";
    report += "forest_deficit=" + format_double(rres.forest_deficit) + "\n\n";

    const TailQuantileResult tres = bench_tail_quantiles(tail);
    report += "[tail-quantiles]\n";
    report += "sigma_y=" + format_double(tres.sigma_y) + "\n";
    for (std::size_t li = 0; li < tail.levels.size(); ++li) {
      report += "level=" + format_double(tail.levels[li]) +
                " oracle=" + format_double(tres.oracle_quantiles[li]) + " passes=" +
                std::to_string(tres.passes_per_level[li]) + "/" +
                std::to_string(tail.n_seeds) + " errs=";
      for (std::size_t s = 0; s < tres.std_errors.size(); ++s)
        report += (s ? " " : "") + format_double(tres.std_errors[s][li]);
      report += "\n";
    }
    report += "\n";

    const SelectorResult sres = bench_threshold_selector(selector_curves, args.seed);
    report += "[threshold-selector]\n";
    report += "kink_hits=" + std::to_string(sres.kink_hits) + "/" +
              std::to_string(sres.kink_trials) + "\n";
    report += "l1_max_rel_err=" + format_double(sres.max_rel_err) + " over " +
              std::to_string(sres.integral_trials) + " integrals\n\n";

    const NeighborOracleResult nres = bench_neighbor_oracle(neighbor_configs, args.seed);
    report += "[neighbor-oracle]\n";
    report += "configs=" + std::to_string(nres.configs) +
              " mismatches=" + std::to_string(nres.mismatches) + "\n\n";

    const ForestCheckResult fres = bench_forest_checks(monotone_trials, args.seed);
    report += "[forest-checks]\n";
    report += std::string("prior_exact=") + (fres.prior_exact ? "yes" : "no") + "\n";
    report += std::string("stump_onehot=") + (fres.stump_onehot ? "yes" : "no") + "\n";
    report += std::string("cumsum_exact=") + (fres.cumsum_exact ? "yes" : "no") + "\n";
    report += std::string("permutation_invariant=") +
              (fres.permutation_invariant ? "yes" : "no") + "\n";
    report += "monotone=" + std::to_string(fres.monotone_ok) + "/" +
              std::to_string(fres.monotone_trials) + "\n";
    report += "oob_accuracy=" + format_double(fres.oob_accuracy) + "\n\n";

    const ClosedFormResult cres = bench_closed_form();
    report += "[closed-form]\n";
    report += "silverman_rel_err=" + format_double(cres.silverman_rel_err) + "\n";
    report += "gumbel_abs_err=" + format_double(cres.gumbel_abs_err) + "\n\n";

    const ScreeningRecallResult scres = bench_screening_recall(recall);
    report += "[screening-recall]\n";
    report += "trials=" + std::to_string(scres.trials) + "\n";
    report += "min_recall=" + format_double(scres.min_recall) + "\n";
    report += "max_fpr=" + format_double(scres.max_fpr) + "\n";
    report += "recalls=";
    for (std::size_t i = 0; i < scres.recalls.size(); ++i)
      report += (i ? " " : "") + format_double(scres.recalls[i]);
    report += "\nfprs=";
    for (std::size_t i = 0; i < scres.fprs.size(); ++i)
      report += (i ? " " : "") + format_double(scres.fprs[i]);
    report += "\n\n";
  }

  report += "end of report\n";

  if (args.out.empty())
    std::cout << report;
  else
    write_file(args.out, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate estimation of latent response distributions from simulations"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--n", synth.n, "measured rows");
  synth_cmd->add_option("--m", synth.m, "simulated rows");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--noise", synth.noise, "noise family: gumbel|gaussian")
      ->check(CLI::IsMember({"gumbel", "gaussian"}));
  synth_cmd->add_option("--scale-base", synth.scale_base, "conditional scale base");
  synth_cmd->add_option("--scale-slope", synth.scale_slope, "conditional scale slope");
  synth_cmd->add_option("--contamination", synth.contamination,
                        "fraction of measured rows planted out of support");
  synth_cmd->add_option("--contamination-distance", synth.contamination_distance,
                        "planted distance in whitened units");
  synth_cmd->add_option("--manifest-out", synth.manifest_out, "write run manifest JSON");

  TrimArgs trim;
  auto* trim_cmd = app.add_subcommand("trim", "discard simulations far from the measurements");
  trim_cmd->add_option("sim", trim.sim_path, "simulated CSV")->required();
  trim_cmd->add_option("measured", trim.measured_path, "measured CSV")->required();
  trim_cmd->add_option("--out", trim.out, "kept simulations CSV")->required();
  trim_cmd->add_option("--report-out", trim.report_out, "per-row screening report CSV");
  trim_cmd->add_option("--curve-out", trim.curve_out, "normalized L1 curve CSV");
  trim_cmd->add_option("--k", trim.k, "neighbor count (default 1)");
  trim_cmd->add_option("--metric", trim.metric, "euclidean|mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}));
  trim_cmd->add_option("--ridge", trim.ridge, "covariance ridge (<0 = default)");
  trim_cmd->add_option("--threshold-override", trim.threshold_override,
                       "skip automatic selection and use this threshold");
  trim_cmd->add_option("--threads", trim.threads, "worker threads (0 = hardware)");
  trim_cmd->add_option("--manifest-out", trim.manifest_out, "write run manifest JSON");
  trim_cmd->add_option("--response-col", trim.response_col, "response column name");

  ScreenArgs screen;
  auto* screen_cmd = app.add_subcommand("screen", "flag measured covariate outliers");
  screen_cmd->add_option("measured", screen.measured_path, "measured CSV")->required();
  screen_cmd->add_option("sim", screen.sim_path, "simulated (kept) CSV")->required();
  screen_cmd->add_option("--inliers-out", screen.inliers_out, "inlier rows CSV")->required();
  screen_cmd->add_option("--outliers-out", screen.outliers_out, "outlier rows CSV");
  screen_cmd->add_option("--report-out", screen.report_out, "per-row screening report CSV");
  screen_cmd->add_option("--curve-out", screen.curve_out, "normalized L1 curve CSV");
  screen_cmd->add_option("--k", screen.k, "neighbor count (default 10)");
  screen_cmd->add_option("--metric", screen.metric, "euclidean|mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}));
  screen_cmd->add_option("--ridge", screen.ridge, "covariance ridge (<0 = default)");
  screen_cmd->add_option("--threshold-override", screen.threshold_override,
                         "skip automatic selection and use this threshold");
  screen_cmd->add_flag("--no-screen", screen.no_screen, "pass all rows through");
  screen_cmd->add_option("--threads", screen.threads, "worker threads (0 = hardware)");
  screen_cmd->add_option("--manifest-out", screen.manifest_out, "write run manifest JSON");
  screen_cmd->add_option("--response-col", screen.response_col, "response column name");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "estimate the response distribution");
  est_cmd->add_option("measured", est.measured_path, "screened measured CSV")->required();
  est_cmd->add_option("sim", est.sim_path, "kept simulated CSV with responses")->required();
  est_cmd->add_option("--estimator", est.estimator, "knn|forest")
      ->check(CLI::IsMember({"knn", "forest"}));
  est_cmd->add_option("--sigma", est.sigma, "bandwidth: number >= 0 or 'silverman'");
  est_cmd->add_option("--k", est.k, "kNN neighbor count");
  est_cmd->add_option("--grid-size", est.grid_size, "forest threshold grid size");
  est_cmd->add_option("--trees", est.trees, "forest size");
  est_cmd->add_option("--min-leaf", est.min_leaf, "minimum samples per leaf");
  est_cmd->add_option("--mtry", est.mtry, "features per split (0 = ceil(sqrt(d)))");
  est_cmd->add_option("--max-depth", est.max_depth, "tree depth cap (-1 = unlimited)");
  est_cmd->add_option("--metric", est.metric, "euclidean|mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}));
  est_cmd->add_option("--ridge", est.ridge, "covariance ridge (<0 = default)");
  est_cmd->add_option("--seed", est.seed, "forest seed");
  est_cmd->add_option("--levels", est.levels, "quantile levels in percent")->delimiter(',');
  est_cmd->add_option("--quantiles-out", est.quantiles_out, "quantile table CSV");
  est_cmd->add_option("--cdf-out", est.cdf_out, "CDF curve CSV");
  est_cmd->add_option("--gumbel-out", est.gumbel_out, "-log(-log CDF) curve CSV");
  est_cmd->add_option("--model-out", est.model_out, "surrogate distribution JSON");
  est_cmd->add_option("--forest-model-out", est.forest_model_out, "forest model JSON");
  est_cmd->add_option("--forest-model-in", est.forest_model_in,
                      "reuse a saved forest model instead of refitting");
  est_cmd->add_option("--curve-points", est.curve_points, "points per curve");
  est_cmd->add_flag("--no-screen", est.no_screen, "accept measured input without provenance");
  est_cmd->add_option("--threads", est.threads, "worker threads (0 = hardware)");
  est_cmd->add_option("--manifest-out", est.manifest_out, "write run manifest JSON");
  est_cmd->add_option("--response-col", est.response_col, "response column name");

  QuantilesArgs quant;
  auto* quant_cmd =
      app.add_subcommand("quantiles", "quantile comparison table for all estimators");
  quant_cmd->add_option("measured", quant.measured_path, "screened measured CSV")->required();
  quant_cmd->add_option("sim", quant.sim_path, "kept simulated CSV with responses")
      ->required();
  quant_cmd->add_option("--out", quant.out, "table CSV")->required();
  quant_cmd->add_option("--k", quant.k, "kNN neighbor count");
  quant_cmd->add_option("--grid-size", quant.grid_size, "forest threshold grid size");
  quant_cmd->add_option("--trees", quant.trees, "forest size");
  quant_cmd->add_option("--seed", quant.seed, "forest seed");
  quant_cmd->add_option("--metric", quant.metric, "euclidean|mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}));
  quant_cmd->add_option("--ridge", quant.ridge, "covariance ridge (<0 = default)");
  quant_cmd->add_option("--levels", quant.levels, "quantile levels in percent")
      ->delimiter(',');
  quant_cmd->add_option("--eval-responses", quant.eval_responses,
                        "evaluation-only response CSV for the empirical column");
  quant_cmd->add_flag("--no-screen", quant.no_screen,
                      "accept measured input without provenance");
  quant_cmd->add_option("--threads", quant.threads, "worker threads (0 = hardware)");
  quant_cmd->add_option("--manifest-out", quant.manifest_out, "write run manifest JSON");
  quant_cmd->add_option("--response-col", quant.response_col, "response column name");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "synthetic-oracle benchmark report");
  val_cmd->add_option("--out", val.out, "report file (default stdout)");
  val_cmd->add_option("--seed", val.seed, "base seed");
  val_cmd->add_option("--threads", val.threads, "worker threads (0 = hardware)");
  val_cmd->add_flag("--quick", val.quick, "reduced sizes for smoke testing");
  val_cmd->add_flag("--baseline-only", val.baseline_only,
                    "only the regression-imputation comparison");
  val_cmd->add_option("--n", val.n, "measured rows");
  val_cmd->add_option("--m", val.m, "simulated rows");
  val_cmd->add_option("--n-mc", val.n_mc, "Monte-Carlo oracle draws");
  val_cmd->add_option("--trees", val.trees, "forest size");
  val_cmd->add_option("--k", val.k, "kNN neighbor count");
  val_cmd->add_option("--seeds", val.seeds, "seeds for the tail-quantile check");
  val_cmd->add_option("--trials", val.trials, "screening recall trials");
  val_cmd->add_option("--selector-curves", val.selector_curves, "threshold selector curves");
  val_cmd->add_option("--neighbor-configs", val.neighbor_configs, "neighbor oracle configs");
  val_cmd->add_option("--monotone-trials", val.monotone_trials, "forest monotonicity trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*trim_cmd) return run_trim(trim);
    if (*screen_cmd) return run_screen(screen);
    if (*est_cmd) return run_estimate(est);
    if (*quant_cmd) return run_quantiles(quant);
    if (*val_cmd) return run_validate(val);
  } catch (const Error& e) {
    std::cerr << "condmix: " << e.what() << "\n";
    return is_data_error(e.code()) ? 3 : 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "condmix: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "condmix: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
