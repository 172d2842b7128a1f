#include "condmix/knn.hpp"

#include "condmix/errors.hpp"

namespace condmix {

KnnConditionalModel fit_knn(const Dataset& sim, const FittedMetric& metric, std::size_t k,
                            double sigma, IndexBackend backend) {
  if (!sim.has_y()) raise(Errc::MissingResponse, "simulated dataset has no responses");
  if (k == 0) raise(Errc::InvalidArgument, "k must be >= 1");
  if (k > sim.rows())
    raise(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds m=" + std::to_string(sim.rows()));

  auto whitened = metric.whiten_matrix(sim);
  return KnnConditionalModel{
      metric,
      NeighborIndex::build(std::move(whitened), sim.rows(), sim.cols(), backend),
      sim.y(), k, sigma};
}

std::vector<NeighborIndex::Hit> knn_neighbors(const KnnConditionalModel& model,
                                              std::span<const double> x_raw) {
  const auto w = model.metric.whiten_row(x_raw);
  return model.index.query_knn(w, model.k);
}

MixtureDistribution knn_conditional(const KnnConditionalModel& model,
                                    std::span<const double> x_raw) {
  const auto hits = knn_neighbors(model, x_raw);
  std::vector<double> means, weights;
  means.reserve(hits.size());
  weights.reserve(hits.size());
  const double w = 1.0 / static_cast<double>(hits.size());
  for (const auto& h : hits) {
    means.push_back(model.responses[h.index]);
    weights.push_back(w);
  }
  return MixtureDistribution(std::move(means), std::move(weights), model.sigma);
}

double knn_conditional_mean(const KnnConditionalModel& model, std::span<const double> x_raw) {
  const auto hits = knn_neighbors(model, x_raw);
  double sum = 0.0;
  for (const auto& h : hits) sum += model.responses[h.index];
  return sum / static_cast<double>(hits.size());
}

}  // namespace condmix
