#include "deephedge/losses.hpp"

#include <string>

namespace dh {

void HedgingDataset::validate() const {
  const Eigen::Index n = size();
  if (n == 0) throw std::invalid_argument("dataset: no paths");
  if (!paths.has_call()) throw std::invalid_argument("dataset: tradable call missing");
  if (static_cast<Eigen::Index>(terms.size()) != n || target.size() != n) {
    throw std::invalid_argument("dataset: per-path terms and targets must match the path count");
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SelfFinancing: return "sf";
    case LossKind::ProfitAndLoss: return "pl";
    case LossKind::Combined: return "combined";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  for (LossKind kind : {LossKind::SelfFinancing, LossKind::ProfitAndLoss, LossKind::Combined}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown loss kind '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  for (double w : {lambda_terminal, sf_weight, pl_weight}) {
    if (!(std::isfinite(w) && w >= 0.0)) throw std::invalid_argument("loss weights must be finite and >= 0");
  }
  if (kind == LossKind::Combined && sf_weight == 0.0 && pl_weight == 0.0) {
    throw std::invalid_argument("combined loss needs a positive sf or pl weight");
  }
}

LossBatch full_path_batch(const HedgingDataset& data, std::vector<Eigen::Index> paths) {
  LossBatch batch;
  batch.layout = LossBatch::Layout::FullPaths;
  const int m = data.steps();
  std::size_t total = 0;
  for (Eigen::Index i : paths) {
    if (i < 0 || i >= data.size()) throw std::out_of_range("loss batch: path index out of range");
    total += static_cast<std::size_t>(m - data.start(i) + 1);
  }
  batch.nodes.reserve(total);
  batch.first_node.reserve(paths.size());
  for (Eigen::Index i : paths) {
    batch.first_node.push_back(static_cast<Eigen::Index>(batch.nodes.size()));
    for (int j = data.start(i); j <= m; ++j) batch.nodes.push_back({i, j});
  }
  batch.paths = std::move(paths);
  return batch;
}

LossBatch all_paths_batch(const HedgingDataset& data) {
  std::vector<Eigen::Index> paths(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) paths[static_cast<std::size_t>(i)] = i;
  return full_path_batch(data, std::move(paths));
}

LossBatch pair_batch(const HedgingDataset& data, const std::vector<std::pair<Eigen::Index, int>>& pairs) {
  LossBatch batch;
  batch.layout = LossBatch::Layout::Pairs;
  const int m = data.steps();
  batch.nodes.reserve(3 * pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i < 0 || i >= data.size()) throw std::out_of_range("loss batch: path index out of range");
    if (j < data.start(i) || j >= m) throw std::out_of_range("loss batch: step outside the path");
    batch.paths.push_back(i);
    batch.steps.push_back(j);
    batch.first_node.push_back(static_cast<Eigen::Index>(batch.nodes.size()));
    batch.nodes.push_back({i, j});
    batch.nodes.push_back({i, j + 1});
    batch.nodes.push_back({i, m});
  }
  return batch;
}

void check_horizon(double model_horizon, const HedgingDataset& data) {
  if (std::abs(model_horizon - data.horizon()) > 1e-12 * std::max(1.0, data.horizon())) {
    throw std::invalid_argument("model horizon " + std::to_string(model_horizon) +
                                " does not match the path grid horizon " + std::to_string(data.horizon()));
  }
}

}  // namespace dh
