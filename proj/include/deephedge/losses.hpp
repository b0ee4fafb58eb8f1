#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "deephedge/dataset.hpp"
#include "deephedge/grad_tape.hpp"
#include "deephedge/pricer.hpp"

namespace dh {

enum class LossKind { SelfFinancing, ProfitAndLoss, Combined };

std::string_view to_string(LossKind kind);
/// Accepts sf, pl, combined.
LossKind parse_loss_kind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::Combined;
  double lambda_terminal = 1.0;
  double sf_weight = 5.0;
  double pl_weight = 1.0;

  void validate() const;
};

template <class S>
struct LossTerms {
  S sf = 0.0;
  S pl = 0.0;
  S terminal = 0.0;
};

using LossComponents = LossTerms<double>;

/// SF: sf + lambda terminal, PL: pl + lambda terminal,
/// Combined: sf_weight sf + pl_weight pl + lambda terminal.
template <class S>
S composite_loss(const LossConfig& cfg, const LossTerms<S>& parts) {
  switch (cfg.kind) {
    case LossKind::SelfFinancing: return parts.sf + cfg.lambda_terminal * parts.terminal;
    case LossKind::ProfitAndLoss: return parts.pl + cfg.lambda_terminal * parts.terminal;
    case LossKind::Combined: break;
  }
  return cfg.sf_weight * parts.sf + cfg.pl_weight * parts.pl + cfg.lambda_terminal * parts.terminal;
}

template <class S>
struct NodeQuote {
  S price = 0.0;
  S delta_x = 0.0;
  S delta_c = 0.0;
};

/// One-step self-financing residual
///   (N_j - D_j.Z_j) e^{r dt} + D_j.Z_{j+1} - N_{j+1},   growth = e^{r dt}.
template <class S>
S sf_residual(const NodeQuote<S>& now, const NodeQuote<S>& next, double x0, double c0, double x1, double c1,
              double growth) {
  const S held_now = now.delta_x * x0 + now.delta_c * c0;
  const S held_next = now.delta_x * x1 + now.delta_c * c1;
  return (now.price - held_now) * growth + held_next - next.price;
}

struct NodeRef {
  Eigen::Index path = 0;
  int step = 0;
};

/// Nodes quoted for one loss evaluation.
/// FullPaths: every node from the path's start to the last node, per path.
/// Pairs: the nodes j, j + 1 and the last node, per (path, j) pair.
struct LossBatch {
  enum class Layout { FullPaths, Pairs };

  Layout layout = Layout::FullPaths;
  std::vector<Eigen::Index> paths;  // one entry per path (FullPaths) or per pair
  std::vector<int> steps;           // Pairs only
  std::vector<NodeRef> nodes;
  std::vector<Eigen::Index> first_node;  // index into nodes for each entry of paths
};

LossBatch full_path_batch(const HedgingDataset& data, std::vector<Eigen::Index> paths);
LossBatch all_paths_batch(const HedgingDataset& data);
LossBatch pair_batch(const HedgingDataset& data, const std::vector<std::pair<Eigen::Index, int>>& pairs);

/// Means of squared self-financing, P&L and terminal residuals over a batch.
/// quote_at(k) returns the NodeQuote<S> of batch.nodes[k]. Pair batches carry
/// no full path, so their P&L component is 0.
template <class S, class QuoteAt>
LossTerms<S> batch_losses(const HedgingDataset& data, const LossBatch& batch, QuoteAt&& quote_at) {
  const TimeGrid& grid = data.paths.grid;
  const double r = data.paths.params.r;
  const int m = grid.steps;
  const double horizon = grid.t_end;
  const double growth = std::exp(r * grid.dt());
  const Eigen::MatrixXd& X = data.paths.x;
  const Eigen::MatrixXd& C = data.paths.c;

  LossTerms<S> out;
  const auto count = static_cast<double>(batch.paths.size());
  if (batch.layout == LossBatch::Layout::Pairs) {
    for (std::size_t e = 0; e < batch.paths.size(); ++e) {
      const Eigen::Index i = batch.paths[e];
      const int j = batch.steps[e];
      const Eigen::Index k = batch.first_node[e];
      const NodeQuote<S> now = quote_at(k);
      const NodeQuote<S> next = quote_at(k + 1);
      const NodeQuote<S> last = quote_at(k + 2);
      out.sf += square(sf_residual(now, next, X(j, i), C(j, i), X(j + 1, i), C(j + 1, i), growth));
      out.terminal += square(last.price - data.target[i]);
    }
    out.sf = out.sf / count;
    out.terminal = out.terminal / count;
    return out;
  }

  double sf_count = 0.0;
  for (std::size_t e = 0; e < batch.paths.size(); ++e) {
    const Eigen::Index i = batch.paths[e];
    const int start = data.start(i);
    const Eigen::Index base = batch.first_node[e] - start;
    NodeQuote<S> now = quote_at(base + start);
    S pl = now.price * std::exp(r * (horizon - grid.node(start)));
    for (int j = start; j < m; ++j) {
      const NodeQuote<S> next = quote_at(base + j + 1);
      out.sf += square(sf_residual(now, next, X(j, i), C(j, i), X(j + 1, i), C(j + 1, i), growth));
      const double carry_now = std::exp(r * (horizon - grid.node(j)));
      const double carry_next = std::exp(r * (horizon - grid.node(j + 1)));
      pl += now.delta_x * (X(j + 1, i) * carry_next - X(j, i) * carry_now) +
            now.delta_c * (C(j + 1, i) * carry_next - C(j, i) * carry_now);
      now = next;
    }
    sf_count += m - start;
    out.pl += square(pl - data.target[i]);
    out.terminal += square(now.price - data.target[i]);
  }
  out.sf = out.sf / sf_count;
  out.pl = out.pl / count;
  out.terminal = out.terminal / count;
  return out;
}

void check_horizon(double model_horizon, const HedgingDataset& data);

/// Quotes of the model at every node of the batch, in batch order.
template <PathQuoter Q>
std::vector<NodeQuote<double>> quote_batch(const Q& model, const HedgingDataset& data, const LossBatch& batch) {
  check_horizon(model.horizon(), data);
  const double horizon = model.horizon();
  std::vector<NodeQuote<double>> out(batch.nodes.size());
  std::size_t k = 0;
  while (k < batch.nodes.size()) {
    std::size_t end = k + 1;
    const Eigen::Index path = batch.nodes[k].path;
    while (end < batch.nodes.size() && batch.nodes[end].path == path) ++end;
    const auto len = static_cast<Eigen::Index>(end - k);
    Eigen::ArrayXd tau(len), x(len), c(len);
    for (Eigen::Index q = 0; q < len; ++q) {
      const int j = batch.nodes[k + q].step;
      tau[q] = j == data.steps() ? 0.0 : horizon - data.paths.grid.node(j);
      x[q] = data.paths.x(j, path);
      c[q] = data.paths.c(j, path);
    }
    const PathQuotes quotes = model.quote_path(tau, x, c, data.terms[path]);
    for (Eigen::Index q = 0; q < len; ++q) out[k + q] = {quotes.price[q], quotes.delta_x[q], quotes.delta_c[q]};
    k = end;
  }
  return out;
}

template <PathQuoter Q>
LossComponents evaluate_losses(const Q& model, const HedgingDataset& data, const LossBatch& batch) {
  const std::vector<NodeQuote<double>> quotes = quote_batch(model, data, batch);
  return batch_losses<double>(data, batch, [&](Eigen::Index k) { return quotes[k]; });
}

/// Mean squared self-financing residual over every step of the batch.
template <PathQuoter Q>
double sf_loss(const Q& model, const HedgingDataset& data, const LossBatch& batch) {
  return evaluate_losses(model, data, batch).sf;
}

/// Mean squared per-path P&L residual; the batch must hold full paths.
template <PathQuoter Q>
double pl_loss(const Q& model, const HedgingDataset& data, const LossBatch& batch) {
  if (batch.layout != LossBatch::Layout::FullPaths) throw std::invalid_argument("pl_loss needs full paths");
  return evaluate_losses(model, data, batch).pl;
}

/// Mean squared mismatch between the price at the last node and the target.
template <PathQuoter Q>
double terminal_loss(const Q& model, const HedgingDataset& data, const LossBatch& batch) {
  return evaluate_losses(model, data, batch).terminal;
}

}  // namespace dh
