#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vqa/common.hpp"

namespace vqa {

// Training objective: MAE plus a pairwise monotonicity (rank) hinge over the
// batch, L = L_mae + lambda * L_rank.

namespace detail {
inline void check_loss_inputs(const std::vector<double>& pred, const std::vector<double>& label,
                              const char* who) {
  if (pred.empty()) throw InvalidArgument(std::string(who) + ": empty batch");
  if (pred.size() != label.size())
    throw InvalidArgument(std::string(who) + ": " + std::to_string(pred.size()) +
                          " predictions vs " + std::to_string(label.size()) + " labels");
  for (const double v : pred)
    if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite prediction");
  for (const double v : label)
    if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite label");
}

inline double sgn0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

inline double mae_loss(const std::vector<double>& pred, const std::vector<double>& label) {
  detail::check_loss_inputs(pred, label, "mae_loss");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - label[i]);
  return s / static_cast<double>(pred.size());
}

// Label-order sign: +1 when the first ground-truth score is at least the
// second.
inline double rank_sign(double label_i, double label_j) { return label_i >= label_j ? 1.0 : -1.0; }

// Pair hinge: the predicted gap, aligned to the label order, must reach the
// label gap. Zero exactly when it does.
inline double rank_pair_margin(double pred_i, double pred_j, double label_i, double label_j) {
  return std::abs(label_i - label_j) - rank_sign(label_i, label_j) * (pred_i - pred_j);
}

// Mean over all N^2 ordered pairs (i = j included; those terms are zero).
inline double rank_loss(const std::vector<double>& pred, const std::vector<double>& label) {
  detail::check_loss_inputs(pred, label, "rank_loss");
  const size_t n = pred.size();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      s += std::max(0.0, rank_pair_margin(pred[i], pred[j], label[i], label[j]));
  return s / (static_cast<double>(n) * static_cast<double>(n));
}

inline double total_loss(const std::vector<double>& pred, const std::vector<double>& label,
                         double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("total_loss: lambda must be >= 0");
  return mae_loss(pred, label) + lambda * rank_loss(pred, label);
}

struct LossResult {
  double value = 0.0;
  double mae = 0.0;
  double rank = 0.0;
  std::vector<double> grad;  // d value / d pred
};

// Subgradient conventions: the MAE |x| and the pair hinge both take 0
// exactly at their kinks. e depends only on labels, so the rank term is
// piecewise linear in the predictions.
inline LossResult total_loss_with_grad(const std::vector<double>& pred,
                                       const std::vector<double>& label, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("total_loss: lambda must be >= 0");
  detail::check_loss_inputs(pred, label, "total_loss");
  const size_t n = pred.size();
  const double dn = static_cast<double>(n);

  LossResult res;
  res.grad.assign(n, 0.0);

  for (size_t i = 0; i < n; ++i) {
    res.mae += std::abs(pred[i] - label[i]);
    res.grad[i] += detail::sgn0(pred[i] - label[i]) / dn;
  }
  res.mae /= dn;

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const double m = rank_pair_margin(pred[i], pred[j], label[i], label[j]);
      if (m <= 0.0) continue;
      res.rank += m;
      const double e = rank_sign(label[i], label[j]);
      res.grad[i] -= lambda * e / (dn * dn);
      res.grad[j] += lambda * e / (dn * dn);
    }
  }
  res.rank /= dn * dn;
  res.value = res.mae + lambda * res.rank;
  return res;
}

}  // namespace vqa
