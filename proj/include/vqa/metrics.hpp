#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "vqa/common.hpp"

namespace vqa {

// Correlation metrics used to report model quality: Spearman rank
// correlation, raw Pearson, and Pearson after a four-parameter logistic
// remapping of the predictions onto the label scale.

namespace detail {
inline void check_metric_inputs(const std::vector<double>& a, const std::vector<double>& b,
                                const char* who, size_t min_n) {
  if (a.size() != b.size())
    throw InvalidArgument(std::string(who) + ": size mismatch " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  if (a.size() < min_n)
    throw InvalidArgument(std::string(who) + ": needs at least " + std::to_string(min_n) +
                          " samples, got " + std::to_string(a.size()));
  for (const double v : a)
    if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite value");
  for (const double v : b)
    if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite value");
}
}  // namespace detail

// Ranks 1..n with ties receiving the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  detail::check_metric_inputs(x, y, "pearson", 3);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw UndefinedCorrelation("pearson: an input is constant");
  return sxy / std::sqrt(sxx * syy);
}

inline double srcc(const std::vector<double>& x, const std::vector<double>& y) {
  detail::check_metric_inputs(x, y, "srcc", 3);
  return pearson(average_ranks(x), average_ranks(y));
}

// Four-parameter logistic s(o) = b2 + (b1 - b2) / (1 + exp(-(o - b3)/b4)),
// fitted by Levenberg-Marquardt on squared residuals against the labels.
struct LogisticFit {
  std::array<double, 4> beta{};
  bool converged = false;
  int iterations = 0;
};

inline double logistic4(double o, const std::array<double, 4>& b) {
  return b[1] + (b[0] - b[1]) / (1.0 + std::exp(-(o - b[2]) / b[3]));
}

inline LogisticFit fit_logistic(const std::vector<double>& objective,
                                const std::vector<double>& subjective) {
  detail::check_metric_inputs(objective, subjective, "fit_logistic", 5);
  const size_t n = objective.size();
  const double dn = static_cast<double>(n);

  LogisticFit fit;
  const auto [lo_it, hi_it] = std::minmax_element(subjective.begin(), subjective.end());
  const double mo = std::accumulate(objective.begin(), objective.end(), 0.0) / dn;
  double var_o = 0.0;
  for (const double o : objective) var_o += (o - mo) * (o - mo);
  const double std_o = std::sqrt(var_o / dn);
  fit.beta = {*hi_it, *lo_it, mo, std_o / 4.0};
  if (!(fit.beta[3] > 0.0) || *hi_it == *lo_it) return fit;  // degenerate: caller falls back

  auto sse = [&](const std::array<double, 4>& b) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = logistic4(objective[i], b) - subjective[i];
      s += r * r;
    }
    return s;
  };

  double damping = 1e-3;
  double err = sse(fit.beta);
  for (int iter = 0; iter < 400; ++iter) {
    fit.iterations = iter + 1;
    // accumulate J^T J and J^T r
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (size_t i = 0; i < n; ++i) {
      const double t = (objective[i] - fit.beta[2]) / fit.beta[3];
      const double sig = 1.0 / (1.0 + std::exp(-t));
      const double dsig = sig * (1.0 - sig);
      const double span = fit.beta[0] - fit.beta[1];
      const double ji[4] = {sig, 1.0 - sig, -span * dsig / fit.beta[3],
                            -span * dsig * t / fit.beta[3]};
      const double r = fit.beta[1] + span * sig - subjective[i];
      for (int a = 0; a < 4; ++a) {
        jtr[a] += ji[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += ji[a] * ji[b];
      }
    }
    bool accepted = false;
    while (damping <= 1e12) {
      double m[4][5];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) m[a][b] = jtj[a][b];
        m[a][a] += damping * std::max(jtj[a][a], 1e-12);
        m[a][4] = -jtr[a];
      }
      // Gaussian elimination with partial pivoting
      bool singular = false;
      for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int row = col + 1; row < 4; ++row)
          if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
        if (std::abs(m[piv][col]) < 1e-300) {
          singular = true;
          break;
        }
        if (piv != col)
          for (int k = col; k < 5; ++k) std::swap(m[piv][k], m[col][k]);
        for (int row = 0; row < 4; ++row) {
          if (row == col) continue;
          const double f = m[row][col] / m[col][col];
          for (int k = col; k < 5; ++k) m[row][k] -= f * m[col][k];
        }
      }
      if (singular) {
        damping *= 10.0;
        continue;
      }
      std::array<double, 4> trial = fit.beta;
      for (int a = 0; a < 4; ++a) trial[a] += m[a][4] / m[a][a];
      if (!(trial[3] > 1e-12) || !std::isfinite(trial[0]) || !std::isfinite(trial[1]) ||
          !std::isfinite(trial[2]) || !std::isfinite(trial[3])) {
        damping *= 10.0;
        continue;
      }
      const double trial_err = sse(trial);
      if (std::isfinite(trial_err) && trial_err <= err) {
        const double rel = (err - trial_err) / std::max(err, 1e-300);
        fit.beta = trial;
        err = trial_err;
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        if (rel < 1e-12) fit.converged = true;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted || fit.converged) {
      fit.converged = fit.converged || accepted;
      if (!accepted && err >= 0.0) fit.converged = true;  // stalled at a minimum
      break;
    }
  }
  if (fit.iterations > 0 && !fit.converged) fit.converged = true;  // ran out of iterations at best point
  return fit;
}

// Pearson correlation either of the raw scores or of the scores passed
// through a fitted four-parameter logistic first.
inline double plcc(const std::vector<double>& objective, const std::vector<double>& subjective,
                   bool fitted) {
  if (!fitted) return pearson(objective, subjective);
  const LogisticFit fit = fit_logistic(objective, subjective);
  if (!(fit.beta[3] > 0.0) || fit.beta[0] == fit.beta[1])
    throw UndefinedCorrelation("plcc: degenerate logistic fit");
  std::vector<double> mapped(objective.size());
  for (size_t i = 0; i < objective.size(); ++i) mapped[i] = logistic4(objective[i], fit.beta);
  return pearson(mapped, subjective);
}

struct EvalResult {
  double srcc = 0.0;
  double plcc_raw = 0.0;
  double plcc_fitted = 0.0;    // after logistic mapping (equals plcc_raw on fallback)
  std::array<double, 4> beta{};
  size_t n_samples = 0;
  bool logistic_fallback = false;
};

// SRCC + raw PLCC + fitted PLCC. If the logistic fit degenerates (constant
// labels or predictions, mapped values constant, fit failure, too few samples)
// the fitted value falls back to the raw PLCC and the flag is set.
inline EvalResult evaluate_scores(const std::vector<double>& predictions,
                                  const std::vector<double>& labels) {
  EvalResult r;
  r.srcc = srcc(predictions, labels);
  r.plcc_raw = pearson(predictions, labels);
  r.n_samples = predictions.size();
  try {
    const LogisticFit fit = fit_logistic(predictions, labels);
    if (!(fit.beta[3] > 0.0) || fit.beta[0] == fit.beta[1]) throw UndefinedCorrelation("degenerate fit");
    std::vector<double> mapped(predictions.size());
    for (size_t i = 0; i < predictions.size(); ++i) mapped[i] = logistic4(predictions[i], fit.beta);
    r.plcc_fitted = pearson(mapped, labels);
    r.beta = fit.beta;
  } catch (const InvalidArgument&) {  // fewer samples than the fit needs
    r.plcc_fitted = r.plcc_raw;
    r.logistic_fallback = true;
  } catch (const NumericError&) {
    r.plcc_fitted = r.plcc_raw;
    r.logistic_fallback = true;
  }
  return r;
}

// Median; an even count averages the two middle values.
inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median: empty");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct AggregateEval {
  EvalResult median_result;
  size_t split_count = 0;
  size_t fallback_count = 0;
};

// Per-metric median over split results (the protocol reports medians, not
// means, over repeated random splits).
inline AggregateEval median_over_splits(const std::vector<EvalResult>& results) {
  if (results.empty()) throw InvalidArgument("median_over_splits: no results");
  std::vector<double> s, p, pr, ns;
  AggregateEval agg;
  for (const auto& r : results) {
    s.push_back(r.srcc);
    p.push_back(r.plcc_fitted);
    pr.push_back(r.plcc_raw);
    ns.push_back(static_cast<double>(r.n_samples));
    if (r.logistic_fallback) ++agg.fallback_count;
  }
  agg.median_result.srcc = median(s);
  agg.median_result.plcc_fitted = median(p);
  agg.median_result.plcc_raw = median(pr);
  agg.median_result.n_samples = static_cast<size_t>(median(ns));
  agg.median_result.logistic_fallback = agg.fallback_count > 0;
  agg.split_count = results.size();
  return agg;
}

}  // namespace vqa
