#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vqa/common.hpp"

namespace vqa {

// Multi-scale fusion: per-scale quality scores are combined by a weighted
// geometric mean whose weights come from integrating a contrast sensitivity
// function over the spatial-frequency band each scale contributes.

struct ViewingEnvironment {
  double distance = 35.0;        // viewer-to-screen, same unit as picture_height
  double picture_height = 11.3;  // displayed picture height
  double luminance = 200.0;      // cd/m^2
  double angular_area = 606.0;   // X0^2, squared angular picture size in deg^2

  void validate() const {
    if (!(distance > 0.0)) throw InvalidArgument("viewing distance must be > 0");
    if (!(picture_height > 0.0)) throw InvalidArgument("picture height must be > 0");
    if (!(luminance > 0.0)) throw InvalidArgument("luminance must be > 0");
    if (!(angular_area > 0.0)) throw InvalidArgument("angular picture size must be > 0");
  }
};

// Highest frequency (cycles/degree) representable with the given line count.
inline double max_frequency_for_lines(const ViewingEnvironment& env, double lines) {
  env.validate();
  if (!(lines > 0.0)) throw InvalidArgument("line count must be > 0");
  constexpr double kPi = 3.14159265358979323846;
  return kPi * env.distance * lines / (180.0 * env.picture_height * 2.0);
}

// Spatial contrast sensitivity. The closed form diverges at u = 0; the
// sensitivity there is taken as 0 (no DC contribution).
inline double csf_sensitivity(double u, const ViewingEnvironment& env) {
  env.validate();
  if (!(u >= 0.0)) throw InvalidArgument("frequency must be >= 0");
  if (u == 0.0) return 0.0;
  const double u2 = u * u;
  const double num = 5200.0 * std::exp(-0.0016 * u2 * std::pow(1.0 + 100.0 / env.luminance, 0.08));
  const double den =
      (1.0 + 144.0 / env.angular_area + 0.64 * u2) *
      (63.0 / std::pow(env.luminance, 0.83) + 1.0 / (-std::expm1(-0.02 * u2)));
  return num / std::sqrt(den);
}

namespace detail {
// Composite Simpson with step <= max_step (subinterval count forced even).
template <typename F>
double simpson(F&& f, double a, double b, double max_step) {
  if (b <= a) return 0.0;
  long long n = static_cast<long long>(std::ceil((b - a) / max_step));
  if (n < 2) n = 2;
  if (n % 2 != 0) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (long long k = 1; k < n; ++k) s += f(a + h * static_cast<double>(k)) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace detail

// Band edges [0, xi_1, ..., xi_K] for ascending line counts.
inline std::vector<double> band_edges(const ViewingEnvironment& env,
                                      const std::vector<double>& lines) {
  if (lines.empty()) throw InvalidArgument("band_edges: no scales");
  std::vector<double> edges{0.0};
  double prev = 0.0;
  for (const double l : lines) {
    if (!(l > prev))
      throw InvalidArgument("band_edges: line counts must be positive and strictly ascending");
    edges.push_back(max_frequency_for_lines(env, l));
    prev = l;
  }
  return edges;
}

// Normalized band integrals of a sensitivity curve: w_i >= 0, sum w_i = 1.
template <typename Sensitivity>
std::vector<double> scale_weights_for(const ViewingEnvironment& env,
                                      const std::vector<double>& lines, Sensitivity&& s,
                                      double quadrature_step = 0.01) {
  if (!(quadrature_step > 0.0)) throw InvalidArgument("quadrature step must be > 0");
  const std::vector<double> edges = band_edges(env, lines);
  std::vector<double> bands;
  double total = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    const double b = detail::simpson(s, edges[i], edges[i + 1], quadrature_step);
    if (!std::isfinite(b))
      throw NumericError("scale_weights: quadrature diverged on band " + std::to_string(i));
    bands.push_back(b);
    total += b;
  }
  if (!(total > 0.0)) throw NumericError("scale_weights: sensitivity integral is not positive");
  for (auto& w : bands) w /= total;
  return bands;
}

inline std::vector<double> scale_weights(const ViewingEnvironment& env,
                                         const std::vector<double>& lines,
                                         double quadrature_step = 0.01) {
  return scale_weights_for(env, lines, [&](double u) { return csf_sensitivity(u, env); },
                           quadrature_step);
}

// Weighted geometric mean Q = prod Q_i^{w_i}. Scores must be positive;
// weights nonnegative and summing to 1 (1e-3 slack admits published
// rounded weights).
inline double fuse_multiscale(const std::vector<double>& scores,
                              const std::vector<double>& weights) {
  if (scores.empty()) throw InvalidArgument("fuse_multiscale: no scores");
  if (scores.size() != weights.size())
    throw InvalidArgument("fuse_multiscale: " + std::to_string(scores.size()) + " scores vs " +
                          std::to_string(weights.size()) + " weights");
  double wsum = 0.0;
  for (const double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw InvalidArgument("fuse_multiscale: weights must be finite and >= 0");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-3)
    throw InvalidArgument("fuse_multiscale: weights sum to " + std::to_string(wsum) + ", need 1");
  double acc = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]) || scores[i] <= 0.0)
      throw DomainError("fuse_multiscale: score " + std::to_string(i) +
                        " is not positive; geometric fusion needs Q > 0");
    acc += weights[i] * std::log(scores[i]);
  }
  return std::exp(acc);
}

// Same fusion on a shifted axis, for score scales that may touch zero:
// Q = prod (Q_i + shift)^{w_i} - shift.
inline double fuse_multiscale_shifted(const std::vector<double>& scores,
                                      const std::vector<double>& weights, double shift) {
  if (!std::isfinite(shift) || shift < 0.0)
    throw InvalidArgument("fuse_multiscale_shifted: shift must be finite and >= 0");
  std::vector<double> shifted(scores);
  for (auto& s : shifted) s += shift;
  return fuse_multiscale(shifted, weights) - shift;
}

}  // namespace vqa
