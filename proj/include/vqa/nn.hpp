#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vqa/common.hpp"
#include "vqa/image.hpp"

namespace vqa {

// HxWxC activation tensor, double precision throughout: the gradient
// contracts (finite-difference agreement at 1e-3/1e-4 relative) leave no
// room for float32 noise at desk scale.
struct Tensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || c < 1) throw InvalidArgument("Tensor: non-positive dimensions");
    v.assign(static_cast<size_t>(h) * w * c, 0.0);
  }

  double& at(int y, int x, int c) { return v[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const {
    return v[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return v.size(); }
};

inline Tensor tensor_from_image(const Image& img) {
  Tensor t(img.height, img.width, img.channels);
  t.v = img.data;
  return t;
}

// Named view of one trainable parameter block and its gradient accumulator.
struct ParamRef {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

inline void zero_grads(std::vector<ParamRef>& params) {
  for (auto& p : params) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

// 3x3-style convolution, NHWC single image, zero padding.
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int ksize = 3;
  int stride = 1;
  int pad = 1;
  std::vector<double> w;   // [out][ky][kx][in]
  std::vector<double> b;   // [out]
  std::vector<double> gw;
  std::vector<double> gb;

  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int k, int s, int p, std::mt19937_64& rng)
      : in_channels(in_ch), out_channels(out_ch), ksize(k), stride(s), pad(p) {
    const size_t n = static_cast<size_t>(out_ch) * k * k * in_ch;
    w.resize(n);
    b.assign(static_cast<size_t>(out_ch), 0.0);
    gw.assign(n, 0.0);
    gb.assign(static_cast<size_t>(out_ch), 0.0);
    // He-style init for rectifier nets
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (k * k * in_ch)));
    for (auto& x : w) x = dist(rng);
  }

  int out_dim(int in_dim) const { return (in_dim + 2 * pad - ksize) / stride + 1; }

  double& wat(int oc, int ky, int kx, int ic) {
    return w[((static_cast<size_t>(oc) * ksize + ky) * ksize + kx) * in_channels + ic];
  }
  double wat(int oc, int ky, int kx, int ic) const {
    return w[((static_cast<size_t>(oc) * ksize + ky) * ksize + kx) * in_channels + ic];
  }

  Tensor forward(const Tensor& x) const {
    if (x.channels != in_channels) throw ContractViolation("Conv2d: input channel mismatch");
    Tensor y(out_dim(x.height), out_dim(x.width), out_channels);
    for (int oy = 0; oy < y.height; ++oy)
      for (int ox = 0; ox < y.width; ++ox)
        for (int oc = 0; oc < out_channels; ++oc) {
          double acc = b[static_cast<size_t>(oc)];
          for (int ky = 0; ky < ksize; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.height) continue;
            for (int kx = 0; kx < ksize; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.width) continue;
              for (int ic = 0; ic < in_channels; ++ic)
                acc += wat(oc, ky, kx, ic) * x.at(iy, ix, ic);
            }
          }
          y.at(oy, ox, oc) = acc;
        }
    return y;
  }

  // Accumulates gw/gb; writes the input gradient into gx when non-null.
  void backward(const Tensor& x, const Tensor& gy, Tensor* gx) {
    if (gx) *gx = Tensor(x.height, x.width, x.channels);
    for (int oy = 0; oy < gy.height; ++oy)
      for (int ox = 0; ox < gy.width; ++ox)
        for (int oc = 0; oc < out_channels; ++oc) {
          const double g = gy.at(oy, ox, oc);
          if (g == 0.0) continue;
          gb[static_cast<size_t>(oc)] += g;
          for (int ky = 0; ky < ksize; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.height) continue;
            for (int kx = 0; kx < ksize; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.width) continue;
              for (int ic = 0; ic < in_channels; ++ic) {
                gw[((static_cast<size_t>(oc) * ksize + ky) * ksize + kx) * in_channels + ic] +=
                    g * x.at(iy, ix, ic);
                if (gx) gx->at(iy, ix, ic) += g * wat(oc, ky, kx, ic);
              }
            }
          }
        }
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

inline Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.v) v = v > 0.0 ? v : 0.0;
  return y;
}

// Gradient through relu given the forward *output* (mask y > 0).
inline Tensor relu_backward(const Tensor& y, const Tensor& gy) {
  Tensor gx = gy;
  for (size_t i = 0; i < gx.v.size(); ++i)
    if (y.v[i] <= 0.0) gx.v[i] = 0.0;
  return gx;
}

// Per-channel spatial mean and population standard deviation (divide by
// H*W). Constant maps give std 0.
inline void channel_stats(const Tensor& x, std::vector<double>& mean, std::vector<double>& stddev) {
  if (x.height * x.width < 1) throw InvalidArgument("channel_stats: empty feature map");
  const double n = static_cast<double>(x.height) * x.width;
  mean.assign(static_cast<size_t>(x.channels), 0.0);
  stddev.assign(static_cast<size_t>(x.channels), 0.0);
  for (int y = 0; y < x.height; ++y)
    for (int xx = 0; xx < x.width; ++xx)
      for (int c = 0; c < x.channels; ++c) mean[static_cast<size_t>(c)] += x.at(y, xx, c);
  for (auto& m : mean) m /= n;
  for (int y = 0; y < x.height; ++y)
    for (int xx = 0; xx < x.width; ++xx)
      for (int c = 0; c < x.channels; ++c) {
        const double d = x.at(y, xx, c) - mean[static_cast<size_t>(c)];
        stddev[static_cast<size_t>(c)] += d * d;
      }
  for (auto& s : stddev) s = std::sqrt(s / n);
}

// d(mean_c)/dx = 1/(HW); d(std_c)/dx_i = (x_i - mean_c) / (HW * std_c),
// with the zero-variance subgradient taken as 0.
inline Tensor channel_stats_backward(const Tensor& x, const std::vector<double>& mean,
                                     const std::vector<double>& stddev,
                                     std::span<const double> gmean, std::span<const double> gstd) {
  const double n = static_cast<double>(x.height) * x.width;
  Tensor gx(x.height, x.width, x.channels);
  for (int y = 0; y < x.height; ++y)
    for (int xx = 0; xx < x.width; ++xx)
      for (int c = 0; c < x.channels; ++c) {
        const size_t ci = static_cast<size_t>(c);
        double g = gmean[ci] / n;
        if (stddev[ci] > 1e-12)
          g += gstd[ci] * (x.at(y, xx, c) - mean[ci]) / (n * stddev[ci]);
        gx.at(y, xx, c) = g;
      }
  return gx;
}

// Fully connected layer on flat vectors.
struct Linear {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> w;   // [out][in]
  std::vector<double> b;   // [out]
  std::vector<double> gw;
  std::vector<double> gb;

  Linear() = default;
  Linear(int in, int out, std::mt19937_64& rng) : in_dim(in), out_dim(out) {
    w.resize(static_cast<size_t>(in) * out);
    b.assign(static_cast<size_t>(out), 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
    for (auto& x : w) x = dist(rng);
  }

  std::vector<double> forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_dim)
      throw ContractViolation("Linear: input width " + std::to_string(x.size()) +
                              " does not match layer width " + std::to_string(in_dim));
    std::vector<double> y(static_cast<size_t>(out_dim));
    for (int o = 0; o < out_dim; ++o) {
      double acc = b[static_cast<size_t>(o)];
      const double* row = &w[static_cast<size_t>(o) * in_dim];
      for (int i = 0; i < in_dim; ++i) acc += row[i] * x[static_cast<size_t>(i)];
      y[static_cast<size_t>(o)] = acc;
    }
    return y;
  }

  std::vector<double> backward(std::span<const double> x, std::span<const double> gy) {
    std::vector<double> gx(static_cast<size_t>(in_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double g = gy[static_cast<size_t>(o)];
      gb[static_cast<size_t>(o)] += g;
      double* grow = &gw[static_cast<size_t>(o) * in_dim];
      const double* row = &w[static_cast<size_t>(o) * in_dim];
      for (int i = 0; i < in_dim; ++i) {
        grow[i] += g * x[static_cast<size_t>(i)];
        gx[static_cast<size_t>(i)] += g * row[i];
      }
    }
    return gx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
  }
};

// Adaptive-moment gradient descent over whatever ParamRefs are registered.
struct Adam {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  explicit Adam(double learning_rate) : lr(learning_rate) {}

  void step(std::vector<ParamRef>& params) {
    if (m.empty()) {
      for (const auto& p : params) {
        m.emplace_back(p.value->size(), 0.0);
        v.emplace_back(p.value->size(), 0.0);
      }
    }
    if (m.size() != params.size()) throw ContractViolation("Adam: parameter set changed mid-run");
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t p = 0; p < params.size(); ++p) {
      auto& val = *params[p].value;
      auto& grad = *params[p].grad;
      if (val.size() != m[p].size()) throw ContractViolation("Adam: parameter shape changed");
      for (size_t i = 0; i < val.size(); ++i) {
        m[p][i] = beta1 * m[p][i] + (1.0 - beta1) * grad[i];
        v[p][i] = beta2 * v[p][i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = m[p][i] / bc1;
        const double vhat = v[p][i] / bc2;
        val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

}  // namespace vqa
