#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vqa/common.hpp"

namespace vqa {

// Interleaved HxWxC image, values nominally in [0,1], double precision.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || c < 1) throw InvalidArgument("Image: non-positive dimensions");
    data.assign(static_cast<size_t>(h) * w * c, 0.0);
  }

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }
};

// Bilinear resample to out_h x out_w. Handles both up- and downscaling;
// pixel centers aligned (the usual half-pixel convention).
inline Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resize_bilinear: non-positive target");
  if (out_h == src.height && out_w == src.width) return src;
  Image dst(out_h, out_w, src.channels);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
        const double bot = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
        dst.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return dst;
}

// Scale so the minimum dimension equals min_dim, aspect preserved
// (rounded to nearest pixel). Frames below min_dim get upscaled.
inline Image resize_min_dimension(const Image& src, int min_dim) {
  if (min_dim < 1) throw InvalidArgument("resize_min_dimension: non-positive target");
  const int cur = std::min(src.height, src.width);
  const double scale = static_cast<double>(min_dim) / cur;
  int out_h, out_w;
  if (src.height <= src.width) {
    out_h = min_dim;
    out_w = std::max(1, static_cast<int>(std::lround(src.width * scale)));
  } else {
    out_w = min_dim;
    out_h = std::max(1, static_cast<int>(std::lround(src.height * scale)));
  }
  return resize_bilinear(src, out_h, out_w);
}

inline Image crop(const Image& src, int top, int left, int size) {
  if (size < 1 || top < 0 || left < 0 || top + size > src.height || left + size > src.width)
    throw InvalidArgument("crop: window outside image");
  Image dst(size, size, src.channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = src.at(top + y, left + x, c);
  return dst;
}

inline Image center_crop(const Image& src, int size) {
  if (src.height < size || src.width < size)
    throw InvalidArgument("center_crop: image smaller than crop window");
  return crop(src, (src.height - size) / 2, (src.width - size) / 2, size);
}

// Seeded random crop position; reproducible for a given seed.
inline Image random_crop(const Image& src, int size, uint64_t seed) {
  if (src.height < size || src.width < size)
    throw InvalidArgument("random_crop: image smaller than crop window");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dy(0, src.height - size);
  std::uniform_int_distribution<int> dx(0, src.width - size);
  const int top = dy(rng);
  const int left = dx(rng);
  return crop(src, top, left, size);
}

// Separable Gaussian blur with sigma in pixels; radius 3*sigma, edge clamp.
// sigma <= 0 is the identity.
inline Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& k : kernel) k /= sum;

  Image tmp(src.height, src.width, src.channels);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = std::clamp(x + i, 0, src.width - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * src.at(y, xx, c);
        }
        tmp.at(y, x, c) = acc;
      }
  Image dst(src.height, src.width, src.channels);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = std::clamp(y + i, 0, src.height - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(yy, x, c);
        }
        dst.at(y, x, c) = acc;
      }
  return dst;
}

// BT.601 studio-swing RGB <-> YCbCr, both sides in [0,1] doubles.
// Quantization to 8 bits happens at the container boundary.
inline void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb, double& cr) {
  y = (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
  cb = (128.0 - 37.797 * r - 74.203 * g + 112.0 * b) / 255.0;
  cr = (128.0 + 112.0 * r - 93.786 * g - 18.214 * b) / 255.0;
}

inline void ycbcr_to_rgb(double y, double cb, double cr, double& r, double& g, double& b) {
  const double yy = (y * 255.0 - 16.0) / 219.0;
  const double pb = (cb * 255.0 - 128.0) / 224.0;
  const double pr = (cr * 255.0 - 128.0) / 224.0;
  r = std::clamp(yy + 1.402 * pr, 0.0, 1.0);
  g = std::clamp(yy - 0.344136 * pb - 0.714136 * pr, 0.0, 1.0);
  b = std::clamp(yy + 1.772 * pb, 0.0, 1.0);
}

}  // namespace vqa
