#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vqa/common.hpp"
#include "vqa/image.hpp"
#include "vqa/video_io.hpp"

namespace vqa {

// Two sparse views per video: one high-resolution key frame per chunk for
// the spatial path, and every chunk frame at low resolution for the motion
// path.

struct FrameRange {
  int64_t begin = 0;  // inclusive
  int64_t end = 0;    // exclusive
  int64_t length() const { return end - begin; }
};

struct SamplingPlan {
  double tau_s = 1.0;
  int64_t chunk_count = 0;      // N_c
  int64_t frames_per_chunk = 0; // N_f = round(r * tau)
  std::vector<int64_t> key_frame_indices;
  std::vector<FrameRange> chunk_ranges;
};

struct SamplingConfig {
  double tau_s = 1.0;
  int resize_min = 520;   // key frame: min dimension after aspect-preserving resize
  int crop_size = 448;    // key frame: square crop fed to the backbone
  int motion_frames = 32; // T_m fed to the motion network
  int motion_size = 224;  // motion path spatial resolution

  void validate() const {
    if (tau_s <= 0.0) throw InvalidArgument("sampling: tau must be positive");
    if (resize_min < 1 || crop_size < 1 || motion_frames < 1 || motion_size < 1)
      throw InvalidArgument("sampling: non-positive size field");
    if (crop_size > resize_min)
      throw InvalidArgument("sampling: crop_size must not exceed resize_min");
  }
};

enum class SampleMode { kTrain, kTest };

struct ChunkSample {
  Image key_frame;                  // crop_size x crop_size x 3
  std::vector<Image> motion_frames; // exactly motion_frames entries, motion_size square
};

// Chunks are contiguous [i*N_f, (i+1)*N_f); the key frame is the first
// frame of each chunk. Trailing frames beyond N_c*N_f are dropped. Videos
// shorter than one chunk become a single short chunk (padded at decode).
inline SamplingPlan build_sampling_plan(const VideoMeta& meta, double tau_s) {
  meta.validate();
  if (tau_s <= 0.0) throw InvalidArgument("build_sampling_plan: tau must be positive");

  SamplingPlan plan;
  plan.tau_s = tau_s;
  plan.frames_per_chunk = std::max<int64_t>(1, std::llround(meta.frame_rate * tau_s));

  if (meta.frame_count >= plan.frames_per_chunk) {
    plan.chunk_count = meta.frame_count / plan.frames_per_chunk;
    for (int64_t i = 0; i < plan.chunk_count; ++i) {
      const int64_t begin = i * plan.frames_per_chunk;
      plan.chunk_ranges.push_back({begin, begin + plan.frames_per_chunk});
      plan.key_frame_indices.push_back(begin);
    }
  } else {
    plan.chunk_count = 1;
    plan.chunk_ranges.push_back({0, meta.frame_count});
    plan.key_frame_indices.push_back(0);
  }
  return plan;
}

// Uniform temporal resample of a chunk's N_f slots onto T_m outputs,
// with repetition when T_m > N_f: source slot = round(j * N_f / T_m).
inline std::vector<int64_t> uniform_resample_indices(int64_t available, int64_t wanted) {
  if (available < 1 || wanted < 1)
    throw InvalidArgument("uniform_resample_indices: empty input");
  std::vector<int64_t> out(static_cast<size_t>(wanted));
  for (int64_t j = 0; j < wanted; ++j) {
    const int64_t src = std::llround(static_cast<double>(j) * available / wanted);
    out[static_cast<size_t>(j)] = std::min(src, available - 1);
  }
  return out;
}

// Decode one chunk into its two views. Deterministic for a fixed
// (seed, chunk); different chunks may be decoded concurrently.
inline ChunkSample decode_chunk(const FrameSource& source, const SamplingPlan& plan,
                                int64_t chunk_index, SampleMode mode, uint64_t seed,
                                const SamplingConfig& cfg, AccessCounters* counters = nullptr,
                                bool want_key = true, bool want_motion = true) {
  cfg.validate();
  if (chunk_index < 0 || chunk_index >= plan.chunk_count)
    throw InvalidArgument("decode_chunk: chunk index " + std::to_string(chunk_index) +
                          " out of range [0, " + std::to_string(plan.chunk_count) + ")");
  if (!want_key && !want_motion)
    throw InvalidArgument("decode_chunk: nothing requested");

  const FrameRange range = plan.chunk_ranges[static_cast<size_t>(chunk_index)];
  ChunkSample sample;

  // Spatial view: one key frame, min dimension to resize_min, square crop.
  if (want_key) {
    const Image raw = source.read_frame(plan.key_frame_indices[static_cast<size_t>(chunk_index)]);
    if (counters) ++counters->frames_decoded;
    const Image resized = resize_min_dimension(raw, cfg.resize_min);
    sample.key_frame = mode == SampleMode::kTrain
                           ? random_crop(resized, cfg.crop_size, mix_seed(seed, static_cast<uint64_t>(chunk_index)))
                           : center_crop(resized, cfg.crop_size);
    if (counters) ++counters->key_frame_preprocess;
  }

  // Motion view: every chunk frame at low resolution. Short chunks pad by
  // repeating the last frame up to N_f, then resample N_f -> T_m.
  if (want_motion) {
    const int64_t real = range.length();
    std::vector<Image> low;
    low.reserve(static_cast<size_t>(real));
    for (int64_t f = range.begin; f < range.end; ++f) {
      const Image raw = source.read_frame(f);
      if (counters) {
        ++counters->frames_decoded;
        ++counters->motion_frame_preprocess;
      }
      low.push_back(resize_bilinear(raw, cfg.motion_size, cfg.motion_size));
    }
    const int64_t padded = std::max<int64_t>(real, plan.frames_per_chunk);
    const auto indices = uniform_resample_indices(padded, cfg.motion_frames);
    sample.motion_frames.reserve(indices.size());
    for (const int64_t idx : indices)
      sample.motion_frames.push_back(low[static_cast<size_t>(std::min(idx, real - 1))]);
  }
  return sample;
}

}  // namespace vqa
