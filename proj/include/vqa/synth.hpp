#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vqa/common.hpp"
#include "vqa/image.hpp"
#include "vqa/manifest.hpp"
#include "vqa/video_io.hpp"

namespace vqa {

// Desk-scale stand-in for the licensed UGC databases: procedural clips
// (drifting gratings plus a moving blob) degraded by Gaussian blur, additive
// noise, and frame jitter, with an oracle MOS that decreases strictly in a
// weighted degradation index. Everything derives from one seed.

struct SynthProfile {
  int width = 80;
  int height = 64;
  int min_frames = 64;
  int max_frames = 96;
  int fps_num = 16;
  int fps_den = 1;
  double max_blur = 2.2;    // sigma_b, px
  double max_noise = 0.12;  // sigma_n, in [0,1] intensity units
  double max_jitter = 3.0;  // j, px

  double fps() const { return static_cast<double>(fps_num) / fps_den; }

  void validate() const {
    if (width < 8 || height < 8) throw InvalidArgument("synth: frame too small");
    if (min_frames < 2 || max_frames < min_frames)
      throw InvalidArgument("synth: bad frame-count range");
    if (fps_num < 1 || fps_den < 1) throw InvalidArgument("synth: bad frame rate");
    if (max_blur < 0 || max_noise < 0 || max_jitter < 0)
      throw InvalidArgument("synth: negative degradation bound");
  }

  static SynthProfile stub() { return SynthProfile{}; }
};

struct DegradationParams {
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;
  double jitter_amp = 0.0;
};

// Weighted combination of normalized degradation strengths, in [0,1].
inline double degradation_index(const DegradationParams& p, const SynthProfile& profile) {
  const double b = profile.max_blur > 0 ? p.blur_sigma / profile.max_blur : 0.0;
  const double n = profile.max_noise > 0 ? p.noise_sigma / profile.max_noise : 0.0;
  const double j = profile.max_jitter > 0 ? p.jitter_amp / profile.max_jitter : 0.0;
  return 0.5 * b + 0.3 * n + 0.2 * j;
}

// MOS on [1,5], strictly decreasing in the index; pristine content scores 5.
inline double oracle_mos(const DegradationParams& p, const SynthProfile& profile) {
  return 5.0 - 4.0 * degradation_index(p, profile);
}

struct SynthVideoSpec {
  int index = 0;
  uint64_t seed = 0;  // content + degradation seed for this clip
  int frames = 0;
  DegradationParams degradation;
  double mos = 0.0;
};

// Deterministic per-clip plan; the first clip is kept pristine so the MOS
// scale's top is realized.
inline std::vector<SynthVideoSpec> plan_synthetic(int n_videos, uint64_t seed,
                                                  const SynthProfile& profile) {
  profile.validate();
  if (n_videos < 2) throw InvalidArgument("plan_synthetic: need at least 2 videos");
  std::vector<SynthVideoSpec> plan(static_cast<size_t>(n_videos));
  for (int i = 0; i < n_videos; ++i) {
    SynthVideoSpec& s = plan[static_cast<size_t>(i)];
    s.index = i;
    s.seed = mix_seed(seed, 0xc11b, static_cast<uint64_t>(i));
    std::mt19937_64 rng(s.seed);
    std::uniform_int_distribution<int> frame_dist(profile.min_frames, profile.max_frames);
    s.frames = frame_dist(rng);
    if (i > 0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      s.degradation.blur_sigma = u(rng) * profile.max_blur;
      s.degradation.noise_sigma = u(rng) * profile.max_noise;
      s.degradation.jitter_amp = u(rng) * profile.max_jitter;
    }
    s.mos = oracle_mos(s.degradation, profile);
  }
  return plan;
}

namespace detail {
// Two ingredient groups per scene. Low-frequency gratings plus a moving blob
// carry the per-clip "content" variation; three fixed-amplitude texture
// carriers (mid and high spatial frequency) give the frame energy in the
// bands where blur in [0, max_blur] actually attenuates, so degradation
// strength stays observable no matter what content was drawn.
struct SceneParams {
  double f1x, f1y, p1, w1, f2x, f2y, p2, w2;
  double a1[3], a2[3], b[3];
  double cx_amp, cy_amp, cw, cphi;
  double radius;
  double ux, uy, pu, wu;  // texture carrier, |f| ~ 1.0-1.2 rad/px
  double vx, vy, pv;      // texture carrier, |f| ~ 1.7-2.0 rad/px
  double mx, my, pm, wm;  // texture carrier, |f| ~ 0.5-0.65 rad/px
};

inline SceneParams make_scene(uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x5ce4e));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SceneParams s{};
  s.f1x = 0.05 + 0.25 * u(rng);
  s.f1y = 0.05 + 0.25 * u(rng);
  s.p1 = 6.2831853 * u(rng);
  s.w1 = 0.1 + 0.4 * u(rng);
  s.f2x = 0.05 + 0.25 * u(rng);
  s.f2y = 0.05 + 0.25 * u(rng);
  s.p2 = 6.2831853 * u(rng);
  s.w2 = 0.1 + 0.4 * u(rng);
  for (int c = 0; c < 3; ++c) {
    s.a1[c] = 0.05 + 0.07 * u(rng);
    s.a2[c] = 0.05 + 0.07 * u(rng);
    s.b[c] = 0.10 + 0.12 * u(rng);
  }
  s.cx_amp = 0.25 + 0.10 * u(rng);  // fraction of width
  s.cy_amp = 0.25 + 0.10 * u(rng);
  s.cw = 0.05 + 0.15 * u(rng);      // rad per frame
  s.cphi = 6.2831853 * u(rng);
  s.radius = 8.0 + 8.0 * u(rng);
  auto carrier = [&](double lo, double hi, double& fx, double& fy) {
    const double mag = lo + (hi - lo) * u(rng);
    const double ang = 3.14159265 * u(rng);
    fx = mag * std::cos(ang);
    fy = mag * std::sin(ang);
  };
  carrier(1.0, 1.2, s.ux, s.uy);
  s.pu = 6.2831853 * u(rng);
  s.wu = 0.02 + 0.06 * u(rng);
  carrier(1.7, 2.0, s.vx, s.vy);
  s.pv = 6.2831853 * u(rng);
  carrier(0.5, 0.65, s.mx, s.my);
  s.pm = 6.2831853 * u(rng);
  s.wm = 0.02 + 0.06 * u(rng);
  return s;
}

// Clean content sample at (possibly jitter-shifted) coordinates.
inline void scene_pixel(const SceneParams& s, int width, int height, double x, double y, int t,
                        double out[3]) {
  const double g1 = std::sin(s.f1x * x + s.f1y * y + s.p1 + s.w1 * t);
  const double g2 = std::sin(s.f2x * x - s.f2y * y + s.p2 + s.w2 * t);
  const double cx = width * (0.5 + s.cx_amp * std::sin(s.cw * t + s.cphi));
  const double cy = height * (0.5 + s.cy_amp * std::cos(s.cw * t + 0.7 * s.cphi));
  const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
  const double blob = std::exp(-d2 / (2.0 * s.radius * s.radius));
  const double tex = 0.07 * std::sin(s.ux * x + s.uy * y + s.pu + s.wu * t) +
                     0.06 * std::sin(s.vx * x + s.vy * y + s.pv) +
                     0.08 * std::sin(s.mx * x + s.my * y + s.pm + s.wm * t);
  for (int c = 0; c < 3; ++c) out[c] = 0.5 + s.a1[c] * g1 + s.a2[c] * g2 + s.b[c] * blob + tex;
}
}  // namespace detail

// Render one frame of a clip: jittered content, then blur, then noise.
inline Image render_synthetic_frame(const SynthVideoSpec& spec, const SynthProfile& profile,
                                    int t) {
  const detail::SceneParams scene = detail::make_scene(spec.seed);

  double dx = 0.0, dy = 0.0;
  if (spec.degradation.jitter_amp > 0.0) {
    std::mt19937_64 rng(mix_seed(spec.seed, 0x717e4, static_cast<uint64_t>(t)));
    std::uniform_real_distribution<double> u(-spec.degradation.jitter_amp,
                                             spec.degradation.jitter_amp);
    dx = u(rng);
    dy = u(rng);
  }

  Image frame(profile.height, profile.width, 3);
  double px[3];
  for (int y = 0; y < profile.height; ++y)
    for (int x = 0; x < profile.width; ++x) {
      detail::scene_pixel(scene, profile.width, profile.height, x + dx, y + dy, t, px);
      for (int c = 0; c < 3; ++c) frame.at(y, x, c) = px[c];
    }

  if (spec.degradation.blur_sigma > 0.0) frame = gaussian_blur(frame, spec.degradation.blur_sigma);

  if (spec.degradation.noise_sigma > 0.0) {
    std::mt19937_64 rng(mix_seed(spec.seed, 0x4015e, static_cast<uint64_t>(t)));
    std::normal_distribution<double> g(0.0, spec.degradation.noise_sigma);
    for (auto& v : frame.data) v += g(rng);
  }

  for (auto& v : frame.data) v = std::clamp(v, 0.0, 1.0);
  return frame;
}

inline void write_synthetic_clip(const std::string& path, const SynthVideoSpec& spec,
                                 const SynthProfile& profile) {
  profile.validate();
  Y4mWriter writer(path, profile.width, profile.height, profile.fps_num, profile.fps_den);
  for (int t = 0; t < spec.frames; ++t) writer.write_frame(render_synthetic_frame(spec, profile, t));
  writer.close();
}

// Generate clips + manifest under out_dir. Returns the loaded-back manifest
// (paths resolved), so callers get exactly what load_manifest would see.
inline DatasetManifest synthesize_dataset(int n_videos, uint64_t seed, const SynthProfile& profile,
                                          const std::string& out_dir,
                                          const std::string& dataset_name = "synthetic") {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "clips", ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  const auto plan = plan_synthetic(n_videos, seed, profile);

  DatasetManifest m;
  m.name = dataset_name;
  for (const auto& spec : plan) {
    char name[32];
    std::snprintf(name, sizeof(name), "clips/v%04d.y4m", spec.index);
    const std::string rel(name);
    write_synthetic_clip((fs::path(out_dir) / rel).string(), spec, profile);

    ManifestRecord rec;
    rec.uri = rel;
    rec.mos = spec.mos;
    rec.width = profile.width;
    rec.height = profile.height;
    rec.frames = spec.frames;
    rec.fps = profile.fps();
    m.records.push_back(std::move(rec));
  }
  const std::string manifest_path = (fs::path(out_dir) / "manifest.txt").string();
  save_manifest(m, manifest_path);
  return load_manifest(manifest_path);
}

}  // namespace vqa
