#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vqa/common.hpp"
#include "vqa/csf.hpp"
#include "vqa/features.hpp"
#include "vqa/losses.hpp"
#include "vqa/manifest.hpp"
#include "vqa/metrics.hpp"
#include "vqa/nn.hpp"
#include "vqa/quality_head.hpp"
#include "vqa/sampling.hpp"
#include "vqa/video_io.hpp"

namespace vqa {

// End-to-end orchestration: model assembly, seeded training on chunk
// samples, split evaluation, cross-database transfer, single-video scoring
// (optionally multi-scale), checkpoints.

struct TrainConfig {
  std::string profile = "paper";
  std::string backbone = "resnet50_imagenet";
  std::string motion = "slowfast_r50_kinetics";
  std::string feature_mode = "s+m";        // s+m | s | m
  std::string chunk_mode = "random_chunk"; // random_chunk | pooled_video
  double learning_rate = 1e-5;
  int batch_size = 8;
  int epochs = 10;
  double lambda = 1.0;
  double tau_s = 1.0;
  int resize_min = 520;
  int crop_size = 448;
  int motion_frames = 32;  // T_m
  int motion_size = 224;
  int hidden_dim = 128;
  uint64_t seed = 1;
  bool cache_motion = true;
  int threads = 0;  // 0 = library default

  void validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("config: learning_rate must be > 0");
    if (batch_size < 1) throw InvalidArgument("config: batch_size must be >= 1");
    if (epochs < 1) throw InvalidArgument("config: epochs must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("config: lambda must be >= 0");
    if (hidden_dim < 1) throw InvalidArgument("config: hidden_dim must be >= 1");
    if (threads < 0) throw InvalidArgument("config: threads must be >= 0");
    if (feature_mode != "s+m" && feature_mode != "s" && feature_mode != "m")
      throw InvalidArgument("config: feature_mode must be one of s+m, s, m");
    if (chunk_mode != "random_chunk" && chunk_mode != "pooled_video")
      throw InvalidArgument("config: chunk_mode must be random_chunk or pooled_video");
    if (profile != "paper" && profile != "stub")
      throw InvalidArgument("config: profile must be paper or stub");
    sampling().validate();
  }

  SamplingConfig sampling() const {
    SamplingConfig s;
    s.tau_s = tau_s;
    s.resize_min = resize_min;
    s.crop_size = crop_size;
    s.motion_frames = motion_frames;
    s.motion_size = motion_size;
    return s;
  }

  AdapterBuildContext adapter_context() const {
    AdapterBuildContext ctx;
    ctx.seed = mix_seed(seed, 0xada7u);
    ctx.crop_size = crop_size;
    ctx.motion_size = motion_size;
    ctx.motion_frames = motion_frames;
    return ctx;
  }

  static TrainConfig paper_profile() { return TrainConfig{}; }

  static TrainConfig stub_profile() {
    TrainConfig c;
    c.profile = "stub";
    c.backbone = "stub_cnn";
    c.motion = "stub_motion";
    c.learning_rate = 0.02;
    c.epochs = 30;
    c.resize_min = 64;
    c.crop_size = 56;
    c.motion_frames = 16;
    c.motion_size = 32;
    return c;
  }

  static TrainConfig from_profile_name(const std::string& name) {
    if (name == "paper") return paper_profile();
    if (name == "stub") return stub_profile();
    throw InvalidArgument("unknown profile '" + name + "' (paper, stub)");
  }
};

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["profile"] = c.profile;
  j["backbone"] = c.backbone;
  j["motion"] = c.motion;
  j["feature_mode"] = c.feature_mode;
  j["chunk_mode"] = c.chunk_mode;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["lambda"] = c.lambda;
  j["tau_s"] = c.tau_s;
  j["resize_min"] = c.resize_min;
  j["crop_size"] = c.crop_size;
  j["motion_frames"] = c.motion_frames;
  j["motion_size"] = c.motion_size;
  j["hidden_dim"] = c.hidden_dim;
  j["seed"] = c.seed;
  j["cache_motion"] = c.cache_motion;
  j["threads"] = c.threads;
  return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("profile")) c = TrainConfig::from_profile_name(j.at("profile").get<std::string>());
  static const std::vector<std::string> known = {
      "profile",     "backbone",      "motion",     "feature_mode", "chunk_mode",
      "learning_rate", "batch_size",  "epochs",     "lambda",       "tau_s",
      "resize_min",  "crop_size",     "motion_frames", "motion_size", "hidden_dim",
      "seed",        "cache_motion",  "threads"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ValidationError("unknown training config key", {"key '" + key + "' is not recognized"});
  }
  if (j.contains("backbone")) c.backbone = j.at("backbone").get<std::string>();
  if (j.contains("motion")) c.motion = j.at("motion").get<std::string>();
  if (j.contains("feature_mode")) c.feature_mode = j.at("feature_mode").get<std::string>();
  if (j.contains("chunk_mode")) c.chunk_mode = j.at("chunk_mode").get<std::string>();
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
  if (j.contains("tau_s")) c.tau_s = j.at("tau_s").get<double>();
  if (j.contains("resize_min")) c.resize_min = j.at("resize_min").get<int>();
  if (j.contains("crop_size")) c.crop_size = j.at("crop_size").get<int>();
  if (j.contains("motion_frames")) c.motion_frames = j.at("motion_frames").get<int>();
  if (j.contains("motion_size")) c.motion_size = j.at("motion_size").get<int>();
  if (j.contains("hidden_dim")) c.hidden_dim = j.at("hidden_dim").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("cache_motion")) c.cache_motion = j.at("cache_motion").get<bool>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

class VqaModel {
 public:
  TrainConfig config;
  std::unique_ptr<BackboneAdapter> backbone;
  std::unique_ptr<MotionAdapter> motion;
  MlpHead head;

  static VqaModel create(const TrainConfig& cfg) {
    cfg.validate();
    VqaModel m;
    m.config = cfg;
    const AdapterBuildContext ctx = cfg.adapter_context();
    if (cfg.feature_mode != "m") m.backbone = make_backbone(cfg.backbone, ctx);
    if (cfg.feature_mode != "s") {
      m.motion = make_motion(cfg.motion, ctx);
      if (m.motion->input_size() != cfg.motion_size ||
          m.motion->expected_frames() != cfg.motion_frames)
        throw InvalidArgument("motion adapter '" + cfg.motion + "' expects " +
                              std::to_string(m.motion->expected_frames()) + " frames at " +
                              std::to_string(m.motion->input_size()) +
                              "px; config disagrees");
    }
    m.head = MlpHead(m.feature_dim(), cfg.hidden_dim, mix_seed(cfg.seed, 0x4eadu));
    return m;
  }

  bool use_spatial() const { return config.feature_mode != "m"; }
  bool use_motion() const { return config.feature_mode != "s"; }

  int spatial_dim() const {
    if (!use_spatial()) return 0;
    int sum = 0;
    for (const int c : backbone->stage_channels()) sum += c;
    return 2 * sum;
  }

  int feature_dim() const {
    return spatial_dim() + (use_motion() ? motion->embedding_dim() : 0);
  }

  std::vector<ParamRef> trainable_params() {
    std::vector<ParamRef> out;
    if (use_spatial())
      for (auto& p : backbone->params()) out.push_back(p);
    for (auto& p : head.params()) out.push_back(p);
    return out;
  }

  std::vector<double> motion_embedding(const ChunkSample& sample) const {
    return motion_features(sample.motion_frames, *motion);
  }

  // Inference-path chunk score. cached_motion skips re-embedding.
  double score_chunk(const ChunkSample& sample, const std::vector<double>* cached_motion = nullptr) const {
    std::vector<double> feature;
    if (use_spatial()) {
      const SpatialFeatureVector fs = spatial_features(sample.key_frame, *backbone);
      feature = fs.values;
    }
    if (use_motion()) {
      const std::vector<double> fm = cached_motion ? *cached_motion : motion_embedding(sample);
      feature.insert(feature.end(), fm.begin(), fm.end());
    }
    return head.regress(feature);
  }

  // Training-path forward state, kept until the matching backward call.
  struct ChunkForward {
    double pred = 0.0;
    std::vector<double> feature;
    std::vector<Tensor> stage_maps;
    std::vector<std::vector<double>> means, stds;
    std::unique_ptr<StageCache> cache;
  };

  ChunkForward forward_chunk(const ChunkSample& sample,
                             const std::vector<double>* cached_motion = nullptr) {
    ChunkForward f;
    if (use_spatial()) {
      f.stage_maps = backbone->stages_cached(sample.key_frame, f.cache);
      const auto declared = backbone->stage_channels();
      if (f.stage_maps.size() != declared.size())
        throw ContractViolation("backbone stage count changed between calls");
      for (size_t k = 0; k < f.stage_maps.size(); ++k) {
        std::vector<double> mean, stddev;
        channel_stats(f.stage_maps[k], mean, stddev);
        f.feature.insert(f.feature.end(), mean.begin(), mean.end());
        f.feature.insert(f.feature.end(), stddev.begin(), stddev.end());
        f.means.push_back(std::move(mean));
        f.stds.push_back(std::move(stddev));
      }
    }
    if (use_motion()) {
      const std::vector<double> fm = cached_motion ? *cached_motion : motion_embedding(sample);
      f.feature.insert(f.feature.end(), fm.begin(), fm.end());
    }
    f.pred = head.regress(f.feature);
    return f;
  }

  // Accumulates parameter gradients for d loss / d pred = gpred.
  void backward_chunk(ChunkForward& f, double gpred) {
    const std::vector<double> gfeat = head.regress_backward(f.feature, gpred);
    if (!use_spatial()) return;
    std::vector<Tensor> stage_grads;
    size_t off = 0;
    for (size_t k = 0; k < f.stage_maps.size(); ++k) {
      const int c = f.stage_maps[k].channels;
      const std::vector<double> gmean(gfeat.begin() + static_cast<std::ptrdiff_t>(off),
                                      gfeat.begin() + static_cast<std::ptrdiff_t>(off + c));
      const std::vector<double> gstd(gfeat.begin() + static_cast<std::ptrdiff_t>(off + c),
                                     gfeat.begin() + static_cast<std::ptrdiff_t>(off + 2 * c));
      stage_grads.push_back(
          channel_stats_backward(f.stage_maps[k], f.means[k], f.stds[k], gmean, gstd));
      off += static_cast<size_t>(2 * c);
    }
    backbone->stages_backward(*f.cache, stage_grads);
  }
};

// ---------------------------------------------------------------------------

struct TrainLogEntry {
  int epoch = 0;
  double loss = 0.0;
  double train_srcc = 0.0;
  bool srcc_defined = false;
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

namespace detail {
struct VideoHandle {
  size_t record_id = 0;
  const ManifestRecord* record = nullptr;
  std::unique_ptr<FrameSource> source;
  SamplingPlan plan;
};

inline VideoHandle open_handle(const DatasetManifest& manifest, size_t id, double tau_s) {
  if (id >= manifest.size())
    throw InvalidArgument("record id " + std::to_string(id) + " outside manifest of size " +
                          std::to_string(manifest.size()));
  VideoHandle h;
  h.record_id = id;
  h.record = &manifest.records[id];
  h.source = open_video(h.record->resolved_uri);
  h.plan = build_sampling_plan(h.source->meta(), tau_s);
  return h;
}

// (video id, chunk) -> frozen motion embedding; valid because the motion
// path has no train-time randomness.
class MotionCache {
 public:
  explicit MotionCache(bool enabled) : enabled_(enabled) {}
  const std::vector<double>* find(size_t id, int64_t chunk) const {
    if (!enabled_) return nullptr;
    const auto it = map_.find(key(id, chunk));
    return it == map_.end() ? nullptr : &it->second;
  }
  void put(size_t id, int64_t chunk, std::vector<double> e) {
    if (enabled_) map_[key(id, chunk)] = std::move(e);
  }

 private:
  static uint64_t key(size_t id, int64_t chunk) {
    return (static_cast<uint64_t>(id) << 24) ^ static_cast<uint64_t>(chunk);
  }
  bool enabled_;
  std::unordered_map<uint64_t, std::vector<double>> map_;
};
}  // namespace detail

// Mean of chunk scores in test mode (center crop, fixed resampling).
inline double score_with_plan(VqaModel& model, const FrameSource& source, const SamplingPlan& plan,
                              detail::MotionCache* cache = nullptr, size_t cache_id = 0,
                              AccessCounters* counters = nullptr) {
  const SamplingConfig scfg = model.config.sampling();
  std::vector<double> chunk_scores;
  chunk_scores.reserve(static_cast<size_t>(plan.chunk_count));
  for (int64_t c = 0; c < plan.chunk_count; ++c) {
    const std::vector<double>* cached = cache ? cache->find(cache_id, c) : nullptr;
    const bool need_motion = model.use_motion() && cached == nullptr;
    ChunkSample sample;  // stays empty when the cache already covers the chunk
    if (model.use_spatial() || need_motion)
      sample = decode_chunk(source, plan, c, SampleMode::kTest, 0, scfg, counters,
                            model.use_spatial(), need_motion);
    std::vector<double> embed;
    const std::vector<double>* motion_ptr = nullptr;
    if (model.use_motion()) {
      if (cached) {
        motion_ptr = cached;
      } else {
        embed = model.motion_embedding(sample);
        if (cache) cache->put(cache_id, c, embed);
        motion_ptr = &embed;
      }
    }
    chunk_scores.push_back(model.score_chunk(sample, motion_ptr));
  }
  return pool_chunk_scores(chunk_scores);
}

// Train backbone + head on the split's training videos. Shuffled mini
// batches of videos; per-video prediction is either one seeded chunk per
// epoch (default) or the pooled mean over all chunks. Reproducible from
// config.seed alone.
inline TrainResult train_model(VqaModel& model, const DatasetManifest& manifest,
                               const SplitSpec& split) {
  model.config.validate();
  const TrainConfig& cfg = model.config;
  if (split.train_ids.empty()) throw InvalidArgument("train_model: empty training split");

  std::vector<detail::VideoHandle> videos;
  videos.reserve(split.train_ids.size());
  for (const size_t id : split.train_ids)
    videos.push_back(detail::open_handle(manifest, id, cfg.tau_s));

  detail::MotionCache motion_cache(cfg.cache_motion && model.use_motion());
  Adam opt(cfg.learning_rate);
  std::vector<ParamRef> params = model.trainable_params();
  const SamplingConfig scfg = cfg.sampling();

  TrainResult result;
  const size_t n = videos.size();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0xe90cu, static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    size_t seen = 0;
    std::vector<double> epoch_preds, epoch_labels;

    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch_size));
      zero_grads(params);

      std::vector<std::vector<VqaModel::ChunkForward>> forwards(stop - start);
      std::vector<double> preds(stop - start), labels(stop - start);

      for (size_t b = start; b < stop; ++b) {
        detail::VideoHandle& v = videos[order[b]];
        const uint64_t vid_tag = static_cast<uint64_t>(v.record_id);
        const uint64_t decode_seed = mix_seed(mix_seed(cfg.seed, 0xdec0u, static_cast<uint64_t>(epoch)), vid_tag);

        std::vector<int64_t> chunk_ids;
        if (cfg.chunk_mode == "random_chunk") {
          const uint64_t pick = mix_seed(mix_seed(cfg.seed, 0xc4a9u, static_cast<uint64_t>(epoch)), vid_tag);
          chunk_ids.push_back(static_cast<int64_t>(pick % static_cast<uint64_t>(v.plan.chunk_count)));
        } else {
          for (int64_t c = 0; c < v.plan.chunk_count; ++c) chunk_ids.push_back(c);
        }

        double pred_sum = 0.0;
        for (const int64_t c : chunk_ids) {
          const std::vector<double>* cached = motion_cache.find(v.record_id, c);
          const bool need_motion = model.use_motion() && cached == nullptr;
          ChunkSample sample;  // stays empty when the cache already covers the chunk
          if (model.use_spatial() || need_motion)
            sample = decode_chunk(*v.source, v.plan, c, SampleMode::kTrain, decode_seed, scfg,
                                  nullptr, model.use_spatial(), need_motion);
          std::vector<double> embed;
          const std::vector<double>* motion_ptr = nullptr;
          if (model.use_motion()) {
            if (cached) {
              motion_ptr = cached;
            } else {
              embed = model.motion_embedding(sample);
              motion_cache.put(v.record_id, c, embed);
              const std::vector<double>* stored = motion_cache.find(v.record_id, c);
              motion_ptr = stored ? stored : &embed;
            }
          }
          forwards[b - start].push_back(model.forward_chunk(sample, motion_ptr));
          pred_sum += forwards[b - start].back().pred;
        }
        preds[b - start] = pred_sum / static_cast<double>(chunk_ids.size());
        labels[b - start] = v.record->mos;
      }

      LossResult loss;
      try {
        loss = total_loss_with_grad(preds, labels, cfg.lambda);
        if (!std::isfinite(loss.value)) throw NumericError("loss is not finite");
      } catch (const NumericError& e) {
        std::string uris;
        for (size_t b = start; b < stop; ++b)
          uris += (uris.empty() ? "" : ", ") + videos[order[b]].record->uri;
        throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) + ": " +
                           e.what() + " (learning_rate=" + std::to_string(cfg.learning_rate) +
                           ", batch: " + uris + ")");
      }

      for (size_t i = 0; i < forwards.size(); ++i) {
        const double share = loss.grad[i] / static_cast<double>(forwards[i].size());
        for (auto& f : forwards[i]) model.backward_chunk(f, share);
      }
      opt.step(params);

      loss_sum += loss.value * static_cast<double>(stop - start);
      seen += stop - start;
      epoch_preds.insert(epoch_preds.end(), preds.begin(), preds.end());
      epoch_labels.insert(epoch_labels.end(), labels.begin(), labels.end());
    }

    TrainLogEntry entry;
    entry.epoch = epoch + 1;
    entry.loss = loss_sum / static_cast<double>(seen);
    try {
      entry.train_srcc = srcc(epoch_preds, epoch_labels);
      entry.srcc_defined = true;
    } catch (const Error&) {  // constant predictions or too few samples
      entry.srcc_defined = false;
    }
    result.log.push_back(entry);
  }

  if (!result.log.empty()) {
    result.initial_loss = result.log.front().loss;
    result.final_loss = result.log.back().loss;
  }
  return result;
}

struct EvalOutput {
  EvalResult metrics;
  std::vector<size_t> ids;
  std::vector<double> predictions;
  std::vector<double> labels;
};

// Score the given records in test mode and correlate against MOS.
inline EvalOutput evaluate_on_ids(VqaModel& model, const DatasetManifest& manifest,
                                  const std::vector<size_t>& ids) {
  if (ids.size() < 3) throw InvalidArgument("evaluate: need at least 3 videos");
  EvalOutput out;
  out.ids = ids;
  out.predictions.assign(ids.size(), 0.0);
  out.labels.assign(ids.size(), 0.0);
  detail::MotionCache cache(model.config.cache_motion && model.use_motion());
  for (size_t i = 0; i < ids.size(); ++i) {
    detail::VideoHandle h = detail::open_handle(manifest, ids[i], model.config.tau_s);
    out.predictions[i] = score_with_plan(model, *h.source, h.plan, &cache, h.record_id);
    out.labels[i] = h.record->mos;
  }
  out.metrics = evaluate_scores(out.predictions, out.labels);
  return out;
}

inline EvalOutput evaluate_model(VqaModel& model, const DatasetManifest& manifest,
                                 const SplitSpec& split) {
  return evaluate_on_ids(model, manifest, split.test_ids);
}

// ---------------------------------------------------------------------------
// Multi-scale scoring: the video is re-rendered with its short side at each
// configured line count, scored per scale, and fused geometrically with CSF
// band weights.

class ScaledFrameSource final : public FrameSource {
 public:
  ScaledFrameSource(std::unique_ptr<FrameSource> inner, int short_side) : inner_(std::move(inner)) {
    if (short_side < 1) throw InvalidArgument("scaled source: short side must be >= 1");
    meta_ = inner_->meta();
    const int h = meta_.height, w = meta_.width;
    if (h <= w) {
      meta_.height = short_side;
      meta_.width = std::max<int>(1, static_cast<int>(std::lround(
                                         static_cast<double>(w) * short_side / h)));
    } else {
      meta_.width = short_side;
      meta_.height = std::max<int>(1, static_cast<int>(std::lround(
                                          static_cast<double>(h) * short_side / w)));
    }
  }

  VideoMeta meta() const override { return meta_; }

  Image read_frame(int64_t index) const override {
    const Image raw = inner_->read_frame(index);
    if (raw.height == meta_.height && raw.width == meta_.width) return raw;
    return resize_bilinear(raw, meta_.height, meta_.width);
  }

 private:
  std::unique_ptr<FrameSource> inner_;
  VideoMeta meta_;
};

struct VideoScore {
  double q = 0.0;
  bool multiscale = false;
  std::vector<double> lines;       // short-side targets, ascending
  std::vector<double> per_scale;   // Q_i per line
  std::vector<double> weights;     // CSF band weights used for fusion
};

inline VideoScore score_video(VqaModel& model, const std::string& uri, bool multiscale,
                              const ViewingEnvironment& env = {},
                              const std::vector<double>& lines = {540.0, 720.0, 1080.0},
                              AccessCounters* counters = nullptr) {
  VideoScore out;
  if (!multiscale) {
    detail::VideoHandle h;
    h.source = open_video(uri);
    h.plan = build_sampling_plan(h.source->meta(), model.config.tau_s);
    out.q = score_with_plan(model, *h.source, h.plan, nullptr, 0, counters);
    return out;
  }

  out.multiscale = true;
  out.lines = lines;
  out.weights = scale_weights(env, lines);
  for (const double line : lines) {
    ScaledFrameSource scaled(open_video(uri), static_cast<int>(std::lround(line)));
    const SamplingPlan plan = build_sampling_plan(scaled.meta(), model.config.tau_s);
    out.per_scale.push_back(score_with_plan(model, scaled, plan, nullptr, 0, counters));
  }
  out.q = fuse_multiscale(out.per_scale, out.weights);
  return out;
}

struct CrossDbResult {
  std::string dataset;
  EvalResult single_scale;
  EvalResult multi_scale;
};

// Evaluate a trained model on whole external manifests, without fine-tuning,
// reporting both the plain and the fused multi-scale variant.
inline std::vector<CrossDbResult> cross_database_eval(VqaModel& model,
                                                      const std::vector<DatasetManifest>& targets,
                                                      const ViewingEnvironment& env = {},
                                                      const std::vector<double>& lines = {540.0, 720.0, 1080.0}) {
  std::vector<CrossDbResult> rows;
  for (const auto& target : targets) {
    if (target.size() < 2) throw InvalidArgument("cross_database_eval: target too small");
    CrossDbResult row;
    row.dataset = target.name;

    std::vector<size_t> ids(target.size());
    std::iota(ids.begin(), ids.end(), size_t{0});
    const EvalOutput single = evaluate_on_ids(model, target, ids);
    row.single_scale = single.metrics;

    std::vector<double> fused(target.size()), labels(target.size());
    for (size_t i = 0; i < target.size(); ++i) {
      const VideoScore vs = score_video(model, target.records[i].resolved_uri, true, env, lines);
      fused[i] = vs.q;
      labels[i] = target.records[i].mos;
    }
    row.multi_scale = evaluate_scores(fused, labels);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON with the full config, a config fingerprint, and every
// trainable parameter by name. Doubles round-trip exactly.

inline uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_fingerprint(const TrainConfig& cfg) {
  std::ostringstream hex;
  hex << std::hex << fnv1a64(config_to_json(cfg).dump());
  return hex.str();
}

inline void save_checkpoint(VqaModel& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "vqa-checkpoint";
  j["version"] = 1;
  j["config"] = config_to_json(model.config);
  j["fingerprint"] = config_fingerprint(model.config);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& p : model.trainable_params()) params[p.name] = *p.value;
  j["params"] = params;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

inline VqaModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path + " is not valid JSON", {e.what()});
  }
  if (!j.contains("format") || j.at("format") != "vqa-checkpoint" || !j.contains("config") ||
      !j.contains("params") || !j.contains("fingerprint"))
    throw ValidationError("checkpoint " + path + " has wrong shape", {});

  const TrainConfig cfg = config_from_json(j.at("config"));
  if (config_fingerprint(cfg) != j.at("fingerprint").get<std::string>())
    throw ValidationError("checkpoint " + path + " fingerprint mismatch",
                          {"config was edited after saving"});

  VqaModel model = VqaModel::create(cfg);
  const auto& params = j.at("params");
  std::vector<std::string> issues;
  for (const auto& p : model.trainable_params()) {
    if (!params.contains(p.name)) {
      issues.push_back("missing parameter '" + p.name + "'");
      continue;
    }
    const auto& arr = params.at(p.name);
    if (!arr.is_array() || arr.size() != p.value->size()) {
      issues.push_back("parameter '" + p.name + "' has wrong size");
      continue;
    }
    for (size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] = arr[i].get<double>();
  }
  if (!issues.empty()) throw ValidationError("checkpoint " + path + " is incomplete", issues);
  return model;
}

}  // namespace vqa
