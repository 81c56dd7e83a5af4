// Command line surface for the video quality toolkit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vqa/vqa.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit-code contract: 0 ok, 2 config/validation, 3 I/O, 4 numeric failure.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const vqa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& issue : e.issues) std::cerr << "  - " << issue << "\n";
    return 2;
  } catch (const vqa::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vqa::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vqa::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const vqa::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

ordered_json eval_to_json(const vqa::EvalResult& r) {
  ordered_json j;
  j["srcc"] = r.srcc;
  j["plcc_fitted"] = r.plcc_fitted;
  j["plcc_raw"] = r.plcc_raw;
  j["n_samples"] = r.n_samples;
  j["logistic_fallback"] = r.logistic_fallback;
  return j;
}

void print_eval_line(const std::string& label, const vqa::EvalResult& r) {
  std::printf("%-14s SRCC %+.6f  PLCC %+.6f  PLCC(raw) %+.6f%s\n", label.c_str(), r.srcc,
              r.plcc_fitted, r.plcc_raw, r.logistic_fallback ? "  [logistic fallback]" : "");
}

int cmd_train(const std::string& config_path, bool json_out) {
  const vqa::RunConfig rc = vqa::load_run_config(config_path);
  if (rc.manifest_path.empty())
    throw vqa::ValidationError("run config has no dataset.manifest", {"add dataset.manifest"});
  if (!fs::exists(rc.manifest_path))
    throw vqa::ValidationError("dataset manifest does not exist: " + rc.manifest_path, {});

  const vqa::DatasetManifest manifest = vqa::load_manifest(rc.manifest_path);
  const auto splits = vqa::make_splits(manifest, rc.train.seed, rc.splits);

  std::error_code ec;
  fs::create_directories(rc.output_dir, ec);
  if (ec) throw vqa::IoError("cannot create output dir " + rc.output_dir + ": " + ec.message());

  std::vector<vqa::EvalResult> results;
  ordered_json split_rows = ordered_json::array();
  for (const auto& split : splits) {
    vqa::TrainConfig cfg = rc.train;
    cfg.seed = vqa::mix_seed(rc.train.seed, 0x0b57u, static_cast<uint64_t>(split.repeat_index));
    vqa::VqaModel model = vqa::VqaModel::create(cfg);
    const vqa::TrainResult tr = vqa::train_model(model, manifest, split);
    const vqa::EvalOutput ev = vqa::evaluate_model(model, manifest, split);
    results.push_back(ev.metrics);

    const fs::path split_dir = fs::path(rc.output_dir) / ("split" + std::to_string(split.repeat_index));
    fs::create_directories(split_dir, ec);
    if (ec) throw vqa::IoError("cannot create " + split_dir.string() + ": " + ec.message());

    std::ofstream log(split_dir / "train_log.jsonl", std::ios::trunc);
    if (!log) throw vqa::IoError("cannot write training log in " + split_dir.string());
    for (const auto& entry : tr.log) {
      ordered_json line;
      line["epoch"] = entry.epoch;
      line["loss"] = entry.loss;
      if (entry.srcc_defined)
        line["train_srcc"] = entry.train_srcc;
      else
        line["train_srcc"] = nullptr;
      log << line.dump() << "\n";
    }
    vqa::save_checkpoint(model, (split_dir / "checkpoint.json").string());

    ordered_json row = eval_to_json(ev.metrics);
    row["split"] = split.repeat_index;
    row["final_train_loss"] = tr.final_loss;
    split_rows.push_back(row);
    if (!json_out) print_eval_line("split " + std::to_string(split.repeat_index), ev.metrics);
  }

  const vqa::AggregateEval agg = vqa::median_over_splits(results);
  ordered_json out;
  out["dataset"] = manifest.name;
  out["videos"] = manifest.size();
  out["splits"] = split_rows;
  out["median"] = eval_to_json(agg.median_result);
  out["logistic_fallbacks"] = agg.fallback_count;

  const fs::path metrics_path = fs::path(rc.output_dir) / "metrics.json";
  std::ofstream mf(metrics_path, std::ios::trunc);
  if (!mf) throw vqa::IoError("cannot write " + metrics_path.string());
  mf << out.dump(1) << "\n";

  if (json_out)
    std::cout << out.dump(1) << "\n";
  else
    print_eval_line("median", agg.median_result);
  return 0;
}

int cmd_score(const std::string& ckpt_path, const std::string& video, bool multiscale,
              const std::string& config_path, bool json_out) {
  vqa::ViewingEnvironment env;
  std::vector<double> lines = {540.0, 720.0, 1080.0};
  if (!config_path.empty()) {
    const vqa::RunConfig rc = vqa::load_run_config(config_path);
    env = rc.env;
    lines = rc.scales;
  }
  vqa::VqaModel model = vqa::load_checkpoint(ckpt_path);
  const vqa::VideoScore s = vqa::score_video(model, video, multiscale, env, lines);

  if (json_out) {
    ordered_json j;
    j["video"] = video;
    j["q"] = s.q;
    if (s.multiscale) {
      j["lines"] = s.lines;
      j["per_scale"] = s.per_scale;
      j["weights"] = s.weights;
    }
    std::cout << j.dump(1) << "\n";
    return 0;
  }
  if (s.multiscale) {
    for (size_t i = 0; i < s.per_scale.size(); ++i)
      std::printf("Q%zu=%.6f\n", i + 1, s.per_scale[i]);
    std::printf("Qm=%.6f\n", s.q);
  } else {
    std::printf("Q=%.6f\n", s.q);
  }
  return 0;
}

int cmd_weights(const std::string& config_path, std::vector<double> scales, bool flat,
                double distance, double picture_height, double luminance, double angular_area,
                bool json_out) {
  vqa::ViewingEnvironment env;
  if (!config_path.empty()) {
    const vqa::RunConfig rc = vqa::load_run_config(config_path);
    env = rc.env;
    if (scales.empty()) scales = rc.scales;
  }
  if (scales.empty()) scales = {540.0, 720.0, 1080.0};
  if (distance > 0) env.distance = distance;
  if (picture_height > 0) env.picture_height = picture_height;
  if (luminance > 0) env.luminance = luminance;
  if (angular_area > 0) env.angular_area = angular_area;
  env.validate();

  std::vector<double> w;
  if (flat) {
    w.assign(scales.size(), 1.0 / static_cast<double>(scales.size()));
  } else {
    w = vqa::scale_weights(env, scales);
  }
  const std::vector<double> edges = vqa::band_edges(env, scales);

  if (json_out) {
    ordered_json j;
    j["scales"] = scales;
    j["band_edges_cpd"] = edges;
    j["weights"] = w;
    j["flat"] = flat;
    std::cout << j.dump(1) << "\n";
    return 0;
  }
  std::printf("%-8s %-22s %s\n", "scale", "band (cycles/deg)", "weight");
  for (size_t i = 0; i < scales.size(); ++i)
    std::printf("%-8.0f [%8.4f, %8.4f]    %.4f\n", scales[i], edges[i], edges[i + 1], w[i]);
  return 0;
}

int cmd_bench(const std::string& ckpt_path, const std::string& video, bool json_out) {
  using clock = std::chrono::steady_clock;
  const auto ms = [](clock::duration d) {
    return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(d).count();
  };

  vqa::VqaModel model = vqa::load_checkpoint(ckpt_path);
  auto source = vqa::open_video(video);
  const vqa::SamplingPlan plan = vqa::build_sampling_plan(source->meta(), model.config.tau_s);
  const vqa::SamplingConfig scfg = model.config.sampling();
  vqa::AccessCounters counters;

  clock::duration t_decode{}, t_spatial{}, t_motion{}, t_head{};
  std::vector<double> chunk_scores;
  const auto bench_start = clock::now();
  for (int64_t c = 0; c < plan.chunk_count; ++c) {
    auto t0 = clock::now();
    const vqa::ChunkSample sample =
        vqa::decode_chunk(*source, plan, c, vqa::SampleMode::kTest, 0, scfg, &counters,
                          model.use_spatial(), model.use_motion());
    auto t1 = clock::now();
    t_decode += t1 - t0;

    std::vector<double> feature;
    if (model.use_spatial()) {
      const vqa::SpatialFeatureVector fs = vqa::spatial_features(sample.key_frame, *model.backbone);
      feature = fs.values;
    }
    auto t2 = clock::now();
    t_spatial += t2 - t1;

    if (model.use_motion()) {
      const std::vector<double> fm = model.motion_embedding(sample);
      feature.insert(feature.end(), fm.begin(), fm.end());
    }
    auto t3 = clock::now();
    t_motion += t3 - t2;

    chunk_scores.push_back(model.head.regress(feature));
    t_head += clock::now() - t3;
  }
  const double q = vqa::pool_chunk_scores(chunk_scores);
  const double total_ms = ms(clock::now() - bench_start);

  if (json_out) {
    ordered_json j;
    j["video"] = video;
    j["q"] = q;
    j["chunks"] = plan.chunk_count;
    j["frames_per_chunk"] = plan.frames_per_chunk;
    j["key_frame_preprocess"] = counters.key_frame_preprocess;
    j["motion_frame_preprocess"] = counters.motion_frame_preprocess;
    j["frames_decoded"] = counters.frames_decoded;
    j["ms"] = {{"decode", ms(t_decode)},
               {"spatial", ms(t_spatial)},
               {"motion", ms(t_motion)},
               {"head", ms(t_head)},
               {"total", total_ms}};
    std::cout << j.dump(1) << "\n";
    return 0;
  }
  std::printf("video             %s\n", video.c_str());
  std::printf("Q                 %.6f\n", q);
  std::printf("chunks            %lld (x%lld frames)\n", static_cast<long long>(plan.chunk_count),
              static_cast<long long>(plan.frames_per_chunk));
  std::printf("key frames        %lld\n", static_cast<long long>(counters.key_frame_preprocess));
  std::printf("motion frames     %lld\n", static_cast<long long>(counters.motion_frame_preprocess));
  std::printf("frames decoded    %lld\n", static_cast<long long>(counters.frames_decoded));
  std::printf("decode ms         %.2f\n", ms(t_decode));
  std::printf("spatial ms        %.2f\n", ms(t_spatial));
  std::printf("motion ms         %.2f\n", ms(t_motion));
  std::printf("head ms           %.2f\n", ms(t_head));
  std::printf("total ms          %.2f\n", total_ms);
  return 0;
}

int cmd_synth(const std::string& out_dir, int videos, uint64_t seed, int width, int height,
              int min_frames, int max_frames, int fps, bool json_out) {
  vqa::SynthProfile profile;
  profile.width = width;
  profile.height = height;
  profile.min_frames = min_frames;
  profile.max_frames = max_frames;
  profile.fps_num = fps;
  const vqa::DatasetManifest m = vqa::synthesize_dataset(videos, seed, profile, out_dir);
  const std::string manifest_path = (fs::path(out_dir) / "manifest.txt").string();
  if (json_out) {
    ordered_json j;
    j["manifest"] = manifest_path;
    j["videos"] = m.size();
    std::cout << j.dump(1) << "\n";
  } else {
    std::printf("wrote %zu clips, manifest at %s\n", m.size(), manifest_path.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path, bool json_out) {
  const vqa::RunConfig rc = vqa::load_run_config(config_path);
  std::vector<std::string> paths = rc.target_manifests;
  if (paths.empty() && !rc.manifest_path.empty()) paths.push_back(rc.manifest_path);
  if (paths.empty())
    throw vqa::ValidationError("run config names no datasets to evaluate",
                               {"add dataset.targets or dataset.manifest"});

  vqa::VqaModel model = vqa::load_checkpoint(ckpt_path);
  std::vector<vqa::DatasetManifest> targets;
  for (const auto& p : paths) targets.push_back(vqa::load_manifest(p));

  const auto rows = vqa::cross_database_eval(model, targets, rc.env, rc.scales);
  if (json_out) {
    ordered_json j = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json r;
      r["dataset"] = row.dataset;
      r["single_scale"] = eval_to_json(row.single_scale);
      r["multi_scale"] = eval_to_json(row.multi_scale);
      j.push_back(r);
    }
    std::cout << j.dump(1) << "\n";
    return 0;
  }
  for (const auto& row : rows) {
    print_eval_line(row.dataset + " (1x)", row.single_scale);
    print_eval_line(row.dataset + " (ms)", row.multi_scale);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-reference video quality assessment toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --json appear after the subcommand too
  bool json_out = false;
  app.add_flag("--json", json_out, "machine-readable JSON output");

  auto* train = app.add_subcommand("train", "train over seeded splits and report median metrics");
  std::string train_config;
  train->add_option("--config", train_config, "run configuration JSON")->required();

  auto* score = app.add_subcommand("score", "score one video with a trained checkpoint");
  std::string score_ckpt, score_video_path, score_config;
  bool score_multiscale = false;
  score->add_option("--checkpoint", score_ckpt, "checkpoint JSON")->required();
  score->add_option("--video", score_video_path, "video file")->required();
  score->add_option("--config", score_config, "run config (viewing environment, scales)");
  score->add_flag("--multiscale", score_multiscale, "score at each scale and fuse");

  auto* weights = app.add_subcommand("weights", "print scale band edges and fusion weights");
  std::string weights_config;
  std::vector<double> weights_scales;
  bool weights_flat = false;
  double w_distance = 0, w_height = 0, w_luminance = 0, w_area = 0;
  weights->add_option("--config", weights_config, "run config (viewing environment, scales)");
  weights->add_option("--scales", weights_scales, "short-side line counts, ascending");
  weights->add_flag("--flat", weights_flat, "equal weights instead of the sensitivity integral");
  weights->add_option("--distance", w_distance, "viewing distance override");
  weights->add_option("--picture-height", w_height, "picture height override");
  weights->add_option("--luminance", w_luminance, "luminance override (cd/m^2)");
  weights->add_option("--angular-area", w_area, "angular picture size override (deg^2)");

  auto* bench = app.add_subcommand("bench", "frame-access counters and wall time for one video");
  std::string bench_ckpt, bench_video;
  bench->add_option("--checkpoint", bench_ckpt, "checkpoint JSON")->required();
  bench->add_option("--video", bench_video, "video file")->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  std::string synth_out;
  int synth_videos = 100, synth_w = 80, synth_h = 64, synth_min = 64, synth_max = 96, synth_fps = 16;
  uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--videos", synth_videos, "number of clips");
  synth->add_option("--seed", synth_seed, "generation seed");
  synth->add_option("--width", synth_w, "frame width");
  synth->add_option("--height", synth_h, "frame height");
  synth->add_option("--frames-min", synth_min, "minimum frames per clip");
  synth->add_option("--frames-max", synth_max, "maximum frames per clip");
  synth->add_option("--fps", synth_fps, "frames per second");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on whole datasets");
  std::string eval_ckpt, eval_config;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
  eval->add_option("--config", eval_config, "run config naming datasets")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed()) return guarded([&] { return cmd_train(train_config, json_out); });
  if (score->parsed())
    return guarded(
        [&] { return cmd_score(score_ckpt, score_video_path, score_multiscale, score_config, json_out); });
  if (weights->parsed())
    return guarded([&] {
      return cmd_weights(weights_config, weights_scales, weights_flat, w_distance, w_height,
                         w_luminance, w_area, json_out);
    });
  if (bench->parsed()) return guarded([&] { return cmd_bench(bench_ckpt, bench_video, json_out); });
  if (synth->parsed())
    return guarded([&] {
      return cmd_synth(synth_out, synth_videos, synth_seed, synth_w, synth_h, synth_min, synth_max,
                       synth_fps, json_out);
    });
  if (eval->parsed()) return guarded([&] { return cmd_eval(eval_ckpt, eval_config, json_out); });
  return 2;
}
