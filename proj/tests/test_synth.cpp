#include "vqa/synth.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "vqa/video_io.hpp"

namespace {

namespace fs = std::filesystem;

TEST(SynthPlan, PristineFirstAndSeeded) {
  const auto profile = vqa::SynthProfile::stub();
  const auto plan = vqa::plan_synthetic(12, 3, profile);
  ASSERT_EQ(plan.size(), 12u);

  EXPECT_DOUBLE_EQ(plan[0].degradation.blur_sigma, 0.0);
  EXPECT_DOUBLE_EQ(plan[0].degradation.noise_sigma, 0.0);
  EXPECT_DOUBLE_EQ(plan[0].degradation.jitter_amp, 0.0);
  EXPECT_DOUBLE_EQ(plan[0].mos, 5.0);

  const auto again = vqa::plan_synthetic(12, 3, profile);
  for (size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(plan[i].seed, again[i].seed);
    EXPECT_EQ(plan[i].frames, again[i].frames);
    EXPECT_DOUBLE_EQ(plan[i].mos, again[i].mos);
  }

  bool frames_vary = false;
  for (const auto& s : plan)
    if (s.frames != plan[0].frames) frames_vary = true;
  EXPECT_TRUE(frames_vary);
  for (const auto& s : plan) {
    EXPECT_GE(s.frames, profile.min_frames);
    EXPECT_LE(s.frames, profile.max_frames);
    EXPECT_GE(s.mos, 1.0);
    EXPECT_LE(s.mos, 5.0);
  }

  EXPECT_THROW(vqa::plan_synthetic(1, 3, profile), vqa::InvalidArgument);
}

TEST(SynthPlan, MosIsMonotoneInDegradation) {
  const auto profile = vqa::SynthProfile::stub();
  vqa::DegradationParams light{0.2, 0.01, 0.3};
  vqa::DegradationParams heavy{1.8, 0.10, 2.5};
  EXPECT_GT(vqa::oracle_mos(light, profile), vqa::oracle_mos(heavy, profile));
  EXPECT_NEAR(vqa::degradation_index({profile.max_blur, profile.max_noise, profile.max_jitter},
                                     profile),
              1.0, 1e-12);
  EXPECT_NEAR(vqa::oracle_mos({profile.max_blur, profile.max_noise, profile.max_jitter}, profile),
              1.0, 1e-12);
}

TEST(SynthRender, FramesAreDeterministicAndDegraded) {
  const auto profile = vqa::SynthProfile::stub();
  const auto plan = vqa::plan_synthetic(4, 9, profile);

  const vqa::Image a = vqa::render_synthetic_frame(plan[2], profile, 5);
  const vqa::Image b = vqa::render_synthetic_frame(plan[2], profile, 5);
  ASSERT_EQ(a.data.size(), b.data.size());
  for (size_t i = 0; i < a.data.size(); ++i) EXPECT_DOUBLE_EQ(a.data[i], b.data[i]);
  for (const double v : a.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }

  const vqa::Image c = vqa::render_synthetic_frame(plan[2], profile, 6);
  bool differs = false;
  for (size_t i = 0; i < a.data.size(); ++i)
    if (a.data[i] != c.data[i]) differs = true;
  EXPECT_TRUE(differs);  // the scene moves between frames
}

TEST(SynthDataset, WritesClipsAndManifest) {
  const std::string out_dir = (fs::temp_directory_path() / "vqa_synth_ds").string();
  fs::remove_all(out_dir);
  const auto manifest = vqa::synthesize_dataset(6, 42, vqa::SynthProfile::stub(), out_dir);

  ASSERT_EQ(manifest.size(), 6u);
  EXPECT_DOUBLE_EQ(manifest.records[0].mos, 5.0);
  std::set<std::string> uris;
  for (const auto& r : manifest.records) {
    uris.insert(r.uri);
    EXPECT_TRUE(fs::exists(r.resolved_uri)) << r.resolved_uri;
    EXPECT_GE(r.mos, 1.0);
    EXPECT_LE(r.mos, 5.0);
  }
  EXPECT_EQ(uris.size(), 6u);

  // the manifest on disk round-trips
  const auto loaded = vqa::load_manifest(out_dir + "/manifest.txt");
  EXPECT_EQ(loaded.size(), 6u);

  // frame counts in the container match the plan
  const auto plan = vqa::plan_synthetic(6, 42, vqa::SynthProfile::stub());
  for (size_t i = 0; i < loaded.size(); ++i) {
    vqa::Y4mSource src(loaded.records[i].resolved_uri);
    EXPECT_EQ(src.meta().frame_count, plan[i].frames);
    EXPECT_EQ(src.meta().width, 80);
    EXPECT_EQ(src.meta().height, 64);
  }
  fs::remove_all(out_dir);
}

TEST(SynthDataset, RegenerationIsBitStable) {
  const std::string d1 = (fs::temp_directory_path() / "vqa_synth_r1").string();
  const std::string d2 = (fs::temp_directory_path() / "vqa_synth_r2").string();
  fs::remove_all(d1);
  fs::remove_all(d2);
  vqa::synthesize_dataset(3, 7, vqa::SynthProfile::stub(), d1);
  vqa::synthesize_dataset(3, 7, vqa::SynthProfile::stub(), d2);

  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "clips/v%04d.y4m", i);
    std::ifstream a(d1 + "/" + name, std::ios::binary);
    std::ifstream b(d2 + "/" + name, std::ios::binary);
    ASSERT_TRUE(a && b);
    const std::string ca((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    EXPECT_EQ(ca, cb) << name;
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

}  // namespace
