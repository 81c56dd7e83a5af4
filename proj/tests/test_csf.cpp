#include "vqa/csf.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace {

const std::vector<double> kScales{540.0, 720.0, 1080.0};

TEST(Viewing, DefaultsAreValid) {
  vqa::ViewingEnvironment env;
  EXPECT_NO_THROW(env.validate());
  EXPECT_DOUBLE_EQ(env.distance, 35.0);
  EXPECT_DOUBLE_EQ(env.picture_height, 11.3);
  EXPECT_DOUBLE_EQ(env.luminance, 200.0);
  EXPECT_DOUBLE_EQ(env.angular_area, 606.0);

  vqa::ViewingEnvironment bad = env;
  bad.luminance = 0.0;
  EXPECT_THROW(bad.validate(), vqa::InvalidArgument);
  bad = env;
  bad.distance = -1.0;
  EXPECT_THROW(bad.validate(), vqa::InvalidArgument);
}

TEST(Frequency, CutoffScalesLinearlyWithLines) {
  vqa::ViewingEnvironment env;
  const double xi540 = vqa::max_frequency_for_lines(env, 540.0);
  EXPECT_NEAR(xi540, 14.595895072, 1e-8);
  EXPECT_NEAR(vqa::max_frequency_for_lines(env, 1080.0), 2.0 * xi540, 1e-9);
  EXPECT_THROW(vqa::max_frequency_for_lines(env, 0.0), vqa::InvalidArgument);
}

TEST(Sensitivity, FrozenReferenceValue) {
  vqa::ViewingEnvironment env;
  EXPECT_DOUBLE_EQ(vqa::csf_sensitivity(0.0, env), 0.0);
  // high-precision quadrature reference for u=4, L=200, X0^2=606
  EXPECT_NEAR(vqa::csf_sensitivity(4.0, env) / 710.46154575896815, 1.0, 1e-9);
  EXPECT_THROW(vqa::csf_sensitivity(-0.5, env), vqa::InvalidArgument);
}

TEST(Sensitivity, BandpassShape) {
  vqa::ViewingEnvironment env;
  double peak_u = 0.0, peak_s = 0.0;
  for (double u = 0.05; u <= 60.0; u += 0.05) {
    const double s = vqa::csf_sensitivity(u, env);
    ASSERT_TRUE(std::isfinite(s));
    ASSERT_GE(s, 0.0);
    if (s > peak_s) {
      peak_s = s;
      peak_u = u;
    }
  }
  // rises before the peak, falls after: one sign change in the increments
  EXPECT_GT(peak_u, 0.5);
  EXPECT_LT(peak_u, 20.0);
  int direction_changes = 0;
  double prev = vqa::csf_sensitivity(0.05, env);
  bool rising = true;
  for (double u = 0.10; u <= 60.0; u += 0.05) {
    const double s = vqa::csf_sensitivity(u, env);
    if (rising && s < prev) {
      rising = false;
      ++direction_changes;
    } else if (!rising && s > prev) {
      rising = true;
      ++direction_changes;
    }
    prev = s;
  }
  EXPECT_EQ(direction_changes, 1);
}

TEST(Bands, EdgesStartAtZeroAndAscend) {
  vqa::ViewingEnvironment env;
  const auto edges = vqa::band_edges(env, kScales);
  ASSERT_EQ(edges.size(), 4u);
  EXPECT_DOUBLE_EQ(edges[0], 0.0);
  for (size_t i = 1; i < edges.size(); ++i) EXPECT_GT(edges[i], edges[i - 1]);
  EXPECT_THROW(vqa::band_edges(env, {720.0, 540.0}), vqa::InvalidArgument);
  EXPECT_THROW(vqa::band_edges(env, {}), vqa::InvalidArgument);
}

TEST(Weights, MatchPublishedValues) {
  vqa::ViewingEnvironment env;
  const auto start = std::chrono::steady_clock::now();
  const auto w = vqa::scale_weights(env, kScales);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], 0.8317, 0.02);
  EXPECT_NEAR(w[1], 0.0939, 0.02);
  EXPECT_NEAR(w[2], 0.0745, 0.02);
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-12);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1.0);

  // frozen independent quadrature of the same integrals
  EXPECT_NEAR(w[0], 0.81209553, 1e-6);
  EXPECT_NEAR(w[1], 0.099638387, 1e-6);
  EXPECT_NEAR(w[2], 0.088266083, 1e-6);
}

TEST(Weights, FlatSensitivityGivesBandWidthRatios) {
  vqa::ViewingEnvironment env;
  const auto w = vqa::scale_weights_for(env, kScales, [](double) { return 1.0; });
  // edges are proportional to lines (540, 720, 1080), so widths are
  // 540 : 180 : 360 out of 1080
  EXPECT_NEAR(w[0], 0.5, 1e-9);
  EXPECT_NEAR(w[1], 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(w[2], 1.0 / 3.0, 1e-9);

  const auto equal = vqa::scale_weights_for(env, {360.0, 720.0, 1080.0}, [](double) { return 1.0; });
  EXPECT_NEAR(equal[0], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(equal[1], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(equal[2], 1.0 / 3.0, 1e-9);
}

TEST(Weights, DegenerateSensitivityIsANumericError) {
  vqa::ViewingEnvironment env;
  EXPECT_THROW(vqa::scale_weights_for(env, kScales, [](double) { return 0.0; }),
               vqa::NumericError);
  EXPECT_THROW(vqa::scale_weights_for(
                   env, kScales, [](double) { return std::numeric_limits<double>::infinity(); }),
               vqa::NumericError);
}

TEST(Fusion, HandValue) {
  // 2^0.5 * 4^0.25 * 8^0.25
  EXPECT_NEAR(vqa::fuse_multiscale({2.0, 4.0, 8.0}, {0.5, 0.25, 0.25}), 3.363585661014858,
              1e-12);
}

TEST(Fusion, PublishedWeightSumToleranceIsAccepted) {
  // the published rounded weights sum to 1.0001
  EXPECT_NO_THROW(vqa::fuse_multiscale({3.0, 3.0, 3.0}, {0.8317, 0.0939, 0.0745}));
  EXPECT_THROW(vqa::fuse_multiscale({3.0, 3.0, 3.0}, {0.84, 0.1, 0.08}), vqa::InvalidArgument);
}

TEST(Fusion, Invariants) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> score_dist(0.05, 5.0);
  std::uniform_real_distribution<double> weight_dist(0.0, 1.0);

  for (int it = 0; it < 200; ++it) {
    std::vector<double> w{weight_dist(rng), weight_dist(rng), weight_dist(rng)};
    const double total = w[0] + w[1] + w[2];
    if (total <= 0.0) continue;
    for (auto& x : w) x /= total;
    std::vector<double> q{score_dist(rng), score_dist(rng), score_dist(rng)};

    // idempotence
    const double q0 = q[0];
    EXPECT_NEAR(vqa::fuse_multiscale({q0, q0, q0}, w), q0, 1e-9 * std::max(1.0, q0));

    // bounded by min/max
    const double fused = vqa::fuse_multiscale(q, w);
    EXPECT_GE(fused, *std::min_element(q.begin(), q.end()) - 1e-9);
    EXPECT_LE(fused, *std::max_element(q.begin(), q.end()) + 1e-9);

    // raising any score cannot lower the fusion
    std::vector<double> up = q;
    up[it % 3] += 0.5;
    EXPECT_GE(vqa::fuse_multiscale(up, w), fused - 1e-9);
  }
}

TEST(Fusion, DomainErrors) {
  const std::vector<double> w{0.5, 0.25, 0.25};
  EXPECT_THROW(vqa::fuse_multiscale({0.0, 1.0, 1.0}, w), vqa::DomainError);
  EXPECT_THROW(vqa::fuse_multiscale({-1.0, 1.0, 1.0}, w), vqa::DomainError);
  EXPECT_THROW(vqa::fuse_multiscale({1.0, 1.0}, w), vqa::InvalidArgument);
  EXPECT_THROW(vqa::fuse_multiscale({}, {}), vqa::InvalidArgument);
  EXPECT_THROW(vqa::fuse_multiscale({1.0, 1.0, 1.0}, {0.5, 0.25, -0.25}), vqa::InvalidArgument);
}

TEST(Fusion, ShiftedVariantHandlesZeros) {
  const std::vector<double> w{0.5, 0.5};
  const double fused = vqa::fuse_multiscale_shifted({0.0, 3.0}, w, 1.0);
  // (0+1)^0.5 * (3+1)^0.5 - 1 = 1
  EXPECT_NEAR(fused, 1.0, 1e-12);
  EXPECT_THROW(vqa::fuse_multiscale_shifted({0.0, 3.0}, w, -0.5), vqa::InvalidArgument);
  // shift 0 degenerates to the plain fusion
  EXPECT_NEAR(vqa::fuse_multiscale_shifted({2.0, 4.0}, w, 0.0),
              vqa::fuse_multiscale({2.0, 4.0}, w), 1e-12);
}

}  // namespace
