#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "vqa/common.hpp"
#include "vqa/nn.hpp"

namespace vqa {

// Two fully connected layers with a ReLU between them map the fused feature
// to one chunk score. No activation on the output; scores live on the label
// scale. The video score is the arithmetic mean over chunk scores.
class MlpHead {
 public:
  MlpHead() = default;
  MlpHead(int in_dim, int hidden_dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    fc1_ = Linear(in_dim, hidden_dim, rng);
    fc2_ = Linear(hidden_dim, 1, rng);
  }

  int in_dim() const { return fc1_.in_dim; }
  int hidden_dim() const { return fc1_.out_dim; }

  double regress(const std::vector<double>& feature) const {
    std::vector<double> h = fc1_.forward(feature);
    for (auto& v : h) v = std::max(0.0, v);
    return fc2_.forward(h)[0];
  }

  // d(score)/d(everything): accumulates parameter grads scaled by gscore and
  // returns d(score)/d(feature).
  std::vector<double> regress_backward(const std::vector<double>& feature, double gscore) {
    std::vector<double> pre = fc1_.forward(feature);
    std::vector<double> h = pre;
    for (auto& v : h) v = std::max(0.0, v);
    const std::array<double, 1> gout{gscore};
    std::vector<double> gh = fc2_.backward(h, gout);
    for (size_t i = 0; i < gh.size(); ++i)
      if (pre[i] <= 0.0) gh[i] = 0.0;
    return fc1_.backward(feature, gh);
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    fc1_.collect_params("head.fc1", out);
    fc2_.collect_params("head.fc2", out);
    return out;
  }

  Linear& fc1() { return fc1_; }
  Linear& fc2() { return fc2_; }
  const Linear& fc1() const { return fc1_; }
  const Linear& fc2() const { return fc2_; }

 private:
  Linear fc1_;
  Linear fc2_;
};

inline double pool_chunk_scores(const std::vector<double>& chunk_scores) {
  if (chunk_scores.empty()) throw InvalidArgument("pool_chunk_scores: no chunks");
  const double s = std::accumulate(chunk_scores.begin(), chunk_scores.end(), 0.0);
  return s / static_cast<double>(chunk_scores.size());
}

}  // namespace vqa
