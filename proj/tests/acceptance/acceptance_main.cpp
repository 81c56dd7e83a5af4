// Acceptance gate: runs every release criterion end to end against the built
// library and CLI, printing one [PASS]/[FAIL] line per criterion. Exits
// nonzero if any criterion fails.
//
// Usage: vqa_acceptance <path-to-vqa-cli> <work-dir>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vqa/csf.hpp"
#include "vqa/losses.hpp"
#include "vqa/manifest.hpp"
#include "vqa/metrics.hpp"
#include "vqa/sampling.hpp"
#include "vqa/synth.hpp"
#include "vqa/training.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw vqa::IoError("cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// --------------------------------------------------------------------------
// 1. CSF fusion weights at the published viewing setup.

void crit_csf_weights() {
  const auto t0 = Clock::now();
  const std::vector<double> w = vqa::scale_weights(vqa::ViewingEnvironment{}, {540.0, 720.0, 1080.0});
  const double dt = seconds_since(t0);

  const std::array<double, 3> published = {0.8317, 0.0939, 0.0745};
  double max_err = 0.0;
  for (size_t i = 0; i < 3; ++i) max_err = std::max(max_err, std::abs(w[i] - published[i]));

  std::ostringstream d;
  d.precision(6);
  d << "weights (" << w[0] << ", " << w[1] << ", " << w[2] << "), max deviation " << max_err
    << " (tol 0.02), " << dt << " s";
  report("csf-weights", w.size() == 3 && max_err <= 0.02 && dt < 1.0, d.str());
}

// --------------------------------------------------------------------------
// 2. Loss oracles: hand values to 1e-9 and gradient-vs-finite-difference at
//    100 random points away from hinge/absolute-value kinks.

bool near_kink(const std::vector<double>& pred, const std::vector<double>& label, double margin) {
  const size_t n = pred.size();
  for (size_t i = 0; i < n; ++i)
    if (std::abs(pred[i] - label[i]) < margin) return true;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (i != j &&
          std::abs(vqa::rank_pair_margin(pred[i], pred[j], label[i], label[j])) < margin)
        return true;
  return false;
}

void crit_loss_oracles() {
  int bad = 0;
  std::ostringstream why;

  auto expect = [&](double got, double want, const char* what) {
    if (std::abs(got - want) > 1e-9) {
      ++bad;
      why << " " << what << "=" << got << " want " << want << ";";
    }
  };

  expect(vqa::mae_loss({1, 2, 3}, {1, 2, 3}), 0.0, "mae-perfect");
  expect(vqa::mae_loss({2, 2}, {1, 3}), 1.0, "mae-hand");
  expect(vqa::mae_loss({3, 3}, {1, 5}), 2.0 * vqa::mae_loss({2, 2}, {1, 3}), "mae-homogeneity");
  expect(vqa::rank_loss({1, 2, 3}, {1, 2, 3}), 0.0, "rank-perfect");
  expect(vqa::rank_loss({1, 3}, {3, 1}), 2.0, "rank-2.0");
  expect(vqa::rank_loss({1, 3}, {2, 2}), 0.5, "rank-0.5");
  expect(vqa::total_loss({1, 3}, {3, 1}, 1.0), 4.0, "total-4.0");

  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> nd(2, 6);
  std::uniform_real_distribution<double> vd(-2.0, 6.0);
  int fd_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> pred, label;
    do {
      const int n = nd(rng);
      pred.assign(static_cast<size_t>(n), 0.0);
      label.assign(static_cast<size_t>(n), 0.0);
      for (auto& v : pred) v = vd(rng);
      for (auto& v : label) v = vd(rng);
    } while (near_kink(pred, label, 1e-3));

    const double lambda = 0.5 + 1.5 * std::generate_canonical<double, 53>(rng);
    const vqa::LossResult res = vqa::total_loss_with_grad(pred, label, lambda);
    const double eps = 1e-6;
    for (size_t i = 0; i < pred.size(); ++i) {
      std::vector<double> hi = pred, lo = pred;
      hi[i] += eps;
      lo[i] -= eps;
      const double fd =
          (vqa::total_loss(hi, label, lambda) - vqa::total_loss(lo, label, lambda)) / (2 * eps);
      if (std::abs(res.grad[i] - fd) > 1e-4 * std::max(1.0, std::abs(fd))) ++fd_failures;
    }
  }
  if (fd_failures > 0) {
    ++bad;
    why << " " << fd_failures << " finite-difference mismatches;";
  }

  std::ostringstream d;
  if (bad == 0)
    d << "7 hand values at 1e-9, gradients match central differences at 100 random points";
  else
    d << "failures:" << why.str();
  report("loss-oracles", bad == 0, d.str());
}

// --------------------------------------------------------------------------
// 3. Metric oracles: SRCC against an independent brute-force implementation,
//    and the logistic fit recovering a curve it generated.

std::vector<double> brute_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    size_t less = 0, equal = 0;
    for (size_t j = 0; j < n; ++j) {
      if (x[j] < x[i]) ++less;
      if (x[j] == x[i]) ++equal;
    }
    r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return r;
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

bool is_constant(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

void crit_metric_oracles() {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> nd(3, 40);
  std::uniform_int_distribution<int> tied(0, 9);
  std::uniform_real_distribution<double> smooth(0.0, 10.0);

  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x, y;
    do {
      const int n = nd(rng);
      x.assign(static_cast<size_t>(n), 0.0);
      y.assign(static_cast<size_t>(n), 0.0);
      const bool with_ties = trial % 2 == 0;
      for (auto& v : x) v = with_ties ? tied(rng) : smooth(rng);
      for (auto& v : y) v = with_ties ? tied(rng) : smooth(rng);
    } while (is_constant(brute_ranks(x)) || is_constant(brute_ranks(y)));

    const double got = vqa::srcc(x, y);
    const double want = brute_pearson(brute_ranks(x), brute_ranks(y));
    worst = std::max(worst, std::abs(got - want));
    if (std::abs(got - want) > 1e-9) ++mismatches;
  }

  // logistic self-consistency: fit data generated from a known 4PL curve
  const std::array<double, 4> truth = {4.5, 1.2, 0.3, 0.8};
  std::vector<double> o, s;
  for (int i = 0; i < 25; ++i) {
    const double t = -3.0 + 6.0 * i / 24.0;
    o.push_back(t);
    s.push_back(vqa::logistic4(t, truth));
  }
  const vqa::LogisticFit fit = vqa::fit_logistic(o, s);
  double curve_err = 0.0;
  std::vector<double> mapped;
  for (size_t i = 0; i < o.size(); ++i) {
    mapped.push_back(vqa::logistic4(o[i], fit.beta));
    curve_err = std::max(curve_err, std::abs(mapped.back() - s[i]));
  }
  const double plcc_fitted = vqa::pearson(mapped, s);
  const bool logistic_ok = fit.converged && curve_err <= 1e-6 && plcc_fitted >= 0.9999;

  std::ostringstream d;
  d.precision(6);
  d << "100 brute-force instances, worst gap " << worst << " (tol 1e-9); logistic curve error "
    << curve_err << ", fitted correlation " << plcc_fitted;
  report("metric-oracles", mismatches == 0 && logistic_ok, d.str());
}

// --------------------------------------------------------------------------
// 4. Desk-scale learning on 100 synthetic clips with the stub profile,
//    including the ablation ordering and a 200-step overfit check.

struct ModeResult {
  double train_srcc = std::nan("");
  double test_srcc = std::nan("");
};

void crit_desk_scale_learning(const fs::path& work) {
  const auto t0 = Clock::now();
  const vqa::DatasetManifest manifest =
      vqa::synthesize_dataset(100, 20260801, vqa::SynthProfile::stub(), (work / "synth100").string());
  const vqa::SplitSpec split = vqa::make_splits(manifest, 7, 1)[0];

  auto run_mode = [&](const std::string& mode, bool eval_train) {
    vqa::TrainConfig cfg = vqa::TrainConfig::stub_profile();
    cfg.feature_mode = mode;
    cfg.seed = 7;
    vqa::VqaModel model = vqa::VqaModel::create(cfg);
    vqa::train_model(model, manifest, split);
    ModeResult r;
    try {
      if (eval_train) r.train_srcc = vqa::evaluate_on_ids(model, manifest, split.train_ids).metrics.srcc;
      r.test_srcc = vqa::evaluate_model(model, manifest, split).metrics.srcc;
    } catch (const vqa::UndefinedCorrelation&) {
      // constant predictions: leave NaN, which fails every gate below
    }
    return r;
  };

  const ModeResult full = run_mode("s+m", true);
  const ModeResult spatial = run_mode("s", false);
  const ModeResult motion = run_mode("m", false);

  // spec'd overfit probe: 16 clips, 200 optimizer steps
  const vqa::DatasetManifest small =
      vqa::synthesize_dataset(16, 20260802, vqa::SynthProfile::stub(), (work / "synth16").string());
  vqa::TrainConfig ocfg = vqa::TrainConfig::stub_profile();
  ocfg.epochs = 100;  // 16 videos / batch 8 = 2 steps per epoch
  ocfg.seed = 3;
  vqa::VqaModel omodel = vqa::VqaModel::create(ocfg);
  vqa::SplitSpec all;
  all.train_ids.resize(small.size());
  for (size_t i = 0; i < small.size(); ++i) all.train_ids[i] = i;
  const vqa::TrainResult overfit = vqa::train_model(omodel, small, all);

  const double dt = seconds_since(t0);
  const bool ok = full.train_srcc >= 0.95 && full.test_srcc >= 0.80 &&
                  spatial.test_srcc >= motion.test_srcc &&
                  full.test_srcc >= spatial.test_srcc - 0.02 &&
                  overfit.final_loss < 0.25 * overfit.initial_loss && dt <= 900.0;

  std::ostringstream d;
  d.precision(4);
  d << "train srcc " << full.train_srcc << " (>=0.95), test srcc " << full.test_srcc
    << " (>=0.80); ablation test srcc s=" << spatial.test_srcc << " m=" << motion.test_srcc
    << " s+m=" << full.test_srcc << "; overfit loss " << overfit.initial_loss << " -> "
    << overfit.final_loss << " (<25%); " << dt << " s total";
  report("desk-scale-learning", ok, d.str());
}

// --------------------------------------------------------------------------
// 5. Sparse access: an 8 s, 30 fps clip costs exactly 8 key-frame
//    preprocessings and at most 240 motion-frame preprocessings.

void crit_sparse_access(const fs::path& work) {
  vqa::SynthProfile p;
  p.min_frames = 240;
  p.max_frames = 240;
  p.fps_num = 30;
  vqa::SynthVideoSpec spec;
  spec.index = 0;
  spec.seed = 5;
  spec.frames = 240;
  spec.mos = 5.0;
  const fs::path clip = work / "sparse.y4m";
  vqa::write_synthetic_clip(clip.string(), spec, p);

  vqa::VqaModel model = vqa::VqaModel::create(vqa::TrainConfig::stub_profile());
  const auto source = vqa::open_video(clip.string());
  const vqa::SamplingPlan plan = vqa::build_sampling_plan(source->meta(), 1.0);
  vqa::AccessCounters counters;
  vqa::score_with_plan(model, *source, plan, nullptr, 0, &counters);

  std::ostringstream d;
  d << "8 chunks: " << counters.key_frame_preprocess << " key-frame preprocessings (want 8), "
    << counters.motion_frame_preprocess << " motion-frame preprocessings (cap 240)";
  report("sparse-access",
         plan.chunk_count == 8 && counters.key_frame_preprocess == 8 &&
             counters.motion_frame_preprocess <= 240,
         d.str());
}

// --------------------------------------------------------------------------
// 6. Fusion invariants on 1000 random positive-score triples.

void crit_fusion_invariants() {
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> qd(0.2, 9.8);
  std::uniform_real_distribution<double> wd(0.05, 1.0);

  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> q = {qd(rng), qd(rng), qd(rng)};
    std::vector<double> w = {wd(rng), wd(rng), wd(rng)};
    const double wsum = w[0] + w[1] + w[2];
    for (auto& v : w) v /= wsum;
    if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-12) ++bad;

    const double fused = vqa::fuse_multiscale(q, w);
    const double lo = *std::min_element(q.begin(), q.end());
    const double hi = *std::max_element(q.begin(), q.end());
    if (!(fused >= lo - 1e-9 && fused <= hi + 1e-9)) ++bad;

    const double c = qd(rng);
    const double idem = vqa::fuse_multiscale({c, c, c}, w);
    if (std::abs(idem - c) > 1e-9 * std::max(1.0, c)) ++bad;

    std::vector<double> q2 = q;
    q2[static_cast<size_t>(trial % 3)] += 0.25;
    if (vqa::fuse_multiscale(q2, w) < fused - 1e-12) ++bad;
  }

  const std::vector<double> w3 = vqa::scale_weights({}, {540.0, 720.0, 1080.0});
  if (std::abs(w3[0] + w3[1] + w3[2] - 1.0) > 1e-12) ++bad;

  report("fusion-invariants", bad == 0,
         bad == 0 ? "idempotence, bounds, monotonicity, normalization on 1000 random triples"
                  : std::to_string(bad) + " violations");
}

// --------------------------------------------------------------------------
// 7. Two identical seeded CLI training runs emit bit-identical metrics.

void crit_cli_determinism(const std::string& cli, const fs::path& work) {
  const fs::path manifest = work / "synth100" / "manifest.txt";
  if (!fs::exists(manifest))
    vqa::synthesize_dataset(100, 20260801, vqa::SynthProfile::stub(), (work / "synth100").string());

  auto make_cfg = [&](const char* name, const char* out_dir) {
    nlohmann::ordered_json j;
    j["profile"] = "stub";
    j["train"] = {{"epochs", 4}, {"seed", 11}};
    j["dataset"] = {{"manifest", manifest.string()}};
    j["output_dir"] = (work / out_dir).string();
    j["splits"] = 2;
    const fs::path p = work / name;
    std::ofstream f(p);
    f << j.dump(1);
    return p;
  };

  const fs::path cfg_a = make_cfg("det_a.json", "det_run_a");
  const fs::path cfg_b = make_cfg("det_b.json", "det_run_b");

  auto run = [&](const fs::path& cfg, const char* log) {
    const std::string cmd = "\"" + cli + "\" train --json --config \"" + cfg.string() + "\" > \"" +
                            (work / log).string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };

  const int rc_a = run(cfg_a, "det_a.log");
  const int rc_b = run(cfg_b, "det_b.log");
  if (rc_a != 0 || rc_b != 0) {
    report("train-determinism", false,
           "cli exited with " + std::to_string(rc_a) + " / " + std::to_string(rc_b));
    return;
  }

  const std::string ma = read_file(work / "det_run_a" / "metrics.json");
  const std::string mb = read_file(work / "det_run_b" / "metrics.json");
  const std::string la = read_file(work / "det_run_a" / "split0" / "train_log.jsonl");
  const std::string lb = read_file(work / "det_run_b" / "split0" / "train_log.jsonl");

  std::ostringstream d;
  d << "metrics.json identical across runs (" << ma.size() << " bytes), training logs identical ("
    << la.size() << " bytes)";
  report("train-determinism", !ma.empty() && ma == mb && la == lb, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <vqa-cli> <work-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = fs::absolute(argv[2]);
  fs::create_directories(work);

  auto guarded = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(name, false, std::string("unexpected error: ") + e.what());
    }
  };

  guarded("csf-weights", [&] { crit_csf_weights(); });
  guarded("loss-oracles", [&] { crit_loss_oracles(); });
  guarded("metric-oracles", [&] { crit_metric_oracles(); });
  guarded("desk-scale-learning", [&] { crit_desk_scale_learning(work); });
  guarded("sparse-access", [&] { crit_sparse_access(work); });
  guarded("fusion-invariants", [&] { crit_fusion_invariants(); });
  guarded("train-determinism", [&] { crit_cli_determinism(cli, work); });

  std::printf("%d/7 criteria passed\n", 7 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
