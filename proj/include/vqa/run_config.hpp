#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "vqa/common.hpp"
#include "vqa/csf.hpp"
#include "vqa/training.hpp"

namespace vqa {

// Run configuration file: JSON, schema-validated, unknown keys rejected.
// Relative paths resolve against the config file's directory.
//
// {
//   "profile": "stub",
//   "train": { "epochs": 30, "seed": 7, ... },
//   "adapters": { "backbone": "stub_cnn", "motion": "stub_motion" },
//   "dataset": { "manifest": "data/manifest.txt", "targets": ["other/manifest.txt"] },
//   "viewing": { "distance": 35, "picture_height": 11.3, "luminance": 200, "angular_area": 606 },
//   "scales": [540, 720, 1080],
//   "output_dir": "runs/exp1",
//   "splits": 10
// }

struct RunConfig {
  TrainConfig train;
  std::string manifest_path;
  std::vector<std::string> target_manifests;
  ViewingEnvironment env;
  std::vector<double> scales = {540.0, 720.0, 1080.0};
  std::string output_dir = "runs/out";
  int splits = 10;
};

namespace detail {
inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                           const std::string& where, std::vector<std::string>& issues) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      issues.push_back(where + ": unknown key '" + key + "'");
  }
}

inline std::string resolve_against(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path fp(p);
  return fp.is_absolute() ? fp.string() : (base / fp).string();
}
}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object", {});
  std::vector<std::string> issues;
  detail::reject_unknown(j, {"profile", "train", "adapters", "dataset", "viewing", "scales",
                             "output_dir", "splits"},
                         "config", issues);

  RunConfig rc;
  try {
    nlohmann::json train_obj = j.value("train", nlohmann::json::object());
    if (!train_obj.is_object()) throw ValidationError("'train' must be an object", {});
    if (train_obj.contains("profile"))
      issues.push_back("train: 'profile' belongs at the top level");
    else
      train_obj["profile"] = j.value("profile", std::string("paper"));

    if (j.contains("adapters")) {
      const auto& a = j.at("adapters");
      if (!a.is_object()) throw ValidationError("'adapters' must be an object", {});
      detail::reject_unknown(a, {"backbone", "motion"}, "adapters", issues);
      if (a.contains("backbone")) train_obj["backbone"] = a.at("backbone");
      if (a.contains("motion")) train_obj["motion"] = a.at("motion");
    }
    if (issues.empty()) rc.train = config_from_json(train_obj);

    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (!d.is_object()) throw ValidationError("'dataset' must be an object", {});
      detail::reject_unknown(d, {"manifest", "targets"}, "dataset", issues);
      if (d.contains("manifest"))
        rc.manifest_path = detail::resolve_against(base_dir, d.at("manifest").get<std::string>());
      if (d.contains("targets"))
        for (const auto& t : d.at("targets"))
          rc.target_manifests.push_back(detail::resolve_against(base_dir, t.get<std::string>()));
    }

    if (j.contains("viewing")) {
      const auto& v = j.at("viewing");
      if (!v.is_object()) throw ValidationError("'viewing' must be an object", {});
      detail::reject_unknown(v, {"distance", "picture_height", "luminance", "angular_area"},
                             "viewing", issues);
      if (v.contains("distance")) rc.env.distance = v.at("distance").get<double>();
      if (v.contains("picture_height")) rc.env.picture_height = v.at("picture_height").get<double>();
      if (v.contains("luminance")) rc.env.luminance = v.at("luminance").get<double>();
      if (v.contains("angular_area")) rc.env.angular_area = v.at("angular_area").get<double>();
      rc.env.validate();
    }

    if (j.contains("scales")) {
      rc.scales.clear();
      for (const auto& s : j.at("scales")) rc.scales.push_back(s.get<double>());
      if (rc.scales.empty()) issues.push_back("scales: must not be empty");
      for (size_t i = 0; i + 1 < rc.scales.size(); ++i)
        if (!(rc.scales[i] < rc.scales[i + 1]))
          issues.push_back("scales: must be strictly ascending");
      if (!rc.scales.empty() && rc.scales.front() <= 0.0)
        issues.push_back("scales: must be positive");
    }

    if (j.contains("output_dir")) {
      rc.output_dir = detail::resolve_against(base_dir, j.at("output_dir").get<std::string>());
    } else {
      rc.output_dir = detail::resolve_against(base_dir, rc.output_dir);
    }

    if (j.contains("splits")) {
      rc.splits = j.at("splits").get<int>();
      if (rc.splits < 1 || rc.splits > 50) issues.push_back("splits: must be in [1, 50]");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("run config has wrong field types", {e.what()});
  }

  if (!issues.empty()) throw ValidationError("run config is invalid", issues);
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("run config " + path + " is not valid JSON", {e.what()});
  }
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace vqa
