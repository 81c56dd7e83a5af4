#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vqa/common.hpp"

namespace vqa {

// Labeled datasets travel as flat text manifests: a versioned header line,
// then one record per line as whitespace-separated name=value fields.
//
//   #vqa-manifest v1
//   name=my-database
//   uri=clips/v000.y4m mos=3.84 mos_std=0.21 width=96 height=80 frames=128 fps=16
//
// Lines starting with '#' after the header are comments. uri and mos are
// required; the rest is optional metadata.

struct ManifestRecord {
  std::string uri;                 // as written in the file
  std::string resolved_uri;        // absolute, resolved against the manifest dir
  double mos = 0.0;
  std::optional<double> mos_std;
  int width = 0;                   // 0 = unknown
  int height = 0;
  int64_t frames = 0;
  double fps = 0.0;

  double duration_s() const { return fps > 0.0 ? static_cast<double>(frames) / fps : 0.0; }
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestRecord> records;

  size_t size() const { return records.size(); }
  std::vector<double> mos_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.mos);
    return out;
  }
};

namespace detail {
inline bool parse_double_strict(const std::string& s, double& out) {
  if (s.empty()) return false;
  size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size() && std::isfinite(out);
}

inline bool parse_int_strict(const std::string& s, int64_t& out) {
  if (s.empty()) return false;
  size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}
}  // namespace detail

inline constexpr const char* kManifestHeader = "#vqa-manifest v1";

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);

  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("manifest is empty: " + path, {});
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader)
    throw ValidationError("manifest header mismatch in " + path, {"first line must be '" +
                          std::string(kManifestHeader) + "', got '" + line + "'"});

  DatasetManifest m;
  std::vector<std::string> issues;
  std::set<std::string> seen_uris;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const std::string where = "line " + std::to_string(lineno);
    if (line.rfind("name=", 0) == 0 && line.find(' ') == std::string::npos) {
      m.name = line.substr(5);
      continue;
    }

    ManifestRecord rec;
    bool has_uri = false, has_mos = false, bad = false;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const size_t eq = tok.find('=');
      if (eq == std::string::npos) {
        issues.push_back(where + ": field '" + tok + "' is not name=value");
        bad = true;
        continue;
      }
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      double d = 0.0;
      int64_t i = 0;
      if (key == "uri") {
        rec.uri = val;
        has_uri = !val.empty();
      } else if (key == "mos") {
        if (!detail::parse_double_strict(val, d)) {
          issues.push_back(where + ": mos='" + val + "' is not a finite number");
          bad = true;
        } else {
          rec.mos = d;
          has_mos = true;
        }
      } else if (key == "mos_std") {
        if (!detail::parse_double_strict(val, d) || d < 0.0) {
          issues.push_back(where + ": mos_std='" + val + "' is not a number >= 0");
          bad = true;
        } else {
          rec.mos_std = d;
        }
      } else if (key == "width" || key == "height" || key == "frames") {
        if (!detail::parse_int_strict(val, i) || i < 0) {
          issues.push_back(where + ": " + key + "='" + val + "' is not an integer >= 0");
          bad = true;
        } else if (key == "width") {
          rec.width = static_cast<int>(i);
        } else if (key == "height") {
          rec.height = static_cast<int>(i);
        } else {
          rec.frames = i;
        }
      } else if (key == "fps") {
        if (!detail::parse_double_strict(val, d) || d < 0.0) {
          issues.push_back(where + ": fps='" + val + "' is not a number >= 0");
          bad = true;
        } else {
          rec.fps = d;
        }
      } else {
        issues.push_back(where + ": unknown field '" + key + "'");
        bad = true;
      }
    }
    if (!has_uri) issues.push_back(where + ": missing uri");
    if (!has_mos && !bad) issues.push_back(where + ": missing mos");
    if (!has_uri || !has_mos || bad) continue;

    if (!seen_uris.insert(rec.uri).second) {
      issues.push_back(where + ": duplicate uri '" + rec.uri + "'");
      continue;
    }
    const std::filesystem::path p(rec.uri);
    rec.resolved_uri = p.is_absolute() ? p.string() : (base / p).string();
    m.records.push_back(std::move(rec));
  }

  if (!issues.empty()) throw ValidationError("manifest " + path + " has invalid records", issues);
  if (m.records.empty()) throw ValidationError("manifest " + path + " has no records", {});
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  if (m.records.empty()) throw InvalidArgument("save_manifest: empty manifest");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << kManifestHeader << "\n";
  if (!m.name.empty()) out << "name=" << m.name << "\n";
  out.setf(std::ios::fmtflags(0), std::ios::floatfield);
  out.precision(17);
  for (const auto& r : m.records) {
    out << "uri=" << r.uri << " mos=" << r.mos;
    if (r.mos_std) out << " mos_std=" << *r.mos_std;
    if (r.width > 0) out << " width=" << r.width;
    if (r.height > 0) out << " height=" << r.height;
    if (r.frames > 0) out << " frames=" << r.frames;
    if (r.fps > 0) out << " fps=" << r.fps;
    out << "\n";
  }
  if (!out) throw IoError("failed writing manifest: " + path);
}

// One 80/20 partition of record indices.
struct SplitSpec {
  uint64_t seed = 0;
  int repeat_index = 0;
  double train_fraction = 0.8;
  std::vector<size_t> train_ids;
  std::vector<size_t> test_ids;
};

// Ten independent seeded partitions, reproducible from base_seed alone.
inline std::vector<SplitSpec> make_splits(const DatasetManifest& manifest, uint64_t base_seed,
                                          int repeats = 10) {
  const size_t n = manifest.size();
  if (n < 5) throw InvalidArgument("make_splits: need at least 5 records, have " +
                                   std::to_string(n));
  if (repeats < 1) throw InvalidArgument("make_splits: repeats must be >= 1");

  std::vector<SplitSpec> splits;
  splits.reserve(static_cast<size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937_64 rng(mix_seed(base_seed, 0x5317u, static_cast<uint64_t>(r)));
    std::shuffle(idx.begin(), idx.end(), rng);

    SplitSpec s;
    s.seed = base_seed;
    s.repeat_index = r;
    const size_t n_train = static_cast<size_t>(std::llround(0.8 * static_cast<double>(n)));
    s.train_ids.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test_ids.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(s.train_ids.begin(), s.train_ids.end());
    std::sort(s.test_ids.begin(), s.test_ids.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

}  // namespace vqa
