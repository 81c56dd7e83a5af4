#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "vqa/common.hpp"
#include "vqa/image.hpp"

namespace vqa {

struct VideoMeta {
  std::string uri;
  int64_t frame_count = 0;  // l
  double frame_rate = 0.0;  // r, frames/second
  int width = 0;
  int height = 0;

  double duration_s() const { return frame_rate > 0 ? frame_count / frame_rate : 0.0; }

  void validate() const {
    if (frame_count < 1) throw InvalidArgument("VideoMeta: frame_count < 1 for " + uri);
    if (frame_rate <= 0.0) throw InvalidArgument("VideoMeta: frame_rate <= 0 for " + uri);
    if (width < 1 || height < 1) throw InvalidArgument("VideoMeta: empty frame size for " + uri);
  }
};

// Random access into a decoded video. Implementations must be deterministic;
// read_frame is const so scoring can fan out across threads with one
// source per worker.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual VideoMeta meta() const = 0;
  // RGB image in [0,1]. Throws IoError naming the frame index on decode
  // failure, InvalidArgument when index is out of [0, frame_count).
  virtual Image read_frame(int64_t index) const = 0;
};

namespace y4m {

enum class Subsampling { kC444, kC420 };

struct Header {
  int width = 0;
  int height = 0;
  int fps_num = 0;
  int fps_den = 1;
  Subsampling chroma = Subsampling::kC444;
  std::streamoff data_offset = 0;
};

inline Header parse_header(std::istream& in, const std::string& uri) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("YUV4MPEG2", 0) != 0)
    throw IoError("y4m: missing YUV4MPEG2 signature in " + uri);
  Header h;
  std::istringstream tokens(line);
  std::string tok;
  tokens >> tok;  // signature
  while (tokens >> tok) {
    if (tok.empty()) continue;
    switch (tok[0]) {
      case 'W': h.width = std::stoi(tok.substr(1)); break;
      case 'H': h.height = std::stoi(tok.substr(1)); break;
      case 'F': {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw IoError("y4m: bad frame rate tag in " + uri);
        h.fps_num = std::stoi(tok.substr(1, colon - 1));
        h.fps_den = std::stoi(tok.substr(colon + 1));
        break;
      }
      case 'C': {
        const std::string c = tok.substr(1);
        if (c == "444") h.chroma = Subsampling::kC444;
        else if (c.rfind("420", 0) == 0) h.chroma = Subsampling::kC420;
        else throw IoError("y4m: unsupported chroma '" + c + "' in " + uri);
        break;
      }
      default: break;  // interlacing/aspect/extensions ignored
    }
  }
  if (h.width < 1 || h.height < 1 || h.fps_num < 1 || h.fps_den < 1)
    throw IoError("y4m: incomplete header in " + uri);
  if (h.chroma == Subsampling::kC420 && (h.width % 2 || h.height % 2))
    throw IoError("y4m: odd dimensions with 4:2:0 chroma in " + uri);
  h.data_offset = in.tellg();
  return h;
}

inline size_t frame_bytes(const Header& h) {
  const size_t luma = static_cast<size_t>(h.width) * h.height;
  return h.chroma == Subsampling::kC444 ? 3 * luma : luma + luma / 2;
}

}  // namespace y4m

// YUV4MPEG2 reader with O(1) frame seeks (fixed-size frames).
class Y4mSource final : public FrameSource {
 public:
  explicit Y4mSource(const std::string& uri) : uri_(uri), in_(uri, std::ios::binary) {
    if (!in_) throw IoError("cannot open video: " + uri);
    header_ = y4m::parse_header(in_, uri);
    // FRAME marker lines are part of each frame record.
    in_.seekg(header_.data_offset);
    std::string marker;
    if (!std::getline(in_, marker) || marker.rfind("FRAME", 0) != 0)
      throw IoError("y4m: missing first FRAME marker in " + uri);
    marker_bytes_ = static_cast<std::streamoff>(marker.size()) + 1;
    record_bytes_ = marker_bytes_ + static_cast<std::streamoff>(y4m::frame_bytes(header_));
    in_.seekg(0, std::ios::end);
    const std::streamoff total = in_.tellg() - header_.data_offset;
    frame_count_ = total / record_bytes_;
    if (frame_count_ < 1 || total % record_bytes_ != 0)
      throw IoError("y4m: truncated stream in " + uri);
  }

  VideoMeta meta() const override {
    VideoMeta m;
    m.uri = uri_;
    m.frame_count = frame_count_;
    m.frame_rate = static_cast<double>(header_.fps_num) / header_.fps_den;
    m.width = header_.width;
    m.height = header_.height;
    return m;
  }

  Image read_frame(int64_t index) const override {
    if (index < 0 || index >= frame_count_)
      throw InvalidArgument("y4m: frame index " + std::to_string(index) + " out of range in " + uri_);
    const size_t bytes = y4m::frame_bytes(header_);
    std::vector<uint8_t> buf(bytes);
    {
      // ifstream seek/read is stateful; guard so const read_frame stays
      // usable from multiple threads on one source.
      std::lock_guard<std::mutex> lock(io_mutex_);
      in_.clear();
      in_.seekg(header_.data_offset + index * record_bytes_ + marker_bytes_);
      in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
      if (in_.gcount() != static_cast<std::streamsize>(bytes))
        throw IoError("y4m: failed to decode frame " + std::to_string(index) + " of " + uri_);
    }
    return to_rgb(buf);
  }

 private:
  Image to_rgb(const std::vector<uint8_t>& buf) const {
    const int w = header_.width, h = header_.height;
    Image img(h, w, 3);
    const size_t luma = static_cast<size_t>(w) * h;
    auto px = [](uint8_t v) { return v / 255.0; };
    if (header_.chroma == y4m::Subsampling::kC444) {
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const size_t i = static_cast<size_t>(y) * w + x;
          double r, g, b;
          ycbcr_to_rgb(px(buf[i]), px(buf[luma + i]), px(buf[2 * luma + i]), r, g, b);
          img.at(y, x, 0) = r;
          img.at(y, x, 1) = g;
          img.at(y, x, 2) = b;
        }
    } else {
      const int cw = w / 2;
      const size_t chroma = luma / 4;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const size_t i = static_cast<size_t>(y) * w + x;
          const size_t ci = static_cast<size_t>(y / 2) * cw + x / 2;
          double r, g, b;
          ycbcr_to_rgb(px(buf[i]), px(buf[luma + ci]), px(buf[luma + chroma + ci]), r, g, b);
          img.at(y, x, 0) = r;
          img.at(y, x, 1) = g;
          img.at(y, x, 2) = b;
        }
    }
    return img;
  }

  std::string uri_;
  mutable std::ifstream in_;
  mutable std::mutex io_mutex_;
  y4m::Header header_;
  std::streamoff marker_bytes_ = 0;
  std::streamoff record_bytes_ = 0;
  int64_t frame_count_ = 0;
};

// Streaming 4:4:4 writer used by the synthetic dataset generator.
class Y4mWriter {
 public:
  Y4mWriter(const std::string& uri, int width, int height, int fps_num, int fps_den = 1)
      : uri_(uri), out_(uri, std::ios::binary), width_(width), height_(height) {
    if (!out_) throw IoError("cannot create video: " + uri);
    out_ << "YUV4MPEG2 W" << width << " H" << height << " F" << fps_num << ":" << fps_den
         << " Ip A1:1 C444\n";
  }

  void write_frame(const Image& rgb) {
    if (rgb.height != height_ || rgb.width != width_ || rgb.channels != 3)
      throw InvalidArgument("y4m write: frame shape mismatch for " + uri_);
    const size_t luma = static_cast<size_t>(width_) * height_;
    std::vector<uint8_t> buf(3 * luma);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) {
        double yy, cb, cr;
        rgb_to_ycbcr(std::clamp(rgb.at(y, x, 0), 0.0, 1.0), std::clamp(rgb.at(y, x, 1), 0.0, 1.0),
                     std::clamp(rgb.at(y, x, 2), 0.0, 1.0), yy, cb, cr);
        const size_t i = static_cast<size_t>(y) * width_ + x;
        buf[i] = quantize(yy);
        buf[luma + i] = quantize(cb);
        buf[2 * luma + i] = quantize(cr);
      }
    out_ << "FRAME\n";
    out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out_) throw IoError("y4m write: failed writing frame to " + uri_);
  }

  void close() {
    if (!out_.is_open()) return;
    out_.flush();
    if (!out_) throw IoError("y4m write: failed flushing " + uri_);
    out_.close();
  }

 private:
  static uint8_t quantize(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
  }

  std::string uri_;
  std::ofstream out_;
  int width_;
  int height_;
};

// Container adapter registry, keyed by lowercase file extension.
// The .y4m codec is built in; other containers bind here.
using FrameSourceFactory = std::function<std::unique_ptr<FrameSource>(const std::string&)>;

inline std::map<std::string, FrameSourceFactory>& frame_source_registry() {
  static std::map<std::string, FrameSourceFactory> registry = {
      {".y4m", [](const std::string& uri) { return std::make_unique<Y4mSource>(uri); }}};
  return registry;
}

inline void register_frame_source_factory(const std::string& extension, FrameSourceFactory f) {
  frame_source_registry()[extension] = std::move(f);
}

inline std::unique_ptr<FrameSource> open_video(const std::string& uri) {
  std::string ext = std::filesystem::path(uri).extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const auto& registry = frame_source_registry();
  const auto it = registry.find(ext);
  if (it == registry.end())
    throw IoError("no decoder registered for '" + ext + "' (uri: " + uri + ")");
  return it->second(uri);
}

// Frame-access accounting behind the sparse-sampling efficiency story:
// key-frame preprocessings are full-resolution, motion preprocessings
// are the low-resolution path. Duplicated resample indices reuse the
// already-preprocessed frame and are not counted twice.
struct AccessCounters {
  int64_t key_frame_preprocess = 0;
  int64_t motion_frame_preprocess = 0;
  int64_t frames_decoded = 0;

  void reset() { *this = AccessCounters{}; }
};

}  // namespace vqa
