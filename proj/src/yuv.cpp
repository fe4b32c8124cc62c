#include "mvdvc/yuv.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace mvdvc {

namespace {

using FilePtr = std::unique_ptr<FILE, int (*)(FILE*)>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace

ViewSequence read_yuv(const std::string& path, int width, int height, int frames) {
  if (width <= 0 || height <= 0 || width % 2 || height % 2)
    throw std::invalid_argument("read_yuv: dimensions must be positive and even");
  ViewSequence seq;
  if (frames == 0) return seq;
  auto f = open_file(path, "rb");
  const size_t luma_bytes = size_t(width) * height;
  const size_t chroma_bytes = luma_bytes / 2;
  for (int n = 0; n < frames; n++) {
    Frame fr(width, height);
    if (std::fread(fr.luma.data(), 1, luma_bytes, f.get()) != luma_bytes)
      throw std::runtime_error(path + ": truncated at frame " + std::to_string(n) + " (luma)");
    std::vector<uint8_t> chroma(chroma_bytes);
    if (std::fread(chroma.data(), 1, chroma_bytes, f.get()) != chroma_bytes)
      throw std::runtime_error(path + ": truncated at frame " + std::to_string(n) + " (chroma)");
    seq.frames.push_back(std::move(fr));
    seq.chroma.push_back(std::move(chroma));
  }
  return seq;
}

MultiViewSequence read_yuv_views(const std::vector<std::string>& paths, int width, int height,
                                 int frames, double fps) {
  MultiViewSequence mv;
  mv.fps = fps;
  for (const auto& p : paths) mv.views.push_back(read_yuv(p, width, height, frames));
  return mv;
}

void write_yuv(const std::string& path, const ViewSequence& seq) {
  auto f = open_file(path, "wb");
  for (size_t n = 0; n < seq.frames.size(); n++) {
    const Frame& fr = seq.frames[n];
    const size_t luma_bytes = fr.luma.size();
    if (std::fwrite(fr.luma.data(), 1, luma_bytes, f.get()) != luma_bytes)
      throw std::runtime_error("short write: " + path);
    std::vector<uint8_t> chroma;
    if (n < seq.chroma.size() && !seq.chroma[n].empty()) chroma = seq.chroma[n];
    else chroma.assign(luma_bytes / 2, 128);
    if (std::fwrite(chroma.data(), 1, chroma.size(), f.get()) != chroma.size())
      throw std::runtime_error("short write: " + path);
  }
}

}  // namespace mvdvc
