#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvdvc {

// 8-bit luma plane, row-major. Chroma is never coded; it rides along as an
// opaque byte blob per frame so YUV output can reproduce the input exactly.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> luma;

  Frame() = default;
  Frame(int w, int h, uint8_t fill = 0) : width(w), height(h), luma(size_t(w) * h, fill) {}

  uint8_t& at(int x, int y) { return luma[size_t(y) * width + x]; }
  uint8_t at(int x, int y) const { return luma[size_t(y) * width + x]; }

  // replicate-border access, used by motion search near frame edges
  uint8_t at_clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width) x = width - 1;
    if (y < 0) y = 0;
    if (y >= height) y = height - 1;
    return luma[size_t(y) * width + x];
  }

  bool same_size(const Frame& o) const { return width == o.width && height == o.height; }
};

struct ViewSequence {
  std::vector<Frame> frames;
  // raw 4:2:0 chroma (Cb then Cr) per frame, possibly empty for synthetic input
  std::vector<std::vector<uint8_t>> chroma;
};

struct MultiViewSequence {
  std::vector<ViewSequence> views;
  double fps = 15.0;

  int num_views() const { return int(views.size()); }
  int num_frames() const { return views.empty() ? 0 : int(views[0].frames.size()); }
};

double mse(const Frame& a, const Frame& b);
double psnr(const Frame& a, const Frame& b);
double psnr_from_mse(double m);

// bilinear sample at quarter-pel coordinates (x4, y4) = 4*(x, y), replicated border
uint8_t sample_qpel(const Frame& f, int x4, int y4);

uint64_t frame_hash(const Frame& f);

}  // namespace mvdvc
