#include "mvdvc/synth.hpp"

#include <random>
#include <stdexcept>

namespace mvdvc {

namespace {

Frame box_blur3(const Frame& f) {
  Frame out(f.width, f.height);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      int sum = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) sum += f.at_clamped(x + dx, y + dy);
      out.at(x, y) = uint8_t((sum + 4) / 9);
    }
  return out;
}

// crop at quarter-pel origin; integer origins copy pixels exactly
Frame crop(const Frame& canvas, int ox4, int oy4, int w, int h) {
  Frame out(w, h);
  if (ox4 % 4 == 0 && oy4 % 4 == 0) {
    int ox = ox4 / 4, oy = oy4 / 4;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(x, y) = canvas.at_clamped(ox + x, oy + y);
  } else {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(x, y) = sample_qpel(canvas, ox4 + 4 * x, oy4 + 4 * y);
  }
  return out;
}

void paint(Frame& f, const Frame& texture, int x0, int y0, int w, int h, int tx, int ty) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int fx = x0 + x, fy = y0 + y;
      if (fx < 0 || fx >= f.width || fy < 0 || fy >= f.height) continue;
      f.at(fx, fy) = texture.at_clamped(tx + x, ty + y);
    }
}

}  // namespace

Frame smooth_canvas(int w, int h, uint32_t seed) {
  Frame f(w, h);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& px : f.luma) px = uint8_t(dist(rng));
  return box_blur3(box_blur3(f));
}

MultiViewSequence synth_sequence(const std::string& pattern, const SynthParams& p) {
  if (p.width <= 0 || p.height <= 0 || p.frames <= 0 || p.views <= 0)
    throw std::invalid_argument("synth: dimensions, frames and views must be positive");

  bool moving = pattern == "translate";
  bool has_square = pattern == "square" || pattern == "mixed";
  bool has_strip = pattern == "occlusion" || pattern == "mixed";
  if (!moving && !has_square && !has_strip && pattern != "static" && pattern != "stereo")
    throw std::invalid_argument("synth: unknown pattern '" + pattern + "'");

  int max_shift_x = (std::abs(p.dx4) * p.frames + 3) / 4 + p.view_disparity * p.views;
  int max_shift_y = (std::abs(p.dy4) * p.frames + 3) / 4;
  int margin = 16 + std::max(max_shift_x, max_shift_y);
  Frame canvas = smooth_canvas(p.width + 2 * margin, p.height + 2 * margin, p.seed);
  // independent texture so painted regions contrast with the background
  Frame alien = smooth_canvas(std::max(p.square, p.strip_w) + 32, p.height + 32, p.seed ^ 0x9e3779b9u);

  MultiViewSequence seq;
  seq.views.resize(size_t(p.views));
  for (int v = 0; v < p.views; ++v) {
    for (int f = 0; f < p.frames; ++f) {
      int ox4 = 4 * (margin + v * p.view_disparity);
      int oy4 = 4 * margin;
      if (moving) {
        ox4 += f * p.dx4;
        oy4 += f * p.dy4;
      }
      Frame frame = crop(canvas, ox4, oy4, p.width, p.height);
      if (has_square) {
        int sx = 8 + f * p.speed - v * p.view_disparity;
        int sy = (p.height - p.square) / 2;
        paint(frame, alien, sx, sy, p.square, p.square, 8, 8);
      }
      if (has_strip && v == 0) {
        int sx = p.width - p.strip_w - 8;
        paint(frame, alien, sx, 4, p.strip_w, p.height - 8, 4, 4);
      }
      seq.views[size_t(v)].frames.push_back(std::move(frame));
    }
  }
  return seq;
}

}  // namespace mvdvc
