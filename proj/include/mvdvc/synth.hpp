#pragma once

#include <string>

#include "mvdvc/frame.hpp"

namespace mvdvc {

// Synthetic test sequences: crops of one smooth textured canvas, so motion
// and disparity are known exactly. Patterns:
//   static     nothing moves
//   translate  global (dx4, dy4)/4-pixel shift per frame
//   stereo     static in time, adjacent views offset by view_disparity
//   square     moving textured square over a static background
//   occlusion  stereo plus a strip of content only view 1 sees
//   mixed      moving square plus an occluded strip (stereo)
struct SynthParams {
  int width = 64;
  int height = 64;
  int frames = 4;
  int views = 1;
  uint32_t seed = 1;
  int dx4 = 4;  // quarter-pel per frame
  int dy4 = 0;
  int view_disparity = 8;  // pixels between adjacent views
  int square = 24;
  int speed = 4;  // square pixels per frame
  int strip_w = 16;
};

Frame smooth_canvas(int w, int h, uint32_t seed);

MultiViewSequence synth_sequence(const std::string& pattern, const SynthParams& p);

}  // namespace mvdvc
