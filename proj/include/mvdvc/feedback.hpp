#pragma once

#include <span>
#include <vector>

#include "mvdvc/config.hpp"

namespace mvdvc {

// Per-pixel, per-plane record of where a decoded bitplane prefix disagreed
// with the side information. Planes are most-significant first; pixels not
// covered by Wyner-Ziv data stay zero.
struct ClippingMap {
  int width = 0;
  int height = 0;
  std::vector<std::vector<uint8_t>> clipped;  // [plane][y * width + x]

  int bitplanes() const { return int(clipped.size()); }
};

// Group index per 16x16 block, raster order over the ceil(w/16) x ceil(h/16)
// grid. A block lands in the smallest plane (1-based) at which any of its
// pixels clipped anywhere in the window; blocks that never clipped form one
// extra group bp_max + 1.
std::vector<int> assign_simple_groups(std::span<const ClippingMap> window, int block = 16);

// Block coding order from the mirrored request counters: descending count,
// ties by raster index. All-zero counters (including the first frame, which
// has no history) reduce to raster order.
std::vector<int> smart_order(std::span<const long> counts);

// Collapses groups too short to turbo-code on their own: walking group 1
// upward, a run of groups is closed once it accumulates min_bits; a short
// final run joins its predecessor. Returns the surviving group id (the last
// member of each run) for every original group, 1-based with slot 0 unused.
std::vector<int> merge_small_groups(std::span<const long> group_bits, long min_bits);

// Rate charged to the feedback channel per map update. Only the simple mode
// ships a map: one group id per Wyner-Ziv 16x16 block.
long feedback_overhead_bits(FeedbackMode mode, int wz_units, int bp_max);

// Decoder/encoder shared feedback bookkeeping. The simple side buffers
// clipping maps and refreshes the group assignment once per full window; the
// smart side accumulates mirrored per-block request counters.
struct FeedbackState {
  FeedbackMode mode = FeedbackMode::off;
  int window = 12;

  std::vector<ClippingMap> buffer;
  std::vector<int> groups;  // last completed window, empty before the first
  int group_count = 0;
  int updates = 0;

  std::vector<long> counters;  // smart, per 32x32 block

  // rolls the window; returns true when this push completed a window and
  // the group map was refreshed
  bool push_clipping(ClippingMap map, int block = 16);

  void ensure_counters(size_t blocks);
  void add_request(size_t block_index, long batches);
};

}  // namespace mvdvc
