#pragma once

#include <span>
#include <utility>

#include "mvdvc/interleave.hpp"

namespace mvdvc {

// Per-macroblock activity flags for one B frame, raster order over the
// macroblock grid. Transmitted raw at one bit per macroblock.
struct ActivityMap {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<uint8_t> dynamic;

  bool at(int gi, int gj) const { return dynamic[size_t(gj) * grid_w + gi] != 0; }
  int count() const;
};

// A macroblock is dynamic when its sum of absolute differences against the
// previous frame exceeds the threshold. Edge macroblocks may be smaller than
// mb when the frame dims aren't multiples of it.
ActivityMap mark_dynamic(const Frame& cur, const Frame& prev, int threshold, int mb = 16);

// Reference for the second frame of a pair: the I frame with the first
// frame's KEY cells overlaid wherever their macroblock is dynamic.
Frame build_updated_reference(const Frame& iframe, const Frame& b1, const InterleavePattern& p1,
                              const ActivityMap& map, int mb = 16);

// Static macroblocks become bit-exact copies of the co-located reference
// macroblocks; dynamic ones are left alone.
void restore_static(Frame& frame, const ActivityMap& map, const Frame& reference, int mb = 16);

// Raster-order pixel positions of WZ cells inside dynamic macroblocks: the
// sample layout of a subtracted WZ unit. Encoder and decoder derive it
// independently from the transmitted map.
std::vector<std::pair<int, int>> dynamic_wz_positions(const InterleavePattern& pat,
                                                      const ActivityMap& map, int mb = 16);

// A B-frame pair reduced to its moving content: one jointly intra-coded KEY
// frame with static slots flattened to the dynamic mean, the dynamic WZ
// pixels of both frames back to back, and the two maps that locate them.
struct PackedPair {
  Frame combined_key;
  std::vector<uint8_t> wz;  // b1's dynamic WZ pixels, then b2's
  ActivityMap map1, map2;
  uint8_t fill = 128;
};

PackedPair pack_dynamic(const Frame& b1, const Frame& b2, const InterleavePattern& p1,
                        const InterleavePattern& p2, const ActivityMap& m1,
                        const ActivityMap& m2, int mb = 16);

}  // namespace mvdvc
