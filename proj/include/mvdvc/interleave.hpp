#pragma once

#include <utility>
#include <vector>

#include "mvdvc/frame.hpp"

namespace mvdvc {

enum class Parity : uint8_t { even, odd };

inline Parity alternate_parity(Parity p) { return p == Parity::even ? Parity::odd : Parity::even; }

// Checkerboard split of a frame into KEY and WZ block groups. A block at
// block-coordinates (row i, col j) belongs to the KEY group iff (i+j) mod 2
// matches the pattern parity.
struct InterleavePattern {
  int block_size = 16;
  Parity parity = Parity::even;
  int grid_w = 0;
  int grid_h = 0;

  static InterleavePattern for_frame(int width, int height, int block_size, Parity parity);

  bool is_key(int bi, int bj) const {
    return ((bi + bj) & 1) == (parity == Parity::odd ? 1 : 0);
  }
  int key_count() const;
  int wz_count() const { return grid_w * grid_h - key_count(); }
};

// canonical per-frame parity so consecutive frames alternate patterns
inline Parity parity_for_frame(int frame) { return (frame & 1) ? Parity::odd : Parity::even; }

// One side of a checkerboard split. Blocks are stored packed, in row-major
// scan order over the block grid, row-major pixels inside each block.
struct BlockGroup {
  InterleavePattern pattern;
  bool key_side = true;  // which parity class of `pattern` these blocks are
  int frame_w = 0, frame_h = 0;
  std::vector<uint8_t> pixels;  // block_count * B * B

  int block_count() const { return key_side ? pattern.key_count() : pattern.wz_count(); }
  uint8_t* block(int k) { return pixels.data() + size_t(k) * pattern.block_size * pattern.block_size; }
  const uint8_t* block(int k) const {
    return pixels.data() + size_t(k) * pattern.block_size * pattern.block_size;
  }
  // block-grid coordinates of packed block k
  std::pair<int, int> block_pos(int k) const;
};

std::pair<BlockGroup, BlockGroup> split_checkerboard(const Frame& f, const InterleavePattern& p);
Frame merge_groups(const BlockGroup& key, const BlockGroup& wz);

// KEY blocks of each block-row packed left-to-right into a half-width frame.
// Requires an even number of block columns.
Frame pack_key_group(const BlockGroup& key);
BlockGroup unpack_key_group(const Frame& packed, const InterleavePattern& p);

// Two KEY groups combined into one full frame for joint intra coding.
// Complementary parities tile the frame at their native positions; equal
// parities are packed side by side (first group left).
Frame temporal_interleave(const BlockGroup& a, const BlockGroup& b);
std::pair<BlockGroup, BlockGroup> temporal_deinterleave(const Frame& combined,
                                                        const InterleavePattern& pa,
                                                        const InterleavePattern& pb);

}  // namespace mvdvc
