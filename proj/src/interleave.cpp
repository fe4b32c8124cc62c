#include "mvdvc/interleave.hpp"

#include <stdexcept>

namespace mvdvc {

InterleavePattern InterleavePattern::for_frame(int width, int height, int block_size,
                                               Parity parity) {
  if (block_size != 4 && block_size != 8 && block_size != 16)
    throw std::invalid_argument("interleave block size must be 4, 8 or 16");
  if (width <= 0 || height <= 0 || width % block_size || height % block_size)
    throw std::invalid_argument("frame dimensions must be positive multiples of the block size");
  InterleavePattern p;
  p.block_size = block_size;
  p.parity = parity;
  p.grid_w = width / block_size;
  p.grid_h = height / block_size;
  return p;
}

int InterleavePattern::key_count() const {
  int n = 0;
  for (int i = 0; i < grid_h; i++)
    for (int j = 0; j < grid_w; j++) n += is_key(i, j);
  return n;
}

std::pair<int, int> BlockGroup::block_pos(int k) const {
  int seen = 0;
  for (int i = 0; i < pattern.grid_h; i++)
    for (int j = 0; j < pattern.grid_w; j++)
      if (pattern.is_key(i, j) == key_side && seen++ == k) return {i, j};
  throw std::out_of_range("block_pos: index past end of group");
}

static void copy_block(const Frame& src, int sx, int sy, uint8_t* dst, int b) {
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++) dst[y * b + x] = src.at(sx + x, sy + y);
}

static void paste_block(Frame& dst, int dx, int dy, const uint8_t* src, int b) {
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++) dst.at(dx + x, dy + y) = src[y * b + x];
}

std::pair<BlockGroup, BlockGroup> split_checkerboard(const Frame& f, const InterleavePattern& p) {
  if (f.width != p.grid_w * p.block_size || f.height != p.grid_h * p.block_size)
    throw std::invalid_argument("split_checkerboard: pattern does not match frame");
  const int b = p.block_size;
  BlockGroup key{p, true, f.width, f.height, {}};
  BlockGroup wz{p, false, f.width, f.height, {}};
  key.pixels.resize(size_t(key.block_count()) * b * b);
  wz.pixels.resize(size_t(wz.block_count()) * b * b);
  int nk = 0, nw = 0;
  for (int i = 0; i < p.grid_h; i++)
    for (int j = 0; j < p.grid_w; j++) {
      if (p.is_key(i, j))
        copy_block(f, j * b, i * b, key.block(nk++), b);
      else
        copy_block(f, j * b, i * b, wz.block(nw++), b);
    }
  return {std::move(key), std::move(wz)};
}

Frame merge_groups(const BlockGroup& key, const BlockGroup& wz) {
  if (key.frame_w != wz.frame_w || key.frame_h != wz.frame_h || !key.key_side || wz.key_side)
    throw std::invalid_argument("merge_groups: groups do not form one frame");
  const auto& p = key.pattern;
  const int b = p.block_size;
  Frame f(key.frame_w, key.frame_h);
  int nk = 0, nw = 0;
  for (int i = 0; i < p.grid_h; i++)
    for (int j = 0; j < p.grid_w; j++) {
      if (p.is_key(i, j))
        paste_block(f, j * b, i * b, key.block(nk++), b);
      else
        paste_block(f, j * b, i * b, wz.block(nw++), b);
    }
  return f;
}

Frame pack_key_group(const BlockGroup& key) {
  const auto& p = key.pattern;
  if (p.grid_w % 2)
    throw std::invalid_argument("pack_key_group: needs an even number of block columns");
  const int b = p.block_size;
  Frame packed(key.frame_w / 2, key.frame_h);
  int k = 0;
  for (int i = 0; i < p.grid_h; i++) {
    int out_j = 0;
    for (int j = 0; j < p.grid_w; j++)
      if (p.is_key(i, j) == key.key_side) paste_block(packed, (out_j++) * b, i * b, key.block(k++), b);
  }
  return packed;
}

BlockGroup unpack_key_group(const Frame& packed, const InterleavePattern& p) {
  if (p.grid_w % 2 || packed.width != p.grid_w * p.block_size / 2 ||
      packed.height != p.grid_h * p.block_size)
    throw std::invalid_argument("unpack_key_group: packed frame does not match pattern");
  const int b = p.block_size;
  BlockGroup key{p, true, p.grid_w * b, p.grid_h * b, {}};
  key.pixels.resize(size_t(key.block_count()) * b * b);
  int k = 0;
  for (int i = 0; i < p.grid_h; i++) {
    int in_j = 0;
    for (int j = 0; j < p.grid_w; j++)
      if (p.is_key(i, j)) copy_block(packed, (in_j++) * b, i * b, key.block(k++), b);
  }
  return key;
}

Frame temporal_interleave(const BlockGroup& a, const BlockGroup& b) {
  if (a.frame_w != b.frame_w || a.frame_h != b.frame_h ||
      a.pattern.block_size != b.pattern.block_size)
    throw std::invalid_argument("temporal_interleave: group geometry mismatch");
  if (a.pattern.parity != b.pattern.parity) {
    // complementary checkerboards: both groups keep their native positions
    const int bs = a.pattern.block_size;
    Frame f(a.frame_w, a.frame_h);
    for (const BlockGroup* g : {&a, &b}) {
      int k = 0;
      for (int i = 0; i < g->pattern.grid_h; i++)
        for (int j = 0; j < g->pattern.grid_w; j++)
          if (g->pattern.is_key(i, j) == g->key_side)
            paste_block(f, j * bs, i * bs, g->block(k++), bs);
    }
    return f;
  }
  // equal parity: pack each half-frame and place them side by side
  Frame left = pack_key_group(a), right = pack_key_group(b);
  Frame f(a.frame_w, a.frame_h);
  for (int y = 0; y < f.height; y++)
    for (int x = 0; x < left.width; x++) {
      f.at(x, y) = left.at(x, y);
      f.at(x + left.width, y) = right.at(x, y);
    }
  return f;
}

std::pair<BlockGroup, BlockGroup> temporal_deinterleave(const Frame& combined,
                                                        const InterleavePattern& pa,
                                                        const InterleavePattern& pb) {
  const int bs = pa.block_size;
  if (pa.parity != pb.parity) {
    auto pick = [&](const InterleavePattern& p) {
      BlockGroup g{p, true, combined.width, combined.height, {}};
      g.pixels.resize(size_t(g.block_count()) * bs * bs);
      int k = 0;
      for (int i = 0; i < p.grid_h; i++)
        for (int j = 0; j < p.grid_w; j++)
          if (p.is_key(i, j)) copy_block(combined, j * bs, i * bs, g.block(k++), bs);
      return g;
    };
    return {pick(pa), pick(pb)};
  }
  int half = combined.width / 2;
  Frame left(half, combined.height), right(half, combined.height);
  for (int y = 0; y < combined.height; y++)
    for (int x = 0; x < half; x++) {
      left.at(x, y) = combined.at(x, y);
      right.at(x, y) = combined.at(x + half, y);
    }
  return {unpack_key_group(left, pa), unpack_key_group(right, pb)};
}

}  // namespace mvdvc
