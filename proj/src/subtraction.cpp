#include "mvdvc/subtraction.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <tuple>

namespace mvdvc {

int ActivityMap::count() const {
  int n = 0;
  for (uint8_t d : dynamic) n += d != 0;
  return n;
}

ActivityMap mark_dynamic(const Frame& cur, const Frame& prev, int threshold, int mb) {
  if (!cur.same_size(prev)) throw std::invalid_argument("mark_dynamic: frame size mismatch");
  ActivityMap m;
  m.grid_w = (cur.width + mb - 1) / mb;
  m.grid_h = (cur.height + mb - 1) / mb;
  m.dynamic.assign(size_t(m.grid_w) * m.grid_h, 0);
  for (int gj = 0; gj < m.grid_h; gj++) {
    for (int gi = 0; gi < m.grid_w; gi++) {
      long sad = 0;
      int x1 = std::min((gi + 1) * mb, cur.width);
      int y1 = std::min((gj + 1) * mb, cur.height);
      for (int y = gj * mb; y < y1; y++)
        for (int x = gi * mb; x < x1; x++) sad += std::abs(int(cur.at(x, y)) - int(prev.at(x, y)));
      if (sad > threshold) m.dynamic[size_t(gj) * m.grid_w + gi] = 1;
    }
  }
  return m;
}

namespace {

bool cell_dynamic(const ActivityMap& map, int bi, int bj, int block, int mb) {
  int x = bj * block, y = bi * block;
  return map.at(std::min(x / mb, map.grid_w - 1), std::min(y / mb, map.grid_h - 1));
}

}  // namespace

Frame build_updated_reference(const Frame& iframe, const Frame& b1, const InterleavePattern& p1,
                              const ActivityMap& map, int mb) {
  Frame ref = iframe;
  const int b = p1.block_size;
  for (int bi = 0; bi < p1.grid_h; bi++) {
    for (int bj = 0; bj < p1.grid_w; bj++) {
      if (!p1.is_key(bi, bj) || !cell_dynamic(map, bi, bj, b, mb)) continue;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) ref.at(x, y) = b1.at(x, y);
    }
  }
  return ref;
}

void restore_static(Frame& frame, const ActivityMap& map, const Frame& reference, int mb) {
  for (int gj = 0; gj < map.grid_h; gj++) {
    for (int gi = 0; gi < map.grid_w; gi++) {
      if (map.at(gi, gj)) continue;
      int x1 = std::min((gi + 1) * mb, frame.width);
      int y1 = std::min((gj + 1) * mb, frame.height);
      for (int y = gj * mb; y < y1; y++)
        for (int x = gi * mb; x < x1; x++) frame.at(x, y) = reference.at(x, y);
    }
  }
}

std::vector<std::pair<int, int>> dynamic_wz_positions(const InterleavePattern& pat,
                                                      const ActivityMap& map, int mb) {
  std::vector<std::pair<int, int>> pos;
  const int b = pat.block_size;
  for (int bi = 0; bi < pat.grid_h; bi++) {
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (pat.is_key(bi, bj) || !cell_dynamic(map, bi, bj, b, mb)) continue;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) pos.emplace_back(x, y);
    }
  }
  return pos;
}

PackedPair pack_dynamic(const Frame& b1, const Frame& b2, const InterleavePattern& p1,
                        const InterleavePattern& p2, const ActivityMap& m1,
                        const ActivityMap& m2, int mb) {
  PackedPair out;
  out.map1 = m1;
  out.map2 = m2;

  long sum = 0, n = 0;
  auto scan_keys = [&](const Frame& f, const InterleavePattern& p, const ActivityMap& m) {
    const int b = p.block_size;
    for (int bi = 0; bi < p.grid_h; bi++)
      for (int bj = 0; bj < p.grid_w; bj++) {
        if (!p.is_key(bi, bj) || !cell_dynamic(m, bi, bj, b, mb)) continue;
        for (int y = bi * b; y < (bi + 1) * b; y++)
          for (int x = bj * b; x < (bj + 1) * b; x++) {
            sum += f.at(x, y);
            n++;
          }
      }
  };
  scan_keys(b1, p1, m1);
  scan_keys(b2, p2, m2);
  out.fill = n ? uint8_t(std::lround(double(sum) / double(n))) : uint8_t(128);

  auto key_group = [&](const Frame& f, const InterleavePattern& p, const ActivityMap& m) {
    auto [key, wz] = split_checkerboard(f, p);
    const int b = p.block_size;
    for (int k = 0; k < key.block_count(); k++) {
      auto [bi, bj] = key.block_pos(k);
      if (cell_dynamic(m, bi, bj, b, mb)) continue;
      uint8_t* px = key.block(k);
      for (int i = 0; i < b * b; i++) px[i] = out.fill;
    }
    return key;
  };
  out.combined_key = temporal_interleave(key_group(b1, p1, m1), key_group(b2, p2, m2));

  for (auto [f, p, m] : {std::tuple{&b1, &p1, &m1}, std::tuple{&b2, &p2, &m2}})
    for (auto [x, y] : dynamic_wz_positions(*p, *m, mb)) out.wz.push_back(f->at(x, y));
  return out;
}

}  // namespace mvdvc
