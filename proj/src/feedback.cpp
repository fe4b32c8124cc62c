#include "mvdvc/feedback.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mvdvc {

std::vector<int> assign_simple_groups(std::span<const ClippingMap> window, int block) {
  if (window.empty()) throw std::invalid_argument("assign_simple_groups: empty window");
  const int w = window.front().width;
  const int h = window.front().height;
  int bp_max = 0;
  for (const auto& m : window) {
    if (m.width != w || m.height != h)
      throw std::invalid_argument("assign_simple_groups: mismatched map dims");
    bp_max = std::max(bp_max, m.bitplanes());
  }
  const int bw = (w + block - 1) / block;
  const int bh = (h + block - 1) / block;
  std::vector<int> groups(size_t(bw) * bh, bp_max + 1);
  for (const auto& m : window) {
    for (int l = 0; l < m.bitplanes(); l++) {
      const auto& plane = m.clipped[l];
      for (int y = 0; y < h; y++) {
        for (int x = 0; x < w; x++) {
          if (!plane[size_t(y) * w + x]) continue;
          int& g = groups[size_t(y / block) * bw + x / block];
          g = std::min(g, l + 1);
        }
      }
    }
  }
  return groups;
}

std::vector<int> smart_order(std::span<const long> counts) {
  std::vector<int> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });
  return order;
}

std::vector<int> merge_small_groups(std::span<const long> group_bits, long min_bits) {
  const int n = int(group_bits.size());
  std::vector<int> merged(size_t(n) + 1, 0);
  int start = 1;
  long cum = 0;
  for (int g = 1; g <= n; g++) {
    cum += group_bits[g - 1];
    if (cum >= min_bits || g == n) {
      for (int k = start; k <= g; k++) merged[k] = g;
      start = g + 1;
      cum = 0;
    }
  }
  // a short tail run can't merge forward; fold it into its predecessor
  if (n > 0) {
    int last = merged[n];
    long tail = 0;
    for (int g = 1; g <= n; g++)
      if (merged[g] == last) tail += group_bits[g - 1];
    if (tail < min_bits) {
      int prev = 0;
      for (int g = 1; g <= n; g++)
        if (merged[g] != last) prev = merged[g];
      if (prev != 0)
        for (int g = 1; g <= n; g++)
          if (merged[g] == last) merged[g] = prev;
    }
  }
  return merged;
}

long feedback_overhead_bits(FeedbackMode mode, int wz_units, int bp_max) {
  if (mode != FeedbackMode::simple) return 0;
  int ids = bp_max + 1;
  int bits = 0;
  while ((1 << bits) < ids) bits++;
  return long(bits) * wz_units;
}

bool FeedbackState::push_clipping(ClippingMap map, int block) {
  buffer.push_back(std::move(map));
  if (int(buffer.size()) < window) return false;
  groups = assign_simple_groups(buffer, block);
  group_count = groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end());
  buffer.clear();
  updates++;
  return true;
}

void FeedbackState::ensure_counters(size_t blocks) {
  if (counters.size() < blocks) counters.resize(blocks, 0);
}

void FeedbackState::add_request(size_t block_index, long batches) {
  ensure_counters(block_index + 1);
  counters[block_index] += batches;
}

}  // namespace mvdvc
