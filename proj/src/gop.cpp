#include "mvdvc/gop.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace mvdvc {

int GopLayout::intra_distance(int view, int frame) const {
  int best = std::numeric_limits<int>::max();
  for (int t = 1; t <= num_frames; t++)
    if (is_intra(view, t)) best = std::min(best, std::abs(t - frame));
  return best;
}

int GopLayout::decode_rank(int view, int frame) const {
  const auto& order = decode_order[view - 1];
  for (int r = 0; r < int(order.size()); r++)
    if (order[r] == frame) return r;
  return -1;
}

bool GopLayout::decoded_before(FrameId a, FrameId b) const {
  bool ai = is_intra(a.view, a.frame), bi = is_intra(b.view, b.frame);
  if (ai != bi) return ai;  // intra frames precede everything else
  if (ai && bi) return a.frame != b.frame ? a.frame < b.frame : a.view < b.view;
  int ra = decode_rank(a.view, a.frame), rb = decode_rank(b.view, b.frame);
  if (ra != rb) return ra < rb;
  return a.view < b.view;
}

GopLayout build_gop_layout(int num_views, int num_frames, int gop_length, OrderMode mode) {
  if (num_views < 1 || num_frames < 1 || gop_length < 2)
    throw std::invalid_argument("build_gop_layout: need views >= 1, frames >= 1, gop >= 2");

  GopLayout lay;
  lay.num_views = num_views;
  lay.num_frames = num_frames;
  lay.gop_length = gop_length;
  lay.order_mode = mode;
  lay.kind.assign(num_views, std::vector<FrameKind>(num_frames, FrameKind::B));
  lay.decode_order.resize(num_views);

  // Odd views restart a GOP at n*L+1. Even views shift the restart point by
  // ceil((L+1)/2) so intra frames of neighbouring views interleave in time;
  // frame 1 is always intra so every view can start decoding.
  const int shift = (gop_length + 2) / 2;  // ceil((L+1)/2)
  for (int v = 1; v <= num_views; v++) {
    auto& kinds = lay.kind[v - 1];
    kinds[0] = FrameKind::I;
    for (int n = 0;; n++) {
      long t = (v % 2 == 1) ? long(n) * gop_length + 1 : long(n) * gop_length + shift;
      if (t > num_frames) break;
      kinds[t - 1] = FrameKind::I;
    }
  }

  for (int v = 1; v <= num_views; v++) {
    std::vector<int> bs;
    for (int t = 1; t <= num_frames; t++)
      if (!lay.is_intra(v, t)) bs.push_back(t);
    if (mode == OrderMode::min_distance) {
      std::stable_sort(bs.begin(), bs.end(), [&](int a, int b) {
        return lay.intra_distance(v, a) < lay.intra_distance(v, b);
      });
    }
    lay.decode_order[v - 1] = std::move(bs);
  }
  return lay;
}

ReferenceSet reference_frames(int view, int frame, const GopLayout& layout,
                              std::optional<int> max_rank) {
  if (layout.is_intra(view, frame))
    throw std::invalid_argument("reference_frames: intra frames take no references");

  int rank = max_rank ? *max_rank : layout.decode_rank(view, frame);
  auto available = [&](int v, int t) {
    if (layout.is_intra(v, t)) return true;
    int r = layout.decode_rank(v, t);
    return r != rank ? r < rank : v < view;  // global order is (rank, view)
  };

  ReferenceSet refs;
  for (int t = frame - 1; t >= 1; t--)
    if (available(view, t)) {
      refs.past = FrameId{view, t};
      break;
    }
  for (int t = frame + 1; t <= layout.num_frames; t++)
    if (available(view, t)) {
      refs.future = FrameId{view, t};
      break;
    }
  for (int dv : {-1, 1}) {
    int v = view + dv;
    if (v >= 1 && v <= layout.num_views && available(v, frame))
      refs.view_refs.push_back(FrameId{v, frame});
  }
  return refs;
}

}  // namespace mvdvc
