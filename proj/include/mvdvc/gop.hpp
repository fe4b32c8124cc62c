#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace mvdvc {

enum class FrameKind : uint8_t { I, B };

// Order in which B frames are scheduled for decoding within a view.
// min_distance ranks them by distance to the nearest intra frame in the same
// view (closest first), min_delay keeps plain temporal order.
enum class OrderMode : uint8_t { min_distance, min_delay };

struct FrameId {
  int view = 0;   // 1-based
  int frame = 0;  // 1-based
  bool operator==(const FrameId&) const = default;
};

struct GopLayout {
  int num_views = 0;
  int num_frames = 0;
  int gop_length = 2;
  OrderMode order_mode = OrderMode::min_distance;
  std::vector<std::vector<FrameKind>> kind;    // [view-1][frame-1]
  std::vector<std::vector<int>> decode_order;  // [view-1] -> B-frame indices in decode sequence

  bool is_intra(int view, int frame) const { return kind[view - 1][frame - 1] == FrameKind::I; }
  // distance to the nearest intra frame in the same view
  int intra_distance(int view, int frame) const;
  // rank of a B frame within its view's decode order, -1 for intra frames
  int decode_rank(int view, int frame) const;
  // true when a is decoded before b under the global schedule
  // (intra frames first, then B frames by (rank, view))
  bool decoded_before(FrameId a, FrameId b) const;
};

GopLayout build_gop_layout(int num_views, int num_frames, int gop_length, OrderMode mode);

struct ReferenceSet {
  std::optional<FrameId> past;       // nearest previously-decoded earlier frame, same view
  std::optional<FrameId> future;     // nearest previously-decoded later frame, same view
  std::vector<FrameId> view_refs;    // co-located frames in adjacent views, already decoded
};

// References available when the given B frame is decoded at its scheduled
// position. max_rank, when set, restricts same-view B references to frames
// with decode rank strictly below it (used when two frames share a coding
// unit and must not reference each other).
ReferenceSet reference_frames(int view, int frame, const GopLayout& layout,
                              std::optional<int> max_rank = std::nullopt);

}  // namespace mvdvc
