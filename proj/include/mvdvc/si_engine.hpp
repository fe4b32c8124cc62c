#pragma once

#include <optional>
#include <vector>

#include "mvdvc/config.hpp"
#include "mvdvc/frame.hpp"
#include "mvdvc/interleave.hpp"

namespace mvdvc {

// motion / disparity vector in quarter-pel units
struct BlockVec {
  int x = 0;
  int y = 0;
  bool operator==(const BlockVec&) const = default;
};

struct SiRef {
  const Frame* img = nullptr;
  int distance = 1;  // temporal distance, scales the search window
};

// Per-cell vectors over the block grid. KEY cells hold estimation results,
// WZ cells hold concealment winners; `err` is whole-block SAD for KEY cells
// and external-boundary SAD for WZ cells.
struct MotionField {
  int grid_w = 0, grid_h = 0;
  std::vector<BlockVec> vec;
  std::vector<int8_t> ref;
  std::vector<double> err;
  std::vector<uint8_t> valid;

  void init(int gw, int gh) {
    grid_w = gw;
    grid_h = gh;
    size_t n = size_t(gw) * gh;
    vec.assign(n, {});
    ref.assign(n, -1);
    err.assign(n, 0.0);
    valid.assign(n, 0);
  }
  int idx(int bi, int bj) const { return bi * grid_w + bj; }
};

enum class SiMethod : uint8_t { tec, vec, sec, fused };

struct CandidateSI {
  SiMethod method = SiMethod::tec;
  Frame prediction;       // KEY cells carry the decoded data, WZ cells the estimate
  MotionField key_field;  // best match per KEY block, feeds the noise model
  MotionField wz_field;   // winner per WZ block
  Frame key_prediction;   // KEY cells motion-compensated from the references
  double key_mse = 0.0;   // prediction error over KEY pixels, ranking criterion
  std::vector<SiRef> refs;
  std::vector<uint8_t> block_src;  // per cell: 0 from TEC, 1 from VEC, 2 from SEC
};

// Everything concealment may look at: the current frame with its KEY cells
// decoded, and previously decoded reference frames. WZ cells of `current`
// are never read.
struct ConcealContext {
  const Frame* current = nullptr;
  InterleavePattern pattern;
  std::vector<SiRef> temporal_refs;  // past/future, up to 2
  std::vector<SiRef> view_refs;      // co-located adjacent views, up to 2
  SiConfig cfg;
};

// whole-block SAD between a decoded KEY block and a quarter-pel reference position
long block_sad(const Frame& cur, int x0, int y0, int b, const Frame& ref, int rx4, int ry4);

// external-boundary matching error of a WZ block against ref displaced by v;
// count receives the number of boundary pixels compared
double ebme(const ConcealContext& ctx, int bi, int bj, const Frame& ref, BlockVec v, int* count = nullptr);

// full search + quarter-pel refinement for every KEY block
MotionField estimate_key_field(const ConcealContext& ctx, const std::vector<SiRef>& refs,
                               bool disparity_window);

CandidateSI conceal_temporal(const ConcealContext& ctx);
CandidateSI conceal_view(const ConcealContext& ctx);  // needs at least one view ref

CandidateSI fuse_sad(const ConcealContext& ctx, const CandidateSI& tec, const CandidateSI& vec);
CandidateSI fuse_vector_median(const ConcealContext& ctx, const CandidateSI& tec,
                               const CandidateSI& vec);

// weight of the side-information term in the refinement score
double ebmc_weight(double err, int boundary_count, double th);
// re-runs temporal concealment with the refinement score seeded by an
// initial (view-predicted) estimate
CandidateSI refine_ebmc(const ConcealContext& ctx, const CandidateSI& initial);

// spatial concealment of one WZ block (boundary interpolation; directional
// when the neighbourhood has one dominant edge direction)
void sec_conceal_block(const ConcealContext& ctx, int bi, int bj, Frame& out);
double directional_entropy(const ConcealContext& ctx, int bi, int bj, int* dominant_bin);

struct ModeStats {
  double sa = 0.0;   // spatial activity of the surrounding KEY blocks
  double mda = 0.0;  // motion-compensated distortion of the same blocks
};
ModeStats mode_stats(const ConcealContext& ctx, const CandidateSI& cand, int bi, int bj);
inline bool select_sec(double sa, double mda, double mda_threshold) {
  return sa < mda && mda > mda_threshold;
}
// replaces WZ blocks by spatial concealment where the mode decision asks for it
CandidateSI apply_mode_selection(const ConcealContext& ctx, CandidateSI fused);

struct SiBundle {
  CandidateSI fused;
  CandidateSI tec;
  std::optional<CandidateSI> vec;
  // hypothesis order for the decoder: fused first, then TEC/VEC by KEY
  // prediction MSE (ties prefer TEC)
  std::vector<const CandidateSI*> ranked;

  // ranked points at our own members, so copies and moves must re-target it
  SiBundle() = default;
  SiBundle(const SiBundle& o) : fused(o.fused), tec(o.tec), vec(o.vec) { retarget(o); }
  SiBundle(SiBundle&& o) noexcept
      : fused(std::move(o.fused)), tec(std::move(o.tec)), vec(std::move(o.vec)) {
    retarget(o);
  }
  SiBundle& operator=(const SiBundle& o) {
    if (this != &o) {
      fused = o.fused;
      tec = o.tec;
      vec = o.vec;
      retarget(o);
    }
    return *this;
  }
  SiBundle& operator=(SiBundle&& o) noexcept {
    if (this != &o) {
      fused = std::move(o.fused);
      tec = std::move(o.tec);
      vec = std::move(o.vec);
      retarget(o);
    }
    return *this;
  }

 private:
  void retarget(const SiBundle& o) {
    ranked.clear();
    for (const CandidateSI* p : o.ranked)
      ranked.push_back(p == &o.fused ? &fused : p == &o.tec ? &tec : &*vec);
  }
};

std::vector<const CandidateSI*> rank_si(const CandidateSI& fused, const CandidateSI& tec,
                                        const CandidateSI* vec);
SiBundle generate_si(const ConcealContext& ctx);

}  // namespace mvdvc
