#pragma once

#include <string>
#include <vector>

#include "mvdvc/config.hpp"
#include "mvdvc/container.hpp"
#include "mvdvc/frame.hpp"
#include "mvdvc/stats.hpp"

namespace mvdvc {

struct SimResult {
  BitstreamContainer container;
  MultiViewSequence decoded;
  std::vector<StatsRow> stats;
};

// Runs the per-view encoders, the feedback channel and the central decoder
// in one process. Deterministic for fixed seeds; the returned container
// replays through decode_container to the same frames.
SimResult simulate(const CodecConfig& cfg, const MultiViewSequence& input);

MultiViewSequence decode_container(const BitstreamContainer& c);

// Side-information quality probe: KEY cells are intra coded and decoded, WZ
// cells are assumed recovered exactly, and each concealment method's error
// over the WZ pixels is reported per frame. No turbo coding involved.
struct SiReport {
  int view = 0;
  int frame = 0;
  double mse_fused = 0.0;
  double mse_tec = 0.0;
  double mse_vec = -1.0;  // negative when the view has no neighbours
};

std::vector<SiReport> analyze_si(const CodecConfig& cfg, const MultiViewSequence& input);
std::string si_csv(const std::vector<SiReport>& rows);

// one simulate run per rate point, aggregated
std::vector<RdPoint> rd_sweep(const CodecConfig& base, const MultiViewSequence& input);

}  // namespace mvdvc
