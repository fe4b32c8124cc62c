#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mvdvc/gop.hpp"
#include "mvdvc/wz_pipeline.hpp"

namespace mvdvc {

enum class FeedbackMode : uint8_t { off, simple, smart };
enum class FusionMethod : uint8_t { sad, vector_median, refine_si, fusion_refine_si };

// Side-information reconstruction of a decoded bin: `paper` keeps the exact
// clamp-to-bin-edge arithmetic of Y = dq*(q+1) / si / dq*q, `nearest` clamps
// the side information into the closed bin interval.
enum class ReconstructionMode : uint8_t { paper, nearest };

struct SiConfig {
  int search_range = 16;        // temporal, +/- pixels per unit of frame distance
  int disparity_range_x = 32;   // view search, horizontal
  int disparity_range_y = 4;
  int boundary_width = 2;       // external boundary match thickness
  FusionMethod fusion = FusionMethod::sad;
  double median_threshold = 8.0;   // quarter-pel units, vector-median outlier trigger
  double refine_th = 5.0;          // per-pixel tolerance in the refinement weight
  double sec_entropy_threshold = 1.0;  // nats, below -> directional interpolation
  double mda_threshold = 3.0;          // SEC only when MDA exceeds this
};

struct CodecConfig {
  int width = 0;
  int height = 0;
  int num_views = 1;
  int num_frames = 0;
  double fps = 15.0;

  int block_size = 16;
  int gop_length = 2;
  OrderMode order_mode = OrderMode::min_distance;
  int qp = 32;
  QuantSpec quant;

  int puncture_period = 32;
  int max_turbo_iters = 18;
  double ber_threshold = 1e-3;
  uint64_t interleaver_seed = 1;
  uint64_t puncture_seed = 2;

  FeedbackMode feedback = FeedbackMode::off;
  int feedback_window = 12;       // frames per clipping-map window (simple mode)
  int simple_block = 16;          // group assignment granularity, pixels
  int smart_block = 32;           // request-counter granularity, pixels
  int min_turbo_block = 96;       // groups shorter than this merge with the next

  bool frame_subtraction = false;
  int subtraction_threshold = 512;  // macroblock SAD above this is dynamic
  int macroblock_size = 16;

  ReconstructionMode reconstruction = ReconstructionMode::paper;
  int si_hypotheses = 2;  // ranked SI candidates fed to the decoder
  SiConfig si;

  void validate() const;
};

// flat key=value config text, '#' comments; unknown keys rejected
CodecConfig parse_config(const std::string& text);
void apply_config_line(CodecConfig& cfg, const std::string& key, const std::string& value);
std::string serialize_config(const CodecConfig& cfg);

// the four standard rate points: qp paired with pixel-domain level count
struct RatePoint {
  int qp;
  int levels;
};
inline constexpr RatePoint kRatePoints[4] = {{40, 2}, {36, 4}, {32, 8}, {28, 16}};

}  // namespace mvdvc
