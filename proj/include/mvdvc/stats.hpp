#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvdvc {

// One row per coded frame. Bit counts split a frame's payload into rate
// categories; total_bits sums them all.
struct StatsRow {
  int view = 0;
  int frame = 0;  // 1-based
  long bits_key = 0;
  long bits_parity = 0;
  long bits_maps = 0;
  long bits_feedback = 0;
  double psnr_db = 0.0;
  double si_psnr_fused = 0.0;  // 0 when the frame has no WZ data
  double si_psnr_tec = 0.0;
  double si_psnr_vec = 0.0;
  long parity_requests = 0;
  double residual_ber = 0.0;
};

long total_bits(const std::vector<StatsRow>& rows);

std::string stats_csv(const std::vector<StatsRow>& rows);

// aggregate row of an RD sweep point
struct RdPoint {
  int qp = 0;
  int levels = 0;
  double kbps = 0.0;
  double mean_psnr_db = 0.0;
};

std::string rd_csv(const std::vector<RdPoint>& points);
std::string rd_gnuplot(const std::string& csv_path, const std::string& out_png);

}  // namespace mvdvc
