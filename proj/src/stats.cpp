#include "mvdvc/stats.hpp"

#include <cstdio>

namespace mvdvc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

long total_bits(const std::vector<StatsRow>& rows) {
  long sum = 0;
  for (const auto& r : rows) sum += r.bits_key + r.bits_parity + r.bits_maps + r.bits_feedback;
  return sum;
}

std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::string out =
      "view,frame,bits_key,bits_parity,bits_maps,bits_feedback,"
      "psnr_db,si_psnr_fused,si_psnr_tec,si_psnr_vec,parity_requests,residual_ber\n";
  for (const auto& r : rows) {
    out += std::to_string(r.view) + ',' + std::to_string(r.frame) + ',';
    out += std::to_string(r.bits_key) + ',' + std::to_string(r.bits_parity) + ',';
    out += std::to_string(r.bits_maps) + ',' + std::to_string(r.bits_feedback) + ',';
    out += fmt(r.psnr_db) + ',' + fmt(r.si_psnr_fused) + ',';
    out += fmt(r.si_psnr_tec) + ',' + fmt(r.si_psnr_vec) + ',';
    out += std::to_string(r.parity_requests) + ',' + fmt(r.residual_ber) + '\n';
  }
  return out;
}

std::string rd_csv(const std::vector<RdPoint>& points) {
  std::string out = "qp,levels,kbps,mean_psnr_db\n";
  for (const auto& p : points) {
    out += std::to_string(p.qp) + ',' + std::to_string(p.levels) + ',';
    out += fmt(p.kbps) + ',' + fmt(p.mean_psnr_db) + '\n';
  }
  return out;
}

std::string rd_gnuplot(const std::string& csv_path, const std::string& out_png) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set terminal pngcairo size 800,600\n";
  s += "set output '" + out_png + "'\n";
  s += "set xlabel 'rate [kbit/s]'\n";
  s += "set ylabel 'PSNR [dB]'\n";
  s += "set grid\n";
  s += "set key bottom right\n";
  s += "plot '" + csv_path + "' using 3:4 skip 1 with linespoints title 'codec'\n";
  return s;
}

}  // namespace mvdvc
