#include "mvdvc/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace mvdvc {

double mse(const Frame& a, const Frame& b) {
  if (!a.same_size(b)) throw std::invalid_argument("mse: frame size mismatch");
  if (a.luma.empty()) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < a.luma.size(); i++) {
    double d = double(a.luma[i]) - double(b.luma[i]);
    acc += d * d;
  }
  return acc / double(a.luma.size());
}

double psnr_from_mse(double m) {
  if (m <= 0.0) return 99.99;
  double v = 10.0 * std::log10(255.0 * 255.0 / m);
  return v > 99.99 ? 99.99 : v;
}

double psnr(const Frame& a, const Frame& b) { return psnr_from_mse(mse(a, b)); }

uint8_t sample_qpel(const Frame& f, int x4, int y4) {
  int xi = x4 >> 2, yi = y4 >> 2;  // arithmetic shift, works for negatives
  int fx = x4 & 3, fy = y4 & 3;
  if (fx == 0 && fy == 0) return f.at_clamped(xi, yi);
  int p00 = f.at_clamped(xi, yi);
  int p10 = f.at_clamped(xi + 1, yi);
  int p01 = f.at_clamped(xi, yi + 1);
  int p11 = f.at_clamped(xi + 1, yi + 1);
  int top = p00 * (4 - fx) + p10 * fx;      // x16 scale
  int bot = p01 * (4 - fx) + p11 * fx;
  int v = top * (4 - fy) + bot * fy;        // x16 total
  return uint8_t((v + 8) >> 4);
}

uint64_t frame_hash(const Frame& f) {
  // FNV-1a over dims and pixels
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int v : {f.width, f.height})
    for (int s = 0; s < 4; s++) mix(uint8_t((unsigned(v) >> (8 * s)) & 0xff));
  for (uint8_t b : f.luma) mix(b);
  return h;
}

}  // namespace mvdvc
