#include "mvdvc/noise_model.hpp"

#include <algorithm>
#include <cmath>

namespace mvdvc {

namespace {
constexpr double kSigmaFloor = 0.5;
constexpr double kSqrt2 = 1.4142135623730951;
}  // namespace

double alpha_from_sigma(double sigma) { return kSqrt2 / std::max(sigma, kSigmaFloor); }

double alpha_sec(double sigma) { return std::min(alpha_from_sigma(sigma), 0.5); }

NoiseField estimate_noise_field(const ConcealContext& ctx, const CandidateSI& cand) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  const Frame& cur = *ctx.current;

  NoiseField nf;
  nf.grid_w = pat.grid_w;
  nf.grid_h = pat.grid_h;
  nf.alpha.assign(size_t(pat.grid_w) * pat.grid_h, 0.0);

  const int di[4] = {-1, 0, 0, 1};
  const int dj[4] = {0, -1, 1, 0};
  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (pat.is_key(bi, bj)) continue;
      bool spatial = cand.block_src[size_t(bi) * pat.grid_w + bj] == 2;
      double sum = 0.0, sum2 = 0.0;
      long n = 0;
      for (int k = 0; k < 4; k++) {
        int ni = bi + di[k], nj = bj + dj[k];
        if (ni < 0 || ni >= pat.grid_h || nj < 0 || nj >= pat.grid_w) continue;
        for (int y = ni * b; y < (ni + 1) * b; y++)
          for (int x = nj * b; x < (nj + 1) * b; x++) {
            double v = spatial ? double(cur.at(x, y))
                               : double(cur.at(x, y)) - double(cand.key_prediction.at(x, y));
            sum += v;
            sum2 += v * v;
            n++;
          }
      }
      double var = 0.0;
      if (n) {
        double mean = sum / double(n);
        var = std::max(0.0, sum2 / double(n) - mean * mean);
      }
      double sigma = std::sqrt(var);
      nf.alpha[nf.idx(bi, bj)] = spatial ? alpha_sec(sigma) : alpha_from_sigma(sigma);
    }
  return nf;
}

double laplace_mass(double mu, double alpha, double a, double b) {
  if (b <= a) return 0.0;
  // phrased as differences of exponentials of the same sign so that far
  // tail masses keep their relative accuracy instead of cancelling to zero
  if (a >= mu) return 0.5 * (std::exp(-alpha * (a - mu)) - std::exp(-alpha * (b - mu)));
  if (b <= mu) return 0.5 * (std::exp(alpha * (b - mu)) - std::exp(alpha * (a - mu)));
  return 1.0 - 0.5 * std::exp(-alpha * (b - mu)) - 0.5 * std::exp(alpha * (a - mu));
}

double hypothesis_llr(double si, double alpha, const BinModel& bins, uint32_t prefix, int plane) {
  const int bp = bins.bitplanes();
  double m0 = 0.0, m1 = 0.0;
  for (int v = 0; v < bins.levels; v++) {
    uint32_t g = gray_encode(uint32_t(v));
    if ((g >> (bp - plane + 1)) != prefix) continue;
    double m = laplace_mass(si, alpha, bins.lo + v * bins.step, bins.lo + (v + 1) * bins.step);
    if ((g >> (bp - plane)) & 1)
      m1 += m;
    else
      m0 += m;
  }
  if (m0 <= 0.0 && m1 <= 0.0) return 0.0;
  if (m1 <= 0.0) return kLlrClamp;
  if (m0 <= 0.0) return -kLlrClamp;
  return std::log(m0 / m1);
}

double bit_llr(const std::vector<double>& si, const std::vector<double>& alpha,
               const BinModel& bins, uint32_t prefix, int plane, double clamp) {
  double acc = 0.0;
  for (size_t i = 0; i < si.size(); i++) acc += hypothesis_llr(si[i], alpha[i], bins, prefix, plane);
  double mean = acc / double(si.size());
  return std::clamp(mean, -clamp, clamp);
}

}  // namespace mvdvc
