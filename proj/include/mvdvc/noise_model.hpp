#pragma once

#include <vector>

#include "mvdvc/si_engine.hpp"
#include "mvdvc/wz_pipeline.hpp"

namespace mvdvc {

inline constexpr double kLlrClamp = 25.0;

// Laplacian parameter per grid cell for one SI hypothesis; only WZ cells
// are filled
struct NoiseField {
  int grid_w = 0, grid_h = 0;
  std::vector<double> alpha;
  int idx(int bi, int bj) const { return bi * grid_w + bj; }
};

// motion/disparity residual path: alpha = sqrt(2)/sigma with sigma floored
// at half a grey level
double alpha_from_sigma(double sigma);
// spatial concealment path: additionally capped at 0.5
double alpha_sec(double sigma);

// Residual statistics between the 4-neighbouring KEY blocks and their
// compensated matches under the candidate's own field give sigma per WZ
// block. Blocks concealed spatially use the neighbourhood variance instead.
NoiseField estimate_noise_field(const ConcealContext& ctx, const CandidateSI& cand);

// Laplacian mass of [a, b) for centre mu and parameter alpha, closed form
double laplace_mass(double mu, double alpha, double a, double b);

// log(P0/P1) of bitplane `plane` for one sample under one hypothesis.
// `prefix` holds the already decoded Gray bits of planes 1..plane-1, MSB
// first; masses integrate only over bins compatible with it, normalized
// within that set. Both masses underflowing means the sample carries no
// information: 0.
double hypothesis_llr(double si, double alpha, const BinModel& bins, uint32_t prefix, int plane);

// mean over hypotheses, clamped to +-clamp
double bit_llr(const std::vector<double>& si, const std::vector<double>& alpha,
               const BinModel& bins, uint32_t prefix, int plane, double clamp = kLlrClamp);

}  // namespace mvdvc
