#pragma once

#include <functional>
#include <span>

#include "mvdvc/config.hpp"
#include "mvdvc/noise_model.hpp"
#include "mvdvc/turbo.hpp"

namespace mvdvc {

// parity and tail bits arrive error-free; their channel LLR magnitude
inline constexpr double kParityLlr = 18.0;

// Side information for one turbo-coded unit: the same n samples seen
// through up to N hypotheses.
struct UnitSideInfo {
  BinModel bins;
  std::vector<std::vector<double>> si;     // [hypothesis][sample]
  std::vector<std::vector<double>> alpha;  // [hypothesis][sample]

  size_t samples() const { return si.empty() ? 0 : si[0].size(); }
};

struct PlaneDecode {
  std::vector<uint8_t> bits;
  int batches = 0;
  long parity_bits = 0;  // tail bits plus granted batch bits
  double est_ber = 0.0;
  bool residual = false;  // parity exhausted with BER still above threshold
  int iterations = 0;
};

struct UnitDecode {
  std::vector<int> symbols;
  std::vector<PlaneDecode> planes;
  long parity_bits = 0;
  int batches = 0;
  bool residual = false;
};

// parity values of one plane as recorded in a bitstream (file decode path)
struct ReplayParity {
  std::array<uint8_t, 4> tail_sys{}, tail_par{};
  std::vector<std::vector<uint8_t>> batch_bits;  // values in grant order
};

// soft input from SI systematic LLRs plus the first `batches` grants
SoftInput build_soft_input(const TurboCodec& codec, const TurboCode& code,
                           std::span<const double> llr, int batches);

// grant batches one by one until the estimated BER drops to the threshold
// or the schedule is exhausted; at least min_batches are always granted
PlaneDecode decode_plane(const TurboCodec& codec, const TurboCode& code,
                         std::span<const double> llr, const CodecConfig& cfg, int min_batches = 1,
                         int max_batches = -1);

// single decode with a fixed set of recorded grants; bit-identical to the
// final adaptive decode that produced the recording
PlaneDecode decode_plane_fixed(const TurboCodec& codec, const ReplayParity& parity,
                               std::span<const double> llr, const CodecConfig& cfg);

// Per-plane LLRs conditioned on the already decoded planes of each sample.
std::vector<double> plane_llrs(const UnitSideInfo& usi, std::span<const uint32_t> prefix,
                               int plane);

// Full unit decode, planes in MSB-first order with sequential conditioning.
// `on_plane` (optional) observes each finished plane, e.g. to record grants.
UnitDecode decode_wz_unit(const TurboCodec& codec, const std::vector<TurboCode>& plane_codes,
                          const UnitSideInfo& usi, const CodecConfig& cfg,
                          const std::function<void(int, const PlaneDecode&)>& on_plane = {});
UnitDecode decode_wz_unit_replay(const TurboCodec& codec, const std::vector<ReplayParity>& parity,
                                 const UnitSideInfo& usi, const CodecConfig& cfg);

// Reconstruction of one sample from its decoded bin and the ranked SI
// values. The default mode keeps the as-published asymmetric boundary rule
// (SI below the bin snaps to the upper edge); `nearest` clamps into the bin.
double reconstruct_sample(int q, std::span<const double> si, const BinModel& bins,
                          ReconstructionMode mode);

// flags[l-1][i] = 1 iff the Gray code of sample i's first SI quantizer bin
// disagrees with the decoded Gray code somewhere in planes 1..l
std::vector<std::vector<uint8_t>> build_clipping_maps(std::span<const int> symbols,
                                                      std::span<const double> si1,
                                                      const BinModel& bins);

}  // namespace mvdvc
