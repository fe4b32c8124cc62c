#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mvdvc {

// Parallel turbo code built from two identical recursive systematic
// convolutional encoders, feedback 1+D^3+D^4, feedforward 1+D+D^3+D^4
// (16 states). Encoder 1 is driven back to the zero state with four tail
// bits which are transmitted uncompressed; encoder 2 is left open. Only
// parity is ever transmitted: the systematic track is replaced by the
// decoder's side information.
struct TurboCode {
  std::vector<uint8_t> parity1, parity2;  // one bit per info bit
  std::array<uint8_t, 4> tail_sys{};      // termination input bits of encoder 1
  std::array<uint8_t, 4> tail_par{};      // parity produced during termination
};

// Soft channel values, LLR convention log(P(bit=0)/P(bit=1)).
// Parity positions not yet revealed by the puncturer stay exactly 0.
struct SoftInput {
  std::vector<double> sys, parity1, parity2;
  std::array<double, 4> tail_sys{}, tail_par{};
};

struct TurboDecodeResult {
  std::vector<uint8_t> bits;
  std::vector<double> app;  // a-posteriori LLR per info bit
  int iterations = 0;
  double est_ber = 1.0;
};

// fraction of probably-wrong bits implied by the LLR magnitudes:
// mean of 1/(1+e^|L|)
double estimate_ber(std::span<const double> app);

struct ParityBatch {
  int stream = 0;  // 0 -> parity1, 1 -> parity2
  std::vector<int> positions;
};

class TurboCodec {
 public:
  TurboCodec(size_t n, uint64_t interleaver_seed, uint64_t puncture_seed, int period);

  TurboCode encode(std::span<const uint8_t> bits) const;
  TurboDecodeResult decode(const SoftInput& in, int max_iters, double early_exit_ber) const;

  size_t n() const { return n_; }
  int period() const { return period_; }
  // Batches alternate parity1/parity2, each revealing one randomly drawn
  // puncture-period column, so a grant is worth about n/period bits.
  int batch_count() const { return 2 * period_; }
  ParityBatch batch(int k) const;
  const std::vector<int>& interleaver() const { return perm_; }

 private:
  size_t n_;
  int period_;
  std::vector<int> perm_;
  std::array<std::vector<int>, 2> column_order_;
};

// deterministic seeded permutation of 0..n-1 (Fisher-Yates over splitmix64,
// so results do not depend on the standard library implementation)
std::vector<int> seeded_permutation(size_t n, uint64_t seed);

uint64_t splitmix64(uint64_t& state);

}  // namespace mvdvc
