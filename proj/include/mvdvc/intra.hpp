#pragma once

#include <cstdint>
#include <vector>

#include "mvdvc/frame.hpp"

namespace mvdvc {

// Intra coding for KEY data: 4x4 transform, flat uniform quantization, DC
// prediction from the left/top reconstructed blocks, zigzag run/level coding
// with exp-Golomb codes. qp follows the usual step = 2^((qp-4)/6) law.
struct IntraBitstream {
  uint8_t qp = 32;
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<uint8_t> payload;

  size_t bit_count() const { return payload.size() * 8; }
};

double intra_qstep(int qp);

// encodes and also returns the reconstruction the decoder will produce
IntraBitstream intra_encode(const Frame& f, int qp, Frame* recon = nullptr);
Frame intra_decode(const IntraBitstream& bs);

}  // namespace mvdvc
