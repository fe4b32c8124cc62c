#include "mvdvc/intra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvdvc/bitio.hpp"
#include "mvdvc/transform.hpp"

namespace mvdvc {

namespace {

constexpr double kDc128 = 4.0 * 128.0;  // DC of a flat mid-grey block

// Coefficient step. Dividing by the synthesis gain keeps the worst-case
// pixel error at qstep/2 no matter how the per-coefficient errors line up.
double coeff_step(int qp) { return intra_qstep(qp) / Transform4x4::synthesis_gain(); }

struct BlockCodec {
  int bw, bh;                // block grid
  std::vector<double> dc;    // reconstructed DC per block, for prediction
  double dc_pred(int bi, int bj) const {
    bool l = bj > 0, t = bi > 0;
    if (l && t) return 0.5 * (dc[bi * bw + bj - 1] + dc[(bi - 1) * bw + bj]);
    if (l) return dc[bi * bw + bj - 1];
    if (t) return dc[(bi - 1) * bw + bj];
    return kDc128;
  }
};

}  // namespace

double intra_qstep(int qp) { return std::pow(2.0, (qp - 4) / 6.0); }

IntraBitstream intra_encode(const Frame& f, int qp, Frame* recon_out) {
  if (f.width % 4 || f.height % 4 || f.width == 0 || f.height == 0)
    throw std::invalid_argument("intra_encode: dimensions must be positive multiples of 4");
  if (qp < 1 || qp > 51) throw std::invalid_argument("intra_encode: qp out of range");

  const double d = coeff_step(qp);
  BlockCodec ctx{f.width / 4, f.height / 4, {}};
  ctx.dc.assign(size_t(ctx.bw) * ctx.bh, 0.0);

  Frame recon(f.width, f.height);
  BitWriter bw;

  double px[16], cf[16], rec[16];
  for (int bi = 0; bi < ctx.bh; bi++)
    for (int bj = 0; bj < ctx.bw; bj++) {
      for (int y = 0; y < 4; y++)
        for (int x = 0; x < 4; x++) px[y * 4 + x] = f.at(bj * 4 + x, bi * 4 + y);
      Transform4x4::forward(px, cf);

      double pred = ctx.dc_pred(bi, bj);
      int sym[16];
      sym[0] = int(std::lround((cf[0] - pred) / d));
      for (int k = 1; k < 16; k++) sym[k] = int(std::lround(cf[k] / d));

      // run/level over the zigzag scan: nonzero count, then (run, level) pairs
      int scan[16], nz = 0;
      for (int k = 0; k < 16; k++) {
        scan[k] = sym[kZigzag4x4[k]];
        if (scan[k]) nz++;
      }
      bw.put_ue(uint32_t(nz));
      int run = 0;
      for (int k = 0; k < 16 && nz > 0; k++) {
        if (scan[k] == 0) {
          run++;
          continue;
        }
        bw.put_ue(uint32_t(run));
        bw.put_se(scan[k]);
        run = 0;
        nz--;
      }

      // track the reconstruction the decoder will see
      double dq[16];
      dq[0] = pred + sym[0] * d;
      for (int k = 1; k < 16; k++) dq[k] = sym[k] * d;
      ctx.dc[bi * ctx.bw + bj] = dq[0];
      Transform4x4::inverse(dq, rec);
      for (int y = 0; y < 4; y++)
        for (int x = 0; x < 4; x++)
          recon.at(bj * 4 + x, bi * 4 + y) =
              uint8_t(std::clamp(int(std::lround(rec[y * 4 + x])), 0, 255));
    }

  IntraBitstream bs;
  bs.qp = uint8_t(qp);
  bs.width = uint16_t(f.width);
  bs.height = uint16_t(f.height);
  bs.payload = bw.finish();
  if (recon_out) *recon_out = std::move(recon);
  return bs;
}

Frame intra_decode(const IntraBitstream& bs) {
  if (bs.width % 4 || bs.height % 4 || bs.width == 0 || bs.height == 0)
    throw DecodeError("intra header has invalid dimensions", 0);
  const double d = coeff_step(bs.qp);
  BlockCodec ctx{bs.width / 4, bs.height / 4, {}};
  ctx.dc.assign(size_t(ctx.bw) * ctx.bh, 0.0);

  Frame f(bs.width, bs.height);
  BitReader br(bs.payload);

  for (int bi = 0; bi < ctx.bh; bi++)
    for (int bj = 0; bj < ctx.bw; bj++) {
      int scan[16] = {0};
      uint32_t nz = br.get_ue();
      if (nz > 16) throw DecodeError("coefficient count out of range", br.bit_pos() >> 3);
      int pos = 0;
      for (uint32_t i = 0; i < nz; i++) {
        pos += int(br.get_ue());
        int32_t level = br.get_se();
        if (pos >= 16 || level == 0)
          throw DecodeError("invalid run/level pair", br.bit_pos() >> 3);
        scan[pos++] = level;
      }

      double dq[16];
      for (int k = 0; k < 16; k++) dq[kZigzag4x4[k]] = scan[k] * d;
      dq[0] += ctx.dc_pred(bi, bj);
      ctx.dc[bi * ctx.bw + bj] = dq[0];

      double rec[16];
      Transform4x4::inverse(dq, rec);
      for (int y = 0; y < 4; y++)
        for (int x = 0; x < 4; x++)
          f.at(bj * 4 + x, bi * 4 + y) =
              uint8_t(std::clamp(int(std::lround(rec[y * 4 + x])), 0, 255));
    }
  return f;
}

}  // namespace mvdvc
