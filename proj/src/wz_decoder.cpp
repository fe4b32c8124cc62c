#include "mvdvc/wz_decoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace mvdvc {

namespace {

double bit_to_llr(uint8_t bit) { return bit ? -kParityLlr : kParityLlr; }

void reveal_batch(SoftInput& in, const ParityBatch& batch, std::span<const uint8_t> values) {
  auto& track = batch.stream == 0 ? in.parity1 : in.parity2;
  for (size_t i = 0; i < batch.positions.size(); i++)
    track[batch.positions[i]] = bit_to_llr(values[i]);
}

PlaneDecode finish(const TurboDecodeResult& r, int batches, long parity_bits, double threshold) {
  PlaneDecode pd;
  pd.bits = r.bits;
  pd.batches = batches;
  pd.parity_bits = parity_bits;
  pd.est_ber = r.est_ber;
  pd.iterations = r.iterations;
  pd.residual = r.est_ber > threshold;
  return pd;
}

}  // namespace

SoftInput build_soft_input(const TurboCodec& codec, const TurboCode& code,
                           std::span<const double> llr, int batches) {
  SoftInput in;
  in.sys.assign(llr.begin(), llr.end());
  in.parity1.assign(codec.n(), 0.0);
  in.parity2.assign(codec.n(), 0.0);
  for (int i = 0; i < 4; i++) {
    in.tail_sys[i] = bit_to_llr(code.tail_sys[i]);
    in.tail_par[i] = bit_to_llr(code.tail_par[i]);
  }
  for (int k = 0; k < batches; k++) {
    ParityBatch b = codec.batch(k);
    auto& src = b.stream == 0 ? code.parity1 : code.parity2;
    auto& dst = b.stream == 0 ? in.parity1 : in.parity2;
    for (int pos : b.positions) dst[pos] = bit_to_llr(src[pos]);
  }
  return in;
}

PlaneDecode decode_plane(const TurboCodec& codec, const TurboCode& code,
                         std::span<const double> llr, const CodecConfig& cfg, int min_batches,
                         int max_batches) {
  if (llr.size() != codec.n()) throw std::invalid_argument("decode_plane: LLR length mismatch");
  int limit = max_batches < 0 ? codec.batch_count() : std::min(max_batches, codec.batch_count());
  int k = std::max(1, std::min(min_batches, limit));

  SoftInput in = build_soft_input(codec, code, llr, k);
  long parity_bits = 8;  // two tail tracks, four bits each
  for (int g = 0; g < k; g++) parity_bits += long(codec.batch(g).positions.size());

  TurboDecodeResult r = codec.decode(in, cfg.max_turbo_iters, cfg.ber_threshold);
  while (r.est_ber > cfg.ber_threshold && k < limit) {
    ParityBatch b = codec.batch(k);
    std::vector<uint8_t> values;
    values.reserve(b.positions.size());
    const auto& src = b.stream == 0 ? code.parity1 : code.parity2;
    for (int pos : b.positions) values.push_back(src[pos]);
    reveal_batch(in, b, values);
    parity_bits += long(b.positions.size());
    k++;
    r = codec.decode(in, cfg.max_turbo_iters, cfg.ber_threshold);
  }
  return finish(r, k, parity_bits, cfg.ber_threshold);
}

PlaneDecode decode_plane_fixed(const TurboCodec& codec, const ReplayParity& parity,
                               std::span<const double> llr, const CodecConfig& cfg) {
  if (llr.size() != codec.n())
    throw std::invalid_argument("decode_plane_fixed: LLR length mismatch");
  SoftInput in;
  in.sys.assign(llr.begin(), llr.end());
  in.parity1.assign(codec.n(), 0.0);
  in.parity2.assign(codec.n(), 0.0);
  long parity_bits = 8;
  for (int i = 0; i < 4; i++) {
    in.tail_sys[i] = bit_to_llr(parity.tail_sys[i]);
    in.tail_par[i] = bit_to_llr(parity.tail_par[i]);
  }
  for (size_t k = 0; k < parity.batch_bits.size(); k++) {
    ParityBatch b = codec.batch(int(k));
    if (parity.batch_bits[k].size() != b.positions.size())
      throw std::invalid_argument("decode_plane_fixed: batch size mismatch");
    reveal_batch(in, b, parity.batch_bits[k]);
    parity_bits += long(b.positions.size());
  }
  TurboDecodeResult r = codec.decode(in, cfg.max_turbo_iters, cfg.ber_threshold);
  return finish(r, int(parity.batch_bits.size()), parity_bits, cfg.ber_threshold);
}

std::vector<double> plane_llrs(const UnitSideInfo& usi, std::span<const uint32_t> prefix,
                               int plane) {
  size_t n = usi.samples();
  size_t hyps = usi.si.size();
  std::vector<double> llr(n);
  std::vector<double> s(hyps), a(hyps);
  for (size_t i = 0; i < n; i++) {
    for (size_t h = 0; h < hyps; h++) {
      s[h] = usi.si[h][i];
      a[h] = usi.alpha[h][i];
    }
    llr[i] = bit_llr(s, a, usi.bins, prefix[i], plane);
  }
  return llr;
}

namespace {

UnitDecode run_unit(const UnitSideInfo& usi,
                    const std::function<PlaneDecode(int, std::span<const double>)>& plane_fn,
                    const std::function<void(int, const PlaneDecode&)>& on_plane) {
  const int bp = usi.bins.bitplanes();
  const size_t n = usi.samples();
  UnitDecode out;
  std::vector<uint32_t> prefix(n, 0);

  for (int l = 1; l <= bp; l++) {
    std::vector<double> llr = plane_llrs(usi, prefix, l);
    PlaneDecode pd = plane_fn(l, llr);
    for (size_t i = 0; i < n; i++) prefix[i] = (prefix[i] << 1) | pd.bits[i];
    out.parity_bits += pd.parity_bits;
    out.batches += pd.batches;
    out.residual = out.residual || pd.residual;
    if (on_plane) on_plane(l, pd);
    out.planes.push_back(std::move(pd));
  }
  out.symbols.resize(n);
  for (size_t i = 0; i < n; i++) out.symbols[i] = int(gray_decode(prefix[i]));
  return out;
}

}  // namespace

UnitDecode decode_wz_unit(const TurboCodec& codec, const std::vector<TurboCode>& plane_codes,
                          const UnitSideInfo& usi, const CodecConfig& cfg,
                          const std::function<void(int, const PlaneDecode&)>& on_plane) {
  if (int(plane_codes.size()) != usi.bins.bitplanes())
    throw std::invalid_argument("decode_wz_unit: plane count mismatch");
  return run_unit(
      usi,
      [&](int l, std::span<const double> llr) {
        return decode_plane(codec, plane_codes[l - 1], llr, cfg);
      },
      on_plane);
}

UnitDecode decode_wz_unit_replay(const TurboCodec& codec, const std::vector<ReplayParity>& parity,
                                 const UnitSideInfo& usi, const CodecConfig& cfg) {
  if (int(parity.size()) != usi.bins.bitplanes())
    throw std::invalid_argument("decode_wz_unit_replay: plane count mismatch");
  return run_unit(
      usi,
      [&](int l, std::span<const double> llr) {
        return decode_plane_fixed(codec, parity[l - 1], llr, cfg);
      },
      {});
}

double reconstruct_sample(int q, std::span<const double> si, const BinModel& bins,
                          ReconstructionMode mode) {
  const double lower = bins.lo + bins.step * q;
  const double upper = bins.lo + bins.step * (q + 1);
  const int q1 = bins.quantize(si[0]);

  double y;
  if (q1 == q)
    y = si[0];
  else if (mode == ReconstructionMode::paper)
    y = q1 < q ? upper : lower;
  else
    y = std::clamp(si[0], lower, upper);

  for (size_t p = 1; p < si.size(); p++)
    if (bins.quantize(si[p]) == q && bins.quantize(si[p - 1]) != q) y = si[p];
  return y;
}

std::vector<std::vector<uint8_t>> build_clipping_maps(std::span<const int> symbols,
                                                      std::span<const double> si1,
                                                      const BinModel& bins) {
  const int bp = bins.bitplanes();
  std::vector<std::vector<uint8_t>> maps(bp, std::vector<uint8_t>(symbols.size(), 0));
  for (size_t i = 0; i < symbols.size(); i++) {
    uint32_t g_si = gray_encode(uint32_t(bins.quantize(si1[i])));
    uint32_t g_dec = gray_encode(uint32_t(symbols[i]));
    for (int l = 1; l <= bp; l++)
      maps[l - 1][i] = (g_si >> (bp - l)) != (g_dec >> (bp - l)) ? 1 : 0;
  }
  return maps;
}

}  // namespace mvdvc
