#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvdvc/wz_decoder.hpp"

using namespace mvdvc;

namespace {

CodecConfig test_cfg() {
  CodecConfig cfg;
  cfg.max_turbo_iters = 18;
  cfg.ber_threshold = 1e-3;
  return cfg;
}

// pixels away from bin boundaries so even a noiseless hypothesis carries a
// margin on every plane
std::vector<uint8_t> random_pixels(size_t n, int levels, uint32_t seed) {
  std::mt19937 rng(seed);
  int step = 256 / levels;
  std::vector<uint8_t> px(n);
  for (auto& p : px) {
    int v;
    do {
      v = int(rng() % 256);
    } while (v % step < 2 || v % step > step - 3);
    p = uint8_t(v);
  }
  return px;
}

double laplace_noise(std::mt19937& rng, double sigma) {
  std::uniform_real_distribution<double> u(-0.499999, 0.499999);
  double x = u(rng);
  double b = sigma / std::sqrt(2.0);
  return -b * (x < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(x));
}

struct EncodedUnit {
  std::vector<int> symbols;
  std::vector<TurboCode> codes;
};

EncodedUnit encode_unit(const TurboCodec& codec, std::span<const uint8_t> px, int levels) {
  EncodedUnit e;
  e.symbols = pd_quantize_samples(px, levels);
  auto planes = extract_bitplanes(e.symbols, QuantSpec{QuantDomain::pixel, levels, 1}.bitplanes());
  for (auto& pl : planes) e.codes.push_back(codec.encode(pl));
  return e;
}

UnitSideInfo side_info(std::span<const uint8_t> px, int levels, double sigma, uint32_t seed) {
  UnitSideInfo usi;
  usi.bins = QuantSpec{QuantDomain::pixel, levels, 1}.pixel_bins();
  std::mt19937 rng(seed);
  std::vector<double> si(px.size()), alpha(px.size());
  for (size_t i = 0; i < px.size(); i++) {
    si[i] = double(px[i]) + (sigma > 0 ? laplace_noise(rng, sigma) : 0.0);
    alpha[i] = alpha_from_sigma(sigma);
  }
  usi.si = {std::move(si)};
  usi.alpha = {std::move(alpha)};
  return usi;
}

long bit_errors(const UnitDecode& d, const EncodedUnit& e, int bp) {
  long errs = 0;
  for (size_t i = 0; i < e.symbols.size(); i++) {
    uint32_t want = gray_encode(uint32_t(e.symbols[i]));
    uint32_t got = gray_encode(uint32_t(d.symbols[i]));
    for (int l = 0; l < bp; l++) errs += ((want ^ got) >> l) & 1;
  }
  return errs;
}

}  // namespace

TEST_CASE("noiseless side information decodes every plane on the first batch") {
  const size_t n = 792;
  const int levels = 4;
  TurboCodec codec(n, 1, 2, 32);
  auto px = random_pixels(n, levels, 5);
  EncodedUnit enc = encode_unit(codec, px, levels);
  UnitSideInfo usi = side_info(px, levels, 0.0, 0);

  UnitDecode d = decode_wz_unit(codec, enc.codes, usi, test_cfg());
  CHECK(d.symbols == enc.symbols);
  CHECK_FALSE(d.residual);
  for (const auto& pl : d.planes) {
    CHECK(pl.batches == 1);
    CHECK(pl.est_ber <= 1e-3);
    CHECK(pl.parity_bits == 8 + long(codec.batch(0).positions.size()));
  }
}

TEST_CASE("noisy side information decodes under budget with BER below threshold") {
  const size_t n = 1584;
  const int levels = 4;
  const int bp = 2;
  TurboCodec codec(n, 1, 2, 32);
  auto px = random_pixels(n, levels, 7);
  EncodedUnit enc = encode_unit(codec, px, levels);
  UnitSideInfo usi = side_info(px, levels, 4.0, 11);

  UnitDecode d = decode_wz_unit(codec, enc.codes, usi, test_cfg());
  long errs = bit_errors(d, enc, bp);
  CHECK(double(errs) / double(n * bp) < 1e-3);
  CHECK_FALSE(d.residual);
  long full_budget = long(bp) * (2 * long(n) + 8);
  CHECK(d.parity_bits < full_budget);

  // flat SI carries no information; spend heads toward the full budget
  UnitSideInfo flat;
  flat.bins = usi.bins;
  flat.si = {std::vector<double>(n, 128.0)};
  flat.alpha = {std::vector<double>(n, alpha_from_sigma(64.0))};
  UnitDecode df = decode_wz_unit(codec, enc.codes, flat, test_cfg());
  CHECK(df.parity_bits > d.parity_bits);
  CHECK(df.parity_bits > full_budget / 2);
}

TEST_CASE("replaying recorded grants reproduces the adaptive decode exactly") {
  const size_t n = 792;
  const int levels = 4;
  TurboCodec codec(n, 1, 2, 32);
  auto px = random_pixels(n, levels, 13);
  EncodedUnit enc = encode_unit(codec, px, levels);
  UnitSideInfo usi = side_info(px, levels, 6.0, 17);

  std::vector<ReplayParity> recorded;
  auto cfg = test_cfg();
  UnitDecode live = decode_wz_unit(codec, enc.codes, usi, cfg, [&](int plane, const PlaneDecode& pd) {
    ReplayParity rp;
    rp.tail_sys = enc.codes[plane - 1].tail_sys;
    rp.tail_par = enc.codes[plane - 1].tail_par;
    for (int k = 0; k < pd.batches; k++) {
      ParityBatch b = codec.batch(k);
      const auto& src = b.stream == 0 ? enc.codes[plane - 1].parity1 : enc.codes[plane - 1].parity2;
      std::vector<uint8_t> bits;
      for (int pos : b.positions) bits.push_back(src[pos]);
      rp.batch_bits.push_back(std::move(bits));
    }
    recorded.push_back(std::move(rp));
  });

  UnitDecode replay = decode_wz_unit_replay(codec, recorded, usi, cfg);
  CHECK(replay.symbols == live.symbols);
  CHECK(replay.parity_bits == live.parity_bits);
  CHECK(replay.batches == live.batches);
  REQUIRE(replay.planes.size() == live.planes.size());
  for (size_t l = 0; l < live.planes.size(); l++) {
    CHECK(replay.planes[l].bits == live.planes[l].bits);
    CHECK(replay.planes[l].est_ber == live.planes[l].est_ber);
    CHECK(replay.planes[l].iterations == live.planes[l].iterations);
  }
}

TEST_CASE("independent units decode identically in any order") {
  const size_t n = 256;
  const int levels = 2;
  TurboCodec codec(n, 1, 2, 32);
  auto pa = random_pixels(n, levels, 19);
  auto pb = random_pixels(n, levels, 23);
  EncodedUnit ea = encode_unit(codec, pa, levels);
  EncodedUnit eb = encode_unit(codec, pb, levels);
  UnitSideInfo ua = side_info(pa, levels, 8.0, 29);
  UnitSideInfo ub = side_info(pb, levels, 8.0, 31);
  auto cfg = test_cfg();

  UnitDecode a1 = decode_wz_unit(codec, ea.codes, ua, cfg);
  UnitDecode b1 = decode_wz_unit(codec, eb.codes, ub, cfg);
  UnitDecode b2 = decode_wz_unit(codec, eb.codes, ub, cfg);
  UnitDecode a2 = decode_wz_unit(codec, ea.codes, ua, cfg);
  CHECK(a1.symbols == a2.symbols);
  CHECK(b1.symbols == b2.symbols);
  CHECK(a1.parity_bits == a2.parity_bits);
  CHECK(b1.parity_bits == b2.parity_bits);
}

TEST_CASE("fixed parity budget: decoded errors fall as side information improves") {
  const size_t n = 792;
  const int levels = 2;
  TurboCodec codec(n, 1, 2, 32);
  auto cfg = test_cfg();
  long errs_bad = 0, errs_good = 0;
  for (uint32_t seed = 1; seed <= 3; seed++) {
    auto px = random_pixels(n, levels, 100 + seed);
    EncodedUnit enc = encode_unit(codec, px, levels);
    for (double sigma : {32.0, 4.0}) {
      UnitSideInfo usi = side_info(px, levels, sigma, 200 + seed);
      auto llr = plane_llrs(usi, std::vector<uint32_t>(n, 0), 1);
      PlaneDecode pd = decode_plane(codec, enc.codes[0], llr, cfg, 6, 6);
      long errs = 0;
      for (size_t i = 0; i < n; i++) errs += pd.bits[i] != uint8_t(gray_encode(uint32_t(enc.symbols[i])));
      (sigma > 10 ? errs_bad : errs_good) += errs;
    }
  }
  CHECK(errs_good <= errs_bad);
  CHECK(errs_bad > 0);
}

TEST_CASE("reconstruction follows the published rule, with a nearest-edge variant") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();  // step 64
  std::vector<double> si1 = {135.0};
  CHECK(reconstruct_sample(2, si1, bins, ReconstructionMode::paper) == 135.0);
  CHECK(reconstruct_sample(2, si1, bins, ReconstructionMode::nearest) == 135.0);

  std::vector<double> below = {60.0};
  CHECK(reconstruct_sample(2, below, bins, ReconstructionMode::paper) == 192.0);
  CHECK(reconstruct_sample(2, below, bins, ReconstructionMode::nearest) == 128.0);

  std::vector<double> above = {220.0};
  CHECK(reconstruct_sample(2, above, bins, ReconstructionMode::paper) == 128.0);
  CHECK(reconstruct_sample(2, above, bins, ReconstructionMode::nearest) == 192.0);
}

TEST_CASE("reconstruction falls through ranked hypotheses sequentially") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  // first hypothesis clipped, second lands in the bin
  std::vector<double> two = {60.0, 140.0};
  CHECK(reconstruct_sample(2, two, bins, ReconstructionMode::paper) == 140.0);
  CHECK(reconstruct_sample(2, two, bins, ReconstructionMode::nearest) == 140.0);

  // in-bin first hypothesis wins even when later ones also agree
  std::vector<double> both = {135.0, 140.0};
  CHECK(reconstruct_sample(2, both, bins, ReconstructionMode::paper) == 135.0);

  // chain: clipped, clipped, in-bin
  std::vector<double> three = {60.0, 70.0, 130.0};
  CHECK(reconstruct_sample(2, three, bins, ReconstructionMode::paper) == 130.0);

  // second hypothesis in-bin only counts when the previous one was clipped
  std::vector<double> again = {135.0, 60.0, 140.0};
  CHECK(reconstruct_sample(2, again, bins, ReconstructionMode::paper) == 140.0);
}

TEST_CASE("reconstruction stays inside the decoded bin in both modes") {
  std::mt19937 rng(37);
  for (int levels : {2, 4, 8, 16}) {
    BinModel bins = QuantSpec{QuantDomain::pixel, levels, 1}.pixel_bins();
    for (int t = 0; t < 200; t++) {
      int q = int(rng() % uint32_t(levels));
      size_t hyps = 1 + rng() % 3;
      std::vector<double> si(hyps);
      for (auto& s : si) s = double(rng() % 2560) / 10.0;
      for (auto mode : {ReconstructionMode::paper, ReconstructionMode::nearest}) {
        double y = reconstruct_sample(q, si, bins, mode);
        CHECK(y >= bins.lo + bins.step * q);
        CHECK(y <= bins.lo + bins.step * (q + 1));
      }
    }
  }
}

TEST_CASE("clipping maps flag Gray prefix disagreements per plane") {
  BinModel bins = QuantSpec{QuantDomain::pixel, 4, 1}.pixel_bins();
  // samples: agree, MSB-only Gray difference, LSB-only Gray difference
  // Gray codes: 0->00, 1->01, 2->11, 3->10
  std::vector<int> symbols = {1, 3, 1};
  std::vector<double> si1 = {70.0, 10.0, 10.0};  // bins 1, 0, 0
  auto maps = build_clipping_maps(symbols, si1, bins);
  REQUIRE(maps.size() == 2);
  CHECK(maps[0][0] == 0);
  CHECK(maps[1][0] == 0);
  CHECK(maps[0][1] == 1);  // 00 vs 10: differs from plane 1 on
  CHECK(maps[1][1] == 1);
  CHECK(maps[0][2] == 0);  // 00 vs 01: prefix agrees at plane 1
  CHECK(maps[1][2] == 1);
}
