#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "mvdvc/transform.hpp"
#include "mvdvc/wz_pipeline.hpp"

using namespace mvdvc;

namespace {

// direct matrix-multiply oracle for the 4x4 transform
struct Kernel {
  double k[4][4];
  Kernel() {
    const double rows[4][4] = {
        {1, 1, 1, 1}, {2, 1, -1, -2}, {1, -1, -1, 1}, {1, -2, 2, -1}};
    for (int i = 0; i < 4; i++) {
      double norm = 0;
      for (int j = 0; j < 4; j++) norm += rows[i][j] * rows[i][j];
      norm = std::sqrt(norm);
      for (int j = 0; j < 4; j++) k[i][j] = rows[i][j] / norm;
    }
  }
  // K * X * K^T
  void forward(const double in[16], double out[16]) const {
    double t[16];
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++) {
        double s = 0;
        for (int m = 0; m < 4; m++) s += k[i][m] * in[m * 4 + j];
        t[i * 4 + j] = s;
      }
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++) {
        double s = 0;
        for (int m = 0; m < 4; m++) s += t[i * 4 + m] * k[j][m];
        out[i * 4 + j] = s;
      }
  }
};

BlockGroup noise_group(int w, int h, int b, Parity parity, bool key_side, uint32_t seed) {
  Frame f(w, h);
  std::mt19937 rng(seed);
  for (auto& p : f.luma) p = uint8_t(rng() % 256);
  auto p = InterleavePattern::for_frame(w, h, b, parity);
  auto [key, wz] = split_checkerboard(f, p);
  return key_side ? key : wz;
}

}  // namespace

TEST_CASE("pixel quantization is plain bin division") {
  CHECK(pd_quantize(0, 4) == 0);
  CHECK(pd_quantize(255, 4) == 3);
  CHECK(pd_quantize(128, 16) == 8);
  CHECK(pd_quantize(63, 4) == 0);
  CHECK(pd_quantize(64, 4) == 1);
}

TEST_CASE("every pixel lands inside its bin") {
  std::mt19937 rng(1);
  for (int levels : {2, 4, 8, 16}) {
    int dq = 256 / levels;
    for (int t = 0; t < 200; t++) {
      uint8_t p = uint8_t(rng() % 256);
      int s = pd_quantize(p, levels);
      CHECK(p >= s * dq);
      CHECK(p < (s + 1) * dq);
    }
  }
}

TEST_CASE("gray mapping is the shift-xor rule and inverts exactly") {
  CHECK(gray_encode(0) == 0);
  CHECK(gray_encode(5) == 7);
  for (uint32_t v = 0; v < 64; v++) CHECK(gray_decode(gray_encode(v)) == v);
}

TEST_CASE("adjacent symbols differ in exactly one gray bit") {
  for (int levels : {2, 4, 8, 16})
    for (int v = 0; v + 1 < levels; v++) {
      uint32_t diff = gray_encode(uint32_t(v)) ^ gray_encode(uint32_t(v + 1));
      CHECK(std::popcount(diff) == 1);
    }
}

TEST_CASE("bitplane extraction is MSB first over gray codes") {
  std::vector<int> symbols{0, 1, 2, 3};
  auto planes = extract_bitplanes(symbols, 2);
  REQUIRE(planes.size() == 2);
  CHECK(planes[0] == std::vector<uint8_t>{0, 0, 1, 1});
  CHECK(planes[1] == std::vector<uint8_t>{0, 1, 1, 0});
}

TEST_CASE("a binary quantizer has one plane equal to its symbols") {
  std::vector<int> symbols{1, 0, 0, 1, 1, 0};
  auto planes = extract_bitplanes(symbols, 1);
  REQUIRE(planes.size() == 1);
  for (size_t i = 0; i < symbols.size(); i++) CHECK(planes[0][i] == symbols[i]);
}

TEST_CASE("planes reassemble to the original symbols") {
  std::mt19937 rng(2);
  for (int levels : {2, 4, 8, 16}) {
    std::vector<int> symbols(100);
    for (auto& s : symbols) s = int(rng() % uint32_t(levels));
    auto planes = extract_bitplanes(symbols, BinModel{0, 256.0 / levels, levels}.bitplanes());
    CHECK(assemble_bitplanes(planes) == symbols);
  }
}

TEST_CASE("bin model quantizes edges and clamps outliers") {
  BinModel b{0.0, 64.0, 4};
  CHECK(b.hi() == 256.0);
  CHECK(b.quantize(0.0) == 0);
  CHECK(b.quantize(63.999) == 0);
  CHECK(b.quantize(64.0) == 1);
  CHECK(b.quantize(255.9) == 3);
  CHECK(b.quantize(-5.0) == 0);
  CHECK(b.quantize(400.0) == 3);
  CHECK(b.bitplanes() == 2);

  BinModel ac{-512.0, 128.0, 8};
  CHECK(ac.quantize(-512.0) == 0);
  CHECK(ac.quantize(0.0) == 4);
  CHECK(ac.quantize(511.9) == 7);
}

TEST_CASE("band bins cover the fixed coefficient ranges") {
  BinModel dc = QuantSpec::band_bins(0, 16);
  CHECK(dc.lo == 0.0);
  CHECK(dc.hi() == 1024.0);
  BinModel ac = QuantSpec::band_bins(5, 8);
  CHECK(ac.lo == -512.0);
  CHECK(ac.hi() == 512.0);
}

TEST_CASE("band tables quantize DC finest and drop high bands first") {
  QuantSpec q{QuantDomain::transform, 4, 1};
  for (int t = 1; t <= 4; t++) {
    q.table = t;
    const auto& tab = q.band_levels();
    CHECK(tab[0] >= 16);
    for (int band = 1; band < 16; band++) {
      CHECK(tab[band] <= tab[0]);
      if (tab[band]) CHECK(std::popcount(unsigned(tab[band])) == 1);
    }
    CHECK(tab[15] == 0);
  }
  // richer tables never code fewer bands
  QuantSpec q1{QuantDomain::transform, 4, 1}, q4{QuantDomain::transform, 4, 4};
  for (int band = 0; band < 16; band++)
    CHECK(q1.band_levels()[band] <= q4.band_levels()[band]);
}

TEST_CASE("quant spec validation rejects bad setups") {
  CHECK_THROWS(QuantSpec{QuantDomain::pixel, 3, 1}.validate());
  CHECK_THROWS(QuantSpec{QuantDomain::transform, 4, 0}.validate());
  CHECK_THROWS(QuantSpec{QuantDomain::transform, 4, 5}.validate());
  QuantSpec ok{QuantDomain::pixel, 8, 1};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.delta_q() == 32);
}

TEST_CASE("forward transform matches the matrix oracle") {
  Kernel oracle;
  std::mt19937 rng(3);
  for (int t = 0; t < 50; t++) {
    double in[16], got[16], want[16];
    for (double& v : in) v = double(rng() % 256);
    Transform4x4::forward(in, got);
    oracle.forward(in, want);
    for (int k = 0; k < 16; k++) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
  }
}

TEST_CASE("an impulse transforms to the outer product of first columns") {
  Kernel oracle;
  double in[16] = {1.0};
  double got[16];
  Transform4x4::forward(in, got);
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++)
      CHECK(got[i * 4 + j] == doctest::Approx(oracle.k[i][0] * oracle.k[j][0]).epsilon(1e-12));
}

TEST_CASE("inverse undoes forward to floating point precision") {
  std::mt19937 rng(4);
  for (int t = 0; t < 50; t++) {
    double in[16], cf[16], back[16];
    for (double& v : in) v = double(rng() % 256);
    Transform4x4::forward(in, cf);
    Transform4x4::inverse(cf, back);
    for (int k = 0; k < 16; k++) CHECK(back[k] == doctest::Approx(in[k]).epsilon(1e-9));
  }
}

TEST_CASE("a constant block carries only DC") {
  double in[16], cf[16];
  for (double& v : in) v = 77.0;
  Transform4x4::forward(in, cf);
  CHECK(cf[0] == doctest::Approx(4 * 77.0));
  for (int k = 1; k < 16; k++) CHECK(cf[k] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("band view groups coefficients and inverts within rounding") {
  for (int b : {8, 16}) {
    BlockGroup g = noise_group(64, 64, b, Parity::even, false, uint32_t(b));
    BandView v = td_forward(g);
    CHECK(v.blocks == g.block_count());
    CHECK(v.sub_per_block == (b / 4) * (b / 4));
    CHECK(v.band_length() == size_t(v.blocks) * v.sub_per_block);

    BlockGroup back = g;
    for (auto& px : back.pixels) px = 0;
    td_inverse(v, back);
    for (size_t i = 0; i < g.pixels.size(); i++)
      CHECK(std::abs(int(back.pixels[i]) - int(g.pixels[i])) <= 1);
  }
}

TEST_CASE("a flat group concentrates every band but DC at zero") {
  BlockGroup g = noise_group(32, 32, 16, Parity::even, true, 9);
  for (auto& px : g.pixels) px = 100;
  BandView v = td_forward(g);
  for (double c : v.bands[0]) CHECK(c == doctest::Approx(400.0));
  for (int band = 1; band < 16; band++)
    for (double c : v.bands[band]) CHECK(c == doctest::Approx(0.0).epsilon(1e-12));
}
