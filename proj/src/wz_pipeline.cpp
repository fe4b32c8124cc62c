#include "mvdvc/wz_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvdvc/transform.hpp"

namespace mvdvc {

int BinModel::quantize(double v) const {
  int q = int(std::floor((v - lo) / step));
  return std::clamp(q, 0, levels - 1);
}

int BinModel::bitplanes() const {
  int bp = 0;
  while ((1 << bp) < levels) bp++;
  return bp;
}

int QuantSpec::bitplanes() const { return pixel_bins().bitplanes(); }

void QuantSpec::validate() const {
  if (domain == QuantDomain::pixel) {
    if (levels != 2 && levels != 4 && levels != 8 && levels != 16)
      throw std::invalid_argument("pixel-domain levels must be 2, 4, 8 or 16");
  } else {
    if (table < 1 || table > 4) throw std::invalid_argument("band table index must be 1..4");
  }
}

// Built-in band tables, DC quantized finest, high bands dropped first.
// Entries are level counts per raster band (i*4+j); 0 means the band is not
// coded and the decoder keeps its side-information value.
static const std::array<std::array<int, 16>, 4> kBandTables = {{
    {16, 4, 0, 0, /**/ 4, 0, 0, 0, /**/ 0, 0, 0, 0, /**/ 0, 0, 0, 0},
    {16, 8, 0, 0, /**/ 8, 4, 0, 0, /**/ 0, 0, 0, 0, /**/ 0, 0, 0, 0},
    {32, 8, 4, 0, /**/ 8, 4, 0, 0, /**/ 4, 0, 0, 0, /**/ 0, 0, 0, 0},
    {32, 16, 8, 4, /**/ 16, 8, 4, 0, /**/ 8, 4, 0, 0, /**/ 4, 0, 0, 0},
}};

const std::array<int, 16>& QuantSpec::band_levels() const {
  if (domain != QuantDomain::transform)
    throw std::logic_error("band_levels: pixel-domain spec has no band table");
  return kBandTables[size_t(table - 1)];
}

BinModel QuantSpec::band_bins(int band, int levels) {
  // DC of an 8-bit block lies in [0, 1020]; AC magnitudes stay under 512
  // with the orthonormal kernel. Fixed ranges keep both sides in sync
  // without signalling.
  if (band == 0) return BinModel{0.0, 1024.0 / levels, levels};
  return BinModel{-512.0, 1024.0 / levels, levels};
}

uint32_t gray_encode(uint32_t v) { return v ^ (v >> 1); }

uint32_t gray_decode(uint32_t g) {
  uint32_t v = 0;
  for (; g; g >>= 1) v ^= g;
  return v;
}

int pd_quantize(uint8_t pixel, int levels) { return pixel / (256 / levels); }

std::vector<int> pd_quantize_samples(std::span<const uint8_t> pixels, int levels) {
  std::vector<int> q(pixels.size());
  for (size_t i = 0; i < pixels.size(); i++) q[i] = pd_quantize(pixels[i], levels);
  return q;
}

std::vector<std::vector<uint8_t>> extract_bitplanes(std::span<const int> symbols, int bp) {
  std::vector<std::vector<uint8_t>> planes(bp, std::vector<uint8_t>(symbols.size()));
  for (size_t i = 0; i < symbols.size(); i++) {
    uint32_t g = gray_encode(uint32_t(symbols[i]));
    for (int l = 1; l <= bp; l++) planes[l - 1][i] = uint8_t((g >> (bp - l)) & 1);
  }
  return planes;
}

std::vector<int> assemble_bitplanes(const std::vector<std::vector<uint8_t>>& planes) {
  if (planes.empty()) return {};
  const int bp = int(planes.size());
  std::vector<int> symbols(planes[0].size());
  for (size_t i = 0; i < symbols.size(); i++) {
    uint32_t g = 0;
    for (int l = 1; l <= bp; l++) g |= uint32_t(planes[l - 1][i]) << (bp - l);
    symbols[i] = int(gray_decode(g));
  }
  return symbols;
}

BandView td_forward(const BlockGroup& g) {
  const int b = g.pattern.block_size;
  if (b % 4) throw std::invalid_argument("td_forward: block size must be a multiple of 4");
  BandView v;
  v.blocks = g.block_count();
  v.sub_per_block = (b / 4) * (b / 4);
  size_t n = size_t(v.blocks) * v.sub_per_block;
  for (auto& band : v.bands) band.resize(n);

  double px[16], cf[16];
  size_t idx = 0;
  for (int k = 0; k < v.blocks; k++) {
    const uint8_t* blk = g.block(k);
    for (int sy = 0; sy < b; sy += 4)
      for (int sx = 0; sx < b; sx += 4) {
        for (int y = 0; y < 4; y++)
          for (int x = 0; x < 4; x++) px[y * 4 + x] = blk[(sy + y) * b + sx + x];
        Transform4x4::forward(px, cf);
        for (int band = 0; band < 16; band++) v.bands[band][idx] = cf[band];
        idx++;
      }
  }
  return v;
}

void td_inverse(const BandView& v, BlockGroup& g) {
  const int b = g.pattern.block_size;
  double cf[16], px[16];
  size_t idx = 0;
  for (int k = 0; k < v.blocks; k++) {
    uint8_t* blk = g.block(k);
    for (int sy = 0; sy < b; sy += 4)
      for (int sx = 0; sx < b; sx += 4) {
        for (int band = 0; band < 16; band++) cf[band] = v.bands[band][idx];
        Transform4x4::inverse(cf, px);
        for (int y = 0; y < 4; y++)
          for (int x = 0; x < 4; x++)
            blk[(sy + y) * b + sx + x] = uint8_t(std::clamp(int(std::lround(px[y * 4 + x])), 0, 255));
        idx++;
      }
  }
}

}  // namespace mvdvc
