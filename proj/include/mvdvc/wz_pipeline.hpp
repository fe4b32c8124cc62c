#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mvdvc/interleave.hpp"

namespace mvdvc {

enum class QuantDomain : uint8_t { pixel, transform };

// Uniform bin layout for one coded sample class. Pixels use lo=0,
// step=256/levels; transform bands use fixed signed/unsigned ranges.
struct BinModel {
  double lo = 0.0;
  double step = 64.0;
  int levels = 4;

  double hi() const { return lo + step * levels; }
  int quantize(double v) const;
  int bitplanes() const;
};

struct QuantSpec {
  QuantDomain domain = QuantDomain::pixel;
  int levels = 4;  // pixel domain: 2,4,8,16
  int table = 1;   // transform domain: built-in band table 1..4

  int bitplanes() const;
  int delta_q() const { return 256 / levels; }
  BinModel pixel_bins() const { return BinModel{0.0, double(delta_q()), levels}; }

  // per-band level count, raster band index; 0 = band not coded
  const std::array<int, 16>& band_levels() const;
  static BinModel band_bins(int band, int levels);

  void validate() const;
};

// Gray mapping: adjacent symbols differ in exactly one bit
uint32_t gray_encode(uint32_t v);
uint32_t gray_decode(uint32_t g);

int pd_quantize(uint8_t pixel, int levels);
std::vector<int> pd_quantize_samples(std::span<const uint8_t> pixels, int levels);

// Bitplane l in [1, bp] holds bit (bp - l) of each Gray-coded symbol, so
// plane 1 is the most significant.
std::vector<std::vector<uint8_t>> extract_bitplanes(std::span<const int> symbols, int bp);
std::vector<int> assemble_bitplanes(const std::vector<std::vector<uint8_t>>& planes);

// Transform-domain view of a block group: every 4x4 sub-block transformed,
// coefficients regrouped into 16 band sequences (band = i*4+j, sub-blocks in
// scan order over group blocks, raster within a block).
struct BandView {
  int blocks = 0;      // number of group blocks
  int sub_per_block = 0;
  std::array<std::vector<double>, 16> bands;
  size_t band_length() const { return bands[0].size(); }
};

BandView td_forward(const BlockGroup& g);
// writes band coefficients back into pixel blocks (rounded, clamped)
void td_inverse(const BandView& v, BlockGroup& g);

}  // namespace mvdvc
