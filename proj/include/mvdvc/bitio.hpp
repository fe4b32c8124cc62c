#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvdvc {

struct DecodeError : std::runtime_error {
  size_t byte_offset;
  DecodeError(const std::string& what, size_t off)
      : std::runtime_error(what + " at byte " + std::to_string(off)), byte_offset(off) {}
};

class BitWriter {
 public:
  void put_bit(int b) {
    acc_ = (acc_ << 1) | (b & 1);
    if (++fill_ == 8) {
      bytes_.push_back(acc_);
      acc_ = 0;
      fill_ = 0;
    }
  }
  void put_bits(uint32_t v, int n) {
    for (int i = n - 1; i >= 0; i--) put_bit(int(v >> i) & 1);
  }
  // Exp-Golomb, unsigned then signed mapping (0,1,-1,2,-2,...)
  void put_ue(uint32_t v) {
    uint64_t x = uint64_t(v) + 1;
    int len = 0;
    for (uint64_t t = x; t > 1; t >>= 1) len++;
    for (int i = 0; i < len; i++) put_bit(0);
    for (int i = len; i >= 0; i--) put_bit(int(x >> i) & 1);
  }
  void put_se(int32_t v) { put_ue(v > 0 ? uint32_t(2 * v - 1) : uint32_t(-2 * v)); }

  size_t bit_count() const { return bytes_.size() * 8 + fill_; }
  std::vector<uint8_t> finish() {
    std::vector<uint8_t> out = bytes_;
    if (fill_ > 0) out.push_back(uint8_t(acc_ << (8 - fill_)));
    return out;
  }

 private:
  std::vector<uint8_t> bytes_;
  uint8_t acc_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  int get_bit() {
    size_t byte = pos_ >> 3;
    if (byte >= bytes_.size()) throw DecodeError("bitstream truncated", byte);
    int b = (bytes_[byte] >> (7 - (pos_ & 7))) & 1;
    pos_++;
    return b;
  }
  uint32_t get_bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; i++) v = (v << 1) | uint32_t(get_bit());
    return v;
  }
  uint32_t get_ue() {
    int len = 0;
    while (get_bit() == 0)
      if (++len > 32) throw DecodeError("malformed exp-golomb code", pos_ >> 3);
    uint64_t x = 1;
    for (int i = 0; i < len; i++) x = (x << 1) | uint64_t(get_bit());
    return uint32_t(x - 1);
  }
  int32_t get_se() {
    uint32_t v = get_ue();
    return (v & 1) ? int32_t((v + 1) / 2) : -int32_t(v / 2);
  }
  size_t bit_pos() const { return pos_; }

 private:
  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

}  // namespace mvdvc
