#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvdvc {

// On-disk bitstream layout: "MVDC" magic, u16 version, length-prefixed
// config text, then typed length-prefixed records. All integers are
// little-endian; unknown record types survive a round trip untouched so
// older decoders can skip them.
enum class RecordType : uint8_t {
  intra_payload = 1,
  wz_header = 2,
  parity_batch = 3,
  activity_map = 4,
  feedback_map = 5,
};

struct Record {
  uint8_t type = 0;
  std::vector<uint8_t> payload;
};

struct BitstreamContainer {
  uint16_t version = 1;
  std::string config_text;
  std::vector<Record> records;
};

std::vector<uint8_t> serialize_container(const BitstreamContainer& c);
BitstreamContainer parse_container(std::span<const uint8_t> bytes);

void write_container_file(const std::string& path, const BitstreamContainer& c);
BitstreamContainer read_container_file(const std::string& path);

// record payload builder/cursor, little-endian
class PayloadWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u16(uint16_t v) {
    bytes_.push_back(uint8_t(v));
    bytes_.push_back(uint8_t(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; i++) bytes_.push_back(uint8_t(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  // n values packed MSB-first at `width` bits each
  void packed(std::span<const uint8_t> values, int width);
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::span<const uint8_t> b) : bytes_(b) {}
  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  std::vector<uint8_t> bytes(size_t n);
  std::vector<uint8_t> packed(size_t n, int width);
  bool done() const { return pos_ == bytes_.size(); }
  size_t pos() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace mvdvc
