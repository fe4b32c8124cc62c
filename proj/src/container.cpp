#include "mvdvc/container.hpp"

#include <cstdio>
#include <memory>

#include "mvdvc/bitio.hpp"

namespace mvdvc {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'D', 'C'};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; i++) out.push_back(uint8_t(v >> (8 * i)));
}

struct Cursor {
  std::span<const uint8_t> b;
  size_t pos = 0;

  void need(size_t n, const char* what) const {
    if (pos + n > b.size()) throw DecodeError(std::string("container truncated in ") + what, pos);
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return b[pos++];
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = uint16_t(b[pos]) | uint16_t(b[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= uint32_t(b[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
};

}  // namespace

std::vector<uint8_t> serialize_container(const BitstreamContainer& c) {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  put_u16(out, c.version);
  put_u32(out, uint32_t(c.config_text.size()));
  out.insert(out.end(), c.config_text.begin(), c.config_text.end());
  for (const auto& r : c.records) {
    out.push_back(r.type);
    put_u32(out, uint32_t(r.payload.size()));
    out.insert(out.end(), r.payload.begin(), r.payload.end());
  }
  return out;
}

BitstreamContainer parse_container(std::span<const uint8_t> bytes) {
  Cursor cur{bytes};
  cur.need(4, "magic");
  for (int i = 0; i < 4; i++)
    if (bytes[i] != uint8_t(kMagic[i])) throw DecodeError("bad container magic", 0);
  cur.pos = 4;

  BitstreamContainer c;
  c.version = cur.u16("version");
  uint32_t clen = cur.u32("config length");
  cur.need(clen, "config text");
  c.config_text.assign(bytes.begin() + long(cur.pos), bytes.begin() + long(cur.pos + clen));
  cur.pos += clen;

  while (cur.pos < bytes.size()) {
    Record r;
    r.type = cur.u8("record type");
    uint32_t len = cur.u32("record length");
    cur.need(len, "record payload");
    r.payload.assign(bytes.begin() + long(cur.pos), bytes.begin() + long(cur.pos + len));
    cur.pos += len;
    c.records.push_back(std::move(r));
  }
  return c;
}

void write_container_file(const std::string& path, const BitstreamContainer& c) {
  auto bytes = serialize_container(c);
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
    throw std::runtime_error("short write: " + path);
}

BitstreamContainer read_container_file(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::fseek(f.get(), 0, SEEK_END);
  long size = std::ftell(f.get());
  std::fseek(f.get(), 0, SEEK_SET);
  std::vector<uint8_t> bytes(static_cast<size_t>(size), 0);
  if (std::fread(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
    throw std::runtime_error("short read: " + path);
  return parse_container(bytes);
}

void PayloadWriter::packed(std::span<const uint8_t> values, int width) {
  BitWriter bw;
  for (uint8_t v : values) bw.put_bits(v, width);
  auto b = bw.finish();
  bytes(b);
}

uint8_t PayloadReader::u8() {
  if (pos_ + 1 > bytes_.size()) throw DecodeError("record payload truncated", pos_);
  return bytes_[pos_++];
}

uint16_t PayloadReader::u16() {
  if (pos_ + 2 > bytes_.size()) throw DecodeError("record payload truncated", pos_);
  uint16_t v = uint16_t(bytes_[pos_]) | uint16_t(bytes_[pos_ + 1]) << 8;
  pos_ += 2;
  return v;
}

uint32_t PayloadReader::u32() {
  if (pos_ + 4 > bytes_.size()) throw DecodeError("record payload truncated", pos_);
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v |= uint32_t(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::vector<uint8_t> PayloadReader::bytes(size_t n) {
  if (pos_ + n > bytes_.size()) throw DecodeError("record payload truncated", pos_);
  std::vector<uint8_t> out(bytes_.begin() + long(pos_), bytes_.begin() + long(pos_ + n));
  pos_ += n;
  return out;
}

std::vector<uint8_t> PayloadReader::packed(size_t n, int width) {
  size_t nbytes = (n * size_t(width) + 7) / 8;
  if (pos_ + nbytes > bytes_.size()) throw DecodeError("record payload truncated", pos_);
  std::vector<uint8_t> chunk(bytes_.begin() + long(pos_), bytes_.begin() + long(pos_ + nbytes));
  pos_ += nbytes;
  BitReader br(chunk);
  std::vector<uint8_t> out(n);
  for (size_t i = 0; i < n; i++) out[i] = uint8_t(br.get_bits(width));
  return out;
}

}  // namespace mvdvc
