#include "vlc/bytes.hpp"

namespace vlc {

std::string to_hex(std::span<const uint8_t> b) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (uint8_t c : b) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

static int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw WireError("hex string with odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_nibble(hex[i]);
    int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw WireError("invalid hex digit");
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

void ByteWriter::u16(uint16_t v) {
  buf_.push_back(static_cast<uint8_t>(v >> 8));
  buf_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u32(uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    buf_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteWriter::u64(uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    buf_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteWriter::var8(std::span<const uint8_t> b) {
  if (b.size() > 255) throw WireError("var8 blob too long");
  u8(static_cast<uint8_t>(b.size()));
  raw(b);
}

void ByteWriter::var32(std::span<const uint8_t> b) {
  if (b.size() > 0xffffffffull) throw WireError("var32 blob too long");
  u32(static_cast<uint32_t>(b.size()));
  raw(b);
}

uint8_t ByteReader::u8() {
  if (remaining() < 1) throw WireError("truncated (u8)");
  return data_[pos_++];
}

uint16_t ByteReader::u16() {
  uint16_t v = 0;
  if (remaining() < 2) throw WireError("truncated (u16)");
  for (int i = 0; i < 2; ++i) v = static_cast<uint16_t>(v << 8 | data_[pos_++]);
  return v;
}

uint32_t ByteReader::u32() {
  uint32_t v = 0;
  if (remaining() < 4) throw WireError("truncated (u32)");
  for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
  return v;
}

uint64_t ByteReader::u64() {
  uint64_t v = 0;
  if (remaining() < 8) throw WireError("truncated (u64)");
  for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_++];
  return v;
}

std::span<const uint8_t> ByteReader::raw(size_t n) {
  if (remaining() < n) throw WireError("truncated (raw)");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes ByteReader::var8() {
  size_t n = u8();
  auto s = raw(n);
  return Bytes(s.begin(), s.end());
}

Bytes ByteReader::var32() {
  size_t n = u32();
  auto s = raw(n);
  return Bytes(s.begin(), s.end());
}

}  // namespace vlc
