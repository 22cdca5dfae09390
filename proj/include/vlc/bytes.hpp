#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vlc {

using Bytes = std::vector<uint8_t>;

/// Thrown by decoders on malformed input (truncation, bad framing,
/// non-canonical encodings).
class WireError : public std::runtime_error {
 public:
  explicit WireError(const std::string& what) : std::runtime_error(what) {}
};

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(std::span<const uint8_t> b) {
  return std::string(b.begin(), b.end());
}

std::string to_hex(std::span<const uint8_t> b);
Bytes from_hex(std::string_view hex);

/// Append-only big-endian byte encoder used by every wire format.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void raw(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void raw(const Bytes& b) { raw(std::span<const uint8_t>(b)); }
  void tag(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  /// u8 length prefix; rejects blobs over 255 bytes.
  void var8(std::span<const uint8_t> b);
  /// u32 length prefix.
  void var32(std::span<const uint8_t> b);

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Matching big-endian decoder; throws WireError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> b) : data_(b) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  std::span<const uint8_t> raw(size_t n);
  Bytes var8();
  Bytes var32();

  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }
  /// Decoders call this last so trailing garbage is rejected.
  void expect_done() const {
    if (!done()) throw WireError("trailing bytes after message");
  }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace vlc
