#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "vlc/bytes.hpp"

namespace vlc {

/// Opaque entity identifier: a process public id, a store key, any name
/// a clock counts updates for. Ordered lexicographically on bytes.
struct EntityId {
  Bytes bytes;

  EntityId() = default;
  explicit EntityId(Bytes b);
  explicit EntityId(std::string_view s) : EntityId(to_bytes(s)) {}

  auto operator<=>(const EntityId&) const = default;

  std::string printable() const;
};

/// Four-way outcome of a clock comparison.
enum class Ordering4 : uint8_t { BF, EQ, AF, CC };

const char* to_string(Ordering4 o);

/// A logical clock value: finite map id -> update count. Ids not present
/// are implicitly at zero; the canonical form never stores a zero entry,
/// so map equality is semantic equality.
class ClockValue {
 public:
  ClockValue() = default;
  /// Builds from explicit entries; rejects zero counters.
  ClockValue(std::initializer_list<std::pair<EntityId, uint64_t>> entries);

  uint64_t get(const EntityId& id) const;
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  const std::map<EntityId, uint64_t>& entries() const { return entries_; }

  /// Coordinate-wise max merge (no increment). Used by sessions that
  /// accumulate dependencies; not a clock *update*.
  void merge_max(const ClockValue& other);
  /// Sets one coordinate; counter 0 erases (keeps canonical form).
  void set(const EntityId& id, uint64_t counter);

  bool operator==(const ClockValue&) const = default;

 private:
  std::map<EntityId, uint64_t> entries_;
};

/// Genesis clock: the empty map.
ClockValue init();

/// Coordinate-wise max of base and all of `others`, then +1 on `id`.
/// Inputs are untouched. Counter overflow is a hard fault.
ClockValue update_value(const EntityId& id, const ClockValue& base,
                        std::span<const ClockValue> others);

/// BF iff a precedes b, AF iff b precedes a, EQ iff equal, else CC.
Ordering4 compare(const ClockValue& a, const ClockValue& b);

/// Sum of all counters. Strictly increases across any update. Overflow
/// is a hard fault.
uint64_t sum(const ClockValue& c);

/// Strict total order extending the happened-before partial order:
/// compares (sum, canonical bytes).
bool total_less(const ClockValue& a, const ClockValue& b);

/// Canonical encoding: u32 entry count, then per entry u8 id length,
/// id bytes, u64 counter, entries ascending by id bytes. All big-endian.
/// This byte string doubles as the signing payload everywhere.
Bytes serialize(const ClockValue& c);

/// Rejects duplicate ids, unsorted ids, zero counters and truncation.
ClockValue deserialize_clock(std::span<const uint8_t> data);
ClockValue deserialize_clock(const Bytes& data);

/// Reads one embedded canonical clock from a larger message.
ClockValue read_clock(ByteReader& r);

}  // namespace vlc
