#include "vlc/clock.hpp"

#include <algorithm>
#include <stdexcept>

namespace vlc {

EntityId::EntityId(Bytes b) : bytes(std::move(b)) {
  if (bytes.empty() || bytes.size() > 64)
    throw std::invalid_argument("entity id must be 1..64 bytes");
}

std::string EntityId::printable() const {
  bool ascii = std::all_of(bytes.begin(), bytes.end(),
                           [](uint8_t c) { return c >= 0x20 && c < 0x7f; });
  if (ascii) return std::string(bytes.begin(), bytes.end());
  return "0x" + to_hex(bytes);
}

const char* to_string(Ordering4 o) {
  switch (o) {
    case Ordering4::BF: return "BF";
    case Ordering4::EQ: return "EQ";
    case Ordering4::AF: return "AF";
    case Ordering4::CC: return "CC";
  }
  return "?";
}

ClockValue::ClockValue(std::initializer_list<std::pair<EntityId, uint64_t>> entries) {
  for (const auto& [id, n] : entries) {
    if (n == 0) throw std::invalid_argument("zero counter in clock literal");
    entries_[id] = n;
  }
}

uint64_t ClockValue::get(const EntityId& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second;
}

void ClockValue::merge_max(const ClockValue& other) {
  for (const auto& [id, n] : other.entries_) {
    auto& slot = entries_[id];
    slot = std::max(slot, n);
  }
}

void ClockValue::set(const EntityId& id, uint64_t counter) {
  if (counter == 0)
    entries_.erase(id);
  else
    entries_[id] = counter;
}

ClockValue init() { return ClockValue{}; }

ClockValue update_value(const EntityId& id, const ClockValue& base,
                        std::span<const ClockValue> others) {
  ClockValue out = base;
  for (const ClockValue& c : others) out.merge_max(c);
  uint64_t cur = out.get(id);
  if (cur == UINT64_MAX) throw std::overflow_error("clock counter overflow");
  out.set(id, cur + 1);
  return out;
}

Ordering4 compare(const ClockValue& a, const ClockValue& b) {
  // Walk both sorted maps in lockstep; missing keys read as zero.
  bool a_less = false;  // some coordinate where a < b
  bool b_less = false;
  auto ia = a.entries().begin(), ea = a.entries().end();
  auto ib = b.entries().begin(), eb = b.entries().end();
  while (ia != ea || ib != eb) {
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      b_less = true;  // a has a key b lacks
      ++ia;
    } else if (ia == ea || ib->first < ia->first) {
      a_less = true;
      ++ib;
    } else {
      if (ia->second < ib->second) a_less = true;
      if (ib->second < ia->second) b_less = true;
      ++ia;
      ++ib;
    }
    if (a_less && b_less) return Ordering4::CC;
  }
  if (a_less) return Ordering4::BF;
  if (b_less) return Ordering4::AF;
  return Ordering4::EQ;
}

uint64_t sum(const ClockValue& c) {
  uint64_t total = 0;
  for (const auto& [id, n] : c.entries()) {
    if (__builtin_add_overflow(total, n, &total))
      throw std::overflow_error("clock sum overflow");
  }
  return total;
}

bool total_less(const ClockValue& a, const ClockValue& b) {
  uint64_t sa = sum(a), sb = sum(b);
  if (sa != sb) return sa < sb;
  return serialize(a) < serialize(b);
}

Bytes serialize(const ClockValue& c) {
  ByteWriter w;
  if (c.size() > 0xffffffffull) throw std::length_error("clock too large");
  w.u32(static_cast<uint32_t>(c.size()));
  for (const auto& [id, n] : c.entries()) {
    w.var8(std::span<const uint8_t>(id.bytes));
    w.u64(n);
  }
  return w.take();
}

ClockValue read_clock(ByteReader& r) {
  uint32_t count = r.u32();
  ClockValue out;
  const EntityId* prev = nullptr;
  for (uint32_t i = 0; i < count; ++i) {
    Bytes idb = r.var8();
    if (idb.empty() || idb.size() > 64) throw WireError("bad id length");
    EntityId id(std::move(idb));
    uint64_t n = r.u64();
    if (n == 0) throw WireError("zero counter");
    if (prev != nullptr && !(*prev < id))
      throw WireError("ids unsorted or duplicated");
    out.set(id, n);
    prev = &out.entries().find(id)->first;
  }
  return out;
}

ClockValue deserialize_clock(std::span<const uint8_t> data) {
  ByteReader r(data);
  ClockValue out = read_clock(r);
  r.expect_done();
  return out;
}

ClockValue deserialize_clock(const Bytes& data) {
  return deserialize_clock(std::span<const uint8_t>(data));
}

}  // namespace vlc
