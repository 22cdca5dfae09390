#include "vlc/proof.hpp"

namespace vlc {

const char* to_string(FrontendKind k) {
  switch (k) {
    case FrontendKind::Update: return "update";
    case FrontendKind::Mono: return "mono";
    case FrontendKind::App: return "app";
  }
  return "?";
}

FrontendKind proof_kind(const Proof& p) {
  return std::visit([](const auto& c) { return c.kind; }, p);
}

crypto::Digest qc_sign_payload(FrontendKind kind, const ClockValue& value) {
  ByteWriter w;
  w.tag("CHRONO/QC/v1");
  w.u8(static_cast<uint8_t>(kind));
  w.raw(serialize(value));
  return crypto::sha256(w.bytes());
}

crypto::Digest attest_sign_payload(FrontendKind kind, const crypto::Digest& measurement,
                                   const crypto::Digest& value_hash) {
  ByteWriter w;
  w.tag("CHRONO/ATTEST/v1");
  w.u8(static_cast<uint8_t>(kind));
  w.raw(std::span<const uint8_t>(measurement));
  w.raw(std::span<const uint8_t>(value_hash));
  return crypto::sha256(w.bytes());
}

static FrontendKind read_kind(ByteReader& r) {
  uint8_t k = r.u8();
  if (k > 2) throw WireError("bad frontend kind");
  return static_cast<FrontendKind>(k);
}

static void write_sigs(ByteWriter& w, const std::map<EntityId, crypto::Signature>& sigs) {
  if (sigs.size() > 0xffff) throw WireError("too many signatures");
  w.u16(static_cast<uint16_t>(sigs.size()));
  for (const auto& [id, sig] : sigs) {
    w.var8(std::span<const uint8_t>(id.bytes));
    w.raw(std::span<const uint8_t>(sig));
  }
}

static std::map<EntityId, crypto::Signature> read_sigs(ByteReader& r) {
  uint16_t n = r.u16();
  std::map<EntityId, crypto::Signature> sigs;
  for (uint16_t i = 0; i < n; ++i) {
    Bytes idb = r.var8();
    if (idb.empty()) throw WireError("empty signer id");
    crypto::Signature sig;
    auto raw = r.raw(sig.size());
    std::copy(raw.begin(), raw.end(), sig.begin());
    if (!sigs.emplace(EntityId(std::move(idb)), sig).second)
      throw WireError("duplicate signer id");
  }
  return sigs;
}

enum : uint8_t { kTagQuorum = 1, kTagAttested = 2 };

void write_proof(ByteWriter& w, const Proof& p) {
  if (const auto* qc = std::get_if<QuorumCert>(&p)) {
    w.u8(kTagQuorum);
    w.u8(static_cast<uint8_t>(qc->kind));
    w.raw(std::span<const uint8_t>(qc->value_hash));
    write_sigs(w, qc->sigs);
  } else {
    const auto& at = std::get<AttestedCert>(p);
    w.u8(kTagAttested);
    w.u8(static_cast<uint8_t>(at.kind));
    w.raw(std::span<const uint8_t>(at.measurement));
    w.raw(std::span<const uint8_t>(at.user_data));
    write_sigs(w, at.sigs);
  }
}

Proof read_proof(ByteReader& r) {
  uint8_t tag = r.u8();
  if (tag == kTagQuorum) {
    QuorumCert qc;
    qc.kind = read_kind(r);
    auto h = r.raw(qc.value_hash.size());
    std::copy(h.begin(), h.end(), qc.value_hash.begin());
    qc.sigs = read_sigs(r);
    return qc;
  }
  if (tag == kTagAttested) {
    AttestedCert at;
    at.kind = read_kind(r);
    auto m = r.raw(at.measurement.size());
    std::copy(m.begin(), m.end(), at.measurement.begin());
    auto u = r.raw(at.user_data.size());
    std::copy(u.begin(), u.end(), at.user_data.begin());
    at.sigs = read_sigs(r);
    return at;
  }
  throw WireError("unknown proof tag");
}

void write_vlc(ByteWriter& w, const Vlc& c) {
  w.raw(serialize(c.value));
  if (c.proofs.size() > 255) throw WireError("too many proofs");
  w.u8(static_cast<uint8_t>(c.proofs.size()));
  for (const auto& [kind, p] : c.proofs) {
    if (proof_kind(p) != kind) throw WireError("proof kind mismatch in vlc");
    write_proof(w, p);
  }
}

Vlc read_vlc(ByteReader& r) {
  Vlc out;
  out.value = read_clock(r);
  uint8_t n = r.u8();
  for (uint8_t i = 0; i < n; ++i) {
    Proof p = read_proof(r);
    FrontendKind k = proof_kind(p);
    if (!out.proofs.emplace(k, std::move(p)).second)
      throw WireError("duplicate proof kind");
  }
  return out;
}

Bytes serialize(const Vlc& c) {
  ByteWriter w;
  write_vlc(w, c);
  return w.take();
}

Vlc deserialize_vlc(std::span<const uint8_t> data) {
  ByteReader r(data);
  Vlc out = read_vlc(r);
  r.expect_done();
  return out;
}

Vlc deserialize_vlc(const Bytes& data) {
  return deserialize_vlc(std::span<const uint8_t>(data));
}

crypto::Digest vlc_digest(const Vlc& c) {
  return crypto::sha256(serialize(c));
}

}  // namespace vlc
