#pragma once

#include <map>
#include <variant>

#include "vlc/clock.hpp"
#include "vlc/crypto.hpp"

namespace vlc {

/// The three validator frontends. Proofs are typed by frontend kind; a
/// proof of one kind never checks under another.
enum class FrontendKind : uint8_t { Update = 0, Mono = 1, App = 2 };

const char* to_string(FrontendKind k);

/// t-of-N validator node signatures over the canonical output clock.
struct QuorumCert {
  FrontendKind kind = FrontendKind::Update;
  crypto::Digest value_hash{};  // sha256 of canonical clock bytes
  std::map<EntityId, crypto::Signature> sigs;

  bool operator==(const QuorumCert&) const = default;
};

/// Attested-signer proofs: one or more signatures binding a code
/// measurement to the output clock digest. One doc suffices for
/// stateless kinds; Mono needs a simple majority of signers.
struct AttestedCert {
  FrontendKind kind = FrontendKind::Update;
  crypto::Digest measurement{};
  crypto::Digest user_data{};  // sha256 of canonical clock bytes
  std::map<EntityId, crypto::Signature> sigs;

  bool operator==(const AttestedCert&) const = default;
};

using Proof = std::variant<QuorumCert, AttestedCert>;

FrontendKind proof_kind(const Proof& p);

/// A verifiable logical clock: the clock value plus one typed proof per
/// configured frontend kind. The unit of causality exchanged on the wire.
struct Vlc {
  ClockValue value;
  std::map<FrontendKind, Proof> proofs;

  bool operator==(const Vlc&) const = default;

  static Vlc genesis() { return Vlc{}; }
};

/// Signing payload for quorum-backend partial signatures.
crypto::Digest qc_sign_payload(FrontendKind kind, const ClockValue& value);
/// Signing payload for attested-backend documents.
crypto::Digest attest_sign_payload(FrontendKind kind, const crypto::Digest& measurement,
                                   const crypto::Digest& value_hash);

void write_proof(ByteWriter& w, const Proof& p);
Proof read_proof(ByteReader& r);

void write_vlc(ByteWriter& w, const Vlc& c);
Vlc read_vlc(ByteReader& r);

Bytes serialize(const Vlc& c);
Vlc deserialize_vlc(std::span<const uint8_t> data);
Vlc deserialize_vlc(const Bytes& data);

/// Digest of the full Vlc encoding (value and proofs); used for
/// duplicate detection and verification caches.
crypto::Digest vlc_digest(const Vlc& c);

}  // namespace vlc
