#pragma once

#include <array>
#include <span>

#include "vlc/bytes.hpp"

namespace vlc::crypto {

using Digest = std::array<uint8_t, 32>;
using PublicKey = std::array<uint8_t, 32>;
using SecretKey = std::array<uint8_t, 64>;
using Signature = std::array<uint8_t, 64>;

/// Ed25519 key pair (libsodium layout: secret key embeds the public half).
struct KeyPair {
  PublicKey pub{};
  SecretKey sec{};

  static KeyPair generate();
  /// Deterministic derivation, used by tests and seeded configs.
  static KeyPair from_seed(std::span<const uint8_t> seed);
  static KeyPair from_seed(uint64_t seed);
};

Digest sha256(std::span<const uint8_t> data);
Digest sha256(const Bytes& data);

Signature sign(std::span<const uint8_t> msg, const SecretKey& sk);
bool verify(std::span<const uint8_t> msg, const Signature& sig, const PublicKey& pk);

inline Bytes to_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

}  // namespace vlc::crypto
