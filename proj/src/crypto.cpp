#include "vlc/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace vlc::crypto {

static void ensure_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

KeyPair KeyPair::generate() {
  ensure_init();
  KeyPair kp;
  crypto_sign_keypair(kp.pub.data(), kp.sec.data());
  return kp;
}

KeyPair KeyPair::from_seed(std::span<const uint8_t> seed) {
  ensure_init();
  std::array<uint8_t, crypto_sign_SEEDBYTES> s{};
  std::memcpy(s.data(), seed.data(), std::min(seed.size(), s.size()));
  KeyPair kp;
  crypto_sign_seed_keypair(kp.pub.data(), kp.sec.data(), s.data());
  return kp;
}

KeyPair KeyPair::from_seed(uint64_t seed) {
  std::array<uint8_t, 8> s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(seed >> (8 * i));
  return from_seed(s);
}

Digest sha256(std::span<const uint8_t> data) {
  ensure_init();
  Digest d;
  crypto_hash_sha256(d.data(), data.data(), data.size());
  return d;
}

Digest sha256(const Bytes& data) {
  return sha256(std::span<const uint8_t>(data));
}

Signature sign(std::span<const uint8_t> msg, const SecretKey& sk) {
  ensure_init();
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
  return sig;
}

bool verify(std::span<const uint8_t> msg, const Signature& sig, const PublicKey& pk) {
  ensure_init();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

}  // namespace vlc::crypto
