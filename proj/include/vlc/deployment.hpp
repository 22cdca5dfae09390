#pragma once

#include <cstring>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>

#include "vlc/validator.hpp"

namespace vlc {

enum class BackendKind : uint8_t { Quorum = 1, Attested = 2 };

const char* to_string(BackendKind b);

/// Quorum group parameters: N nodes, at most f Byzantine. Stateless
/// frontends need f+1 matching signatures; stateful ones need
/// ceil((N+f+1)/2) so any two certs intersect in an honest node.
struct QuorumConfig {
  uint32_t n = 0;
  uint32_t f = 0;
  std::map<EntityId, crypto::PublicKey> registry;

  uint32_t t_stateless() const { return f + 1; }
  uint32_t t_stateful() const { return (n + f + 2) / 2; }  // ceil((n+f+1)/2)
  uint32_t threshold(FrontendKind k) const {
    return k == FrontendKind::Mono ? t_stateful() : t_stateless();
  }
};

/// Attested-signer trust anchors: expected code measurement plus the
/// attestation keys. Stateless kinds accept any single signer; Mono
/// needs a simple majority since signers keep independent state.
struct AttestedConfig {
  uint32_t n = 0;
  std::map<EntityId, crypto::PublicKey> roots;
  crypto::Digest expected_measurement{};

  uint32_t threshold(FrontendKind k) const {
    return k == FrontendKind::Mono ? (n + 2) / 2 : 1;  // ceil((n+1)/2) for mono
  }
};

/// True iff the cert meets its kind's threshold, every signature is from
/// a distinct registered node and verifies over (kind, value), and the
/// embedded hash matches the presented value. Pure, no network.
bool check_cert(const QuorumConfig& cfg, const QuorumCert& cert, const ClockValue& value);

/// True iff signature(s) valid, measurement matches the expected one and
/// the clock digest matches the presented value.
bool attested_check(const AttestedConfig& cfg, const AttestedCert& cert, const ClockValue& value);

/// Everything a party needs to verify Vlcs in one run: which frontend
/// kinds are enabled and the backend trust anchors. Verification results
/// are memoized by Vlc digest.
class Deployment {
 public:
  std::set<FrontendKind> kinds{FrontendKind::Update};
  BackendKind backend = BackendKind::Quorum;
  QuorumConfig quorum;
  AttestedConfig attested;
  /// Store deployments accept proofless merged inputs (dependency
  /// clocks); the app frontend vouches for them via the client signature.
  bool allow_unproven_merged = false;

  /// Full check: every enabled kind has a proof that checks over the
  /// value. The genesis clock verifies by definition.
  bool verify(const Vlc& c) const;

  /// Hooks handed to frontends for input clock checking.
  InputVerify input_verify() const;

 private:
  bool verify_uncached(const Vlc& c) const;

  struct DigestHash {
    size_t operator()(const crypto::Digest& d) const {
      size_t h;
      std::memcpy(&h, d.data(), sizeof(h));
      return h;
    }
  };
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<crypto::Digest, bool, DigestHash> cache_;

 public:
  Deployment() = default;
  Deployment(const Deployment& other)
      : kinds(other.kinds),
        backend(other.backend),
        quorum(other.quorum),
        attested(other.attested),
        allow_unproven_merged(other.allow_unproven_merged) {}
  Deployment& operator=(const Deployment& other) {
    if (this != &other) {
      kinds = other.kinds;
      backend = other.backend;
      quorum = other.quorum;
      attested = other.attested;
      allow_unproven_merged = other.allow_unproven_merged;
      std::lock_guard lk(cache_mu_);
      cache_.clear();
    }
    return *this;
  }
};

/// One logical Update, signed once per enabled frontend kind (the kind
/// byte is part of the signing payload, so each kind needs its own
/// signature). Built by the invoker; backends never see secret keys.
struct SignedUpdate {
  std::map<FrontendKind, ProveRequest> requests;

  static SignedUpdate make(const Deployment& dep, const EntityId& id,
                           const crypto::KeyPair& invoker, Vlc base, std::vector<Vlc> merged,
                           Bytes aux = {});
  const ProveRequest& request(FrontendKind k) const { return requests.at(k); }
};

/// A proof backend as seen by protocol code: turn a signed update into a
/// verified Vlc carrying one proof per enabled kind.
class ProofService {
 public:
  virtual ~ProofService() = default;
  virtual const Deployment& deployment() const = 0;
  virtual Result<Vlc> prove(const SignedUpdate& update) = 0;

  /// Convenience: sign and prove in one go.
  Result<Vlc> prove_update(const EntityId& id, const crypto::KeyPair& invoker, Vlc base,
                           std::vector<Vlc> merged, Bytes aux = {});
  bool verify(const Vlc& c) const { return deployment().verify(c); }
};

}  // namespace vlc
