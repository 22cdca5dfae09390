#pragma once

#include <optional>

#include "vlc/quorum.hpp"

namespace vlc {

/// A locally attested document: a trusted signer binding its code
/// measurement to an output clock digest. Stands in for a hardware
/// attestation document; the trust boundary is documented, not enforced
/// by hardware.
struct AttestedDoc {
  EntityId signer;
  crypto::Digest measurement{};
  crypto::Digest user_data{};
  ClockValue value;
  crypto::Signature sig;
};

/// Emulated enclave validator: runs the frontend logic and signs
/// (kind, measurement, clock digest) with its attestation key.
class AttestedSigner {
 public:
  AttestedSigner(EntityId id, crypto::KeyPair key, crypto::Digest measurement,
                 PermissionTable perms, AppPredicate app = {});

  std::optional<Result<AttestedDoc>> prove(const ProveRequest& req, const Deployment& dep);

  const EntityId& id() const { return id_; }
  const crypto::PublicKey& pub() const { return key_.pub; }

  FaultMode fault = FaultMode::Honest;
  MonoState mono;

 private:
  EntityId id_;
  crypto::KeyPair key_;
  crypto::Digest measurement_;
  PermissionTable perms_;
  AppPredicate app_;
};

/// Deterministic measurement of the validator build: digest of a version
/// string plus the frontend configuration, pinned in deployment config.
crypto::Digest compute_measurement(std::string_view version, const std::set<FrontendKind>& kinds);

struct AttestedProveResult {
  ClockValue value;
  AttestedCert cert;
};

/// Collects threshold(kind) matching documents: one signer suffices for
/// stateless kinds, a simple majority for mono.
Result<AttestedProveResult> attested_prove(const AttestedConfig& cfg,
                                           std::span<AttestedSigner* const> signers,
                                           const ProveRequest& req, const Deployment& dep);

/// In-process attested deployment.
class LocalAttestedService : public ProofService {
 public:
  LocalAttestedService(Deployment dep, std::vector<std::unique_ptr<AttestedSigner>> signers);

  const Deployment& deployment() const override { return dep_; }
  Result<Vlc> prove(const SignedUpdate& update) override;

  AttestedSigner& signer(size_t i) { return *signers_.at(i); }
  size_t signer_count() const { return signers_.size(); }

 private:
  Deployment dep_;
  std::vector<std::unique_ptr<AttestedSigner>> signers_;
  std::vector<AttestedSigner*> order_;
};

}  // namespace vlc
