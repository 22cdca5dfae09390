#pragma once

#include <optional>

#include "vlc/deployment.hpp"

namespace vlc {

/// Test-facing Byzantine behaviors for a validator node.
enum class FaultMode : uint8_t {
  Honest,
  Silent,      // never replies; clients time out and widen
  WrongValue,  // signs a corrupted output clock
  Equivocate,  // signs different corrupted clocks per client
  StaleState,  // mono: skips the state check and update, signing forks
};

const char* to_string(FaultMode m);

/// One node's reply: the output clock it computed plus its signature
/// over the quorum signing payload.
struct PartialSig {
  EntityId node_id;
  ClockValue value;
  crypto::Signature sig;
};

/// A quorum validator node: executes the frontend logic independently
/// and signs the computed output clock. Mono requests for one id are
/// processed serially by construction (single-threaded callers).
class QuorumNode {
 public:
  QuorumNode(EntityId id, crypto::KeyPair key, PermissionTable perms, AppPredicate app = {});

  /// nullopt models a silent node (client-side timeout). Frontend
  /// rejections pass through as Result errors.
  std::optional<Result<PartialSig>> prove(const ProveRequest& req, const Deployment& dep);

  const EntityId& id() const { return id_; }
  const crypto::PublicKey& pub() const { return key_.pub; }

  FaultMode fault = FaultMode::Honest;
  MonoState mono;

 private:
  EntityId id_;
  crypto::KeyPair key_;
  PermissionTable perms_;
  AppPredicate app_;
};

struct QuorumProveResult {
  ClockValue value;
  QuorumCert cert;
};

/// Client side of proof collection: contacts threshold(kind) nodes in
/// registry order, widens one node at a time on timeout/mismatch, and
/// returns a certificate once t matching signatures over one clock
/// value are collected.
Result<QuorumProveResult> client_prove(const QuorumConfig& cfg,
                                       std::span<QuorumNode* const> nodes,
                                       const ProveRequest& req, const Deployment& dep);

/// In-process quorum deployment: the proof service used by simulations
/// and unit tests. Nodes are owned; fault modes are poked directly.
class LocalQuorumService : public ProofService {
 public:
  LocalQuorumService(Deployment dep, std::vector<std::unique_ptr<QuorumNode>> nodes);

  const Deployment& deployment() const override { return dep_; }
  Result<Vlc> prove(const SignedUpdate& update) override;

  QuorumNode& node(size_t i) { return *nodes_.at(i); }
  size_t node_count() const { return nodes_.size(); }

 private:
  Deployment dep_;
  std::vector<std::unique_ptr<QuorumNode>> nodes_;
  std::vector<QuorumNode*> order_;
};

}  // namespace vlc
