#pragma once

#include "vlc/deployment.hpp"
#include "vlc/sim.hpp"

namespace vlc::causal {

/// A message wrapped by the causal layer: app payload plus the sender's
/// clock, verified and merged on ingress.
struct CausalEnvelope {
  EntityId sender;
  Vlc clock;
  Bytes payload;
};

Bytes encode_envelope(const CausalEnvelope& env);
CausalEnvelope decode_envelope(std::span<const uint8_t> data);

enum class Disposition : uint8_t { Deliver, InvalidProof, Stale, Duplicate, ProveFailed };

const char* to_string(Disposition d);

/// Per-process middlebox state: clocks attached on egress, verified and
/// merged on ingress. Stale messages (ordered before the local clock)
/// are rejected rather than buffered.
///
/// A receive followed by a send is one clock update: ingress proves
/// Update(self, local, [received]); egress attaches that clock as-is and
/// only proves a fresh increment when the local clock was already
/// attached to an earlier send (or is the genesis clock).
class CausalPeer {
 public:
  CausalPeer(EntityId self, crypto::KeyPair key, ProofService& svc);

  Result<CausalEnvelope> egress(const Bytes& payload);
  Disposition ingress(const CausalEnvelope& env);

  const EntityId& self() const { return self_; }
  const Vlc& local() const { return local_; }

 private:
  EntityId self_;
  crypto::KeyPair key_;
  ProofService& svc_;
  Vlc local_;
  bool attached_ = false;  // local clock already rode on an egress
  std::set<crypto::Digest> seen_;
};

/// Application living on top of the causal layer.
class CausalApp {
 public:
  virtual ~CausalApp() = default;
  virtual void start(sim::Context&) {}
  virtual void deliver(sim::Context&, const EntityId& src, const Bytes& payload) = 0;
};

/// Sim process wrapping an app with the causal middlebox. Logs every
/// delivery and discard to the trace for checkers.
class CausalProcess : public sim::Process {
 public:
  CausalProcess(EntityId self, crypto::KeyPair key, ProofService& svc, CausalApp* app);

  /// Egress path; send failures (backend rejections) are logged and
  /// surface as a false return.
  bool send_causal(sim::Context& ctx, const EntityId& dst, const Bytes& payload);

  void on_start(sim::Context& ctx) override;
  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& payload) override;

  CausalPeer& peer() { return peer_; }

 private:
  CausalPeer peer_;
  CausalApp* app_;
};

}  // namespace vlc::causal
