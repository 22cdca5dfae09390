#pragma once

#include "vlc/deployment.hpp"
#include "vlc/sim.hpp"

namespace vlc::mutex {

enum class MsgKind : uint8_t { Request = 1, Reply = 2, Release = 3, Query = 4, Ack = 5 };

const char* to_string(MsgKind k);

struct ReplyEntry {
  EntityId requester;
  ClockValue clock;

  bool operator==(const ReplyEntry&) const = default;
};

/// Every message carries the sender and its clock; a Reply additionally
/// lists the queued requests ordered before the one being replied to.
struct Msg {
  MsgKind kind = MsgKind::Request;
  EntityId sender;
  Vlc clock;
  std::vector<ReplyEntry> reply_clocks;

  bool operator==(const Msg&) const = default;
};

Bytes encode_msg(const Msg& m);
Msg decode_msg(std::span<const uint8_t> data);

/// What a holder shows a third party: its own Request plus, for every
/// other process, either that process's Reply or its Release.
struct AcquisitionProof {
  Msg request;
  std::map<EntityId, Msg> support;
};

Bytes encode_proof(const AcquisitionProof& p);
AcquisitionProof decode_proof(std::span<const uint8_t> data);

/// Offline validation against the roster: every message verifies, every
/// Reply is ordered after the Request (the replier saw it), every
/// Release is totally ordered after the Request, and every request
/// listed in a Reply is covered by that process's Release in the proof.
bool check_acquisition(const Deployment& dep, const std::vector<EntityId>& roster,
                       const AcquisitionProof& proof, std::string* why = nullptr);

struct Options {
  bool contend = false;
  uint64_t request_at = 1;
  uint64_t hold_ticks = 2;
  uint64_t retry_every = 60;
  /// Queries about a queued request are held back briefly; concurrent
  /// requests usually arrive within a delivery delay and answer them.
  uint64_t query_grace = 10;
  uint32_t release_rebroadcasts = 0;  // extra Release copies under lossy plans
};

/// One protocol participant, driven by the simulator. The local clock
/// advances through the proof backend on every send and verified
/// receive; mutex deployments enable the mono frontend so forked clocks
/// cannot be proved.
class MutexProcess : public sim::Process {
 public:
  MutexProcess(EntityId self, crypto::KeyPair key, ProofService& svc, Options opt);

  void on_start(sim::Context& ctx) override;
  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) override;
  void on_timer(sim::Context& ctx, uint64_t timer_id) override;

  uint64_t grants_done() const { return grants_done_; }
  bool holding() const { return holding_; }
  const std::optional<AcquisitionProof>& last_proof() const { return last_proof_; }

 private:
  static constexpr uint64_t kTimerRequest = 1, kTimerRelease = 2, kTimerRetry = 3,
                            kTimerGrace = 4;

  struct QueueEntry {
    ClockValue clock;
    bool direct = false;   // actual Request message received (vs learned from a Reply)
    bool replied = false;  // we already sent our Reply
    uint64_t queued_at = 0;
  };

  /// Why acquisition is currently blocked; drives targeted retries.
  struct AcquireBlock {
    bool granted = false;
    bool order_blocked = false;           // a smaller request is queued: just wait
    std::vector<EntityId> query;          // peers whose latest clock lags the request
    std::vector<EntityId> resend_request; // peers owing a (fresh) reply or release
  };

  void do_request(sim::Context& ctx);
  void do_release(sim::Context& ctx);
  AcquireBlock try_acquire(sim::Context& ctx);
  void eval_owed_replies(sim::Context& ctx, bool send_queries);
  void maybe_query(sim::Context& ctx, const EntityId& q);
  void send_msg(sim::Context& ctx, const EntityId& dst, MsgKind kind,
                std::vector<ReplyEntry> entries = {});
  void broadcast_msg(sim::Context& ctx, MsgKind kind);
  bool advance_local(sim::Context& ctx, const Vlc& received);
  void handle_request(sim::Context& ctx, const Msg& m);
  void handle_reply(const Msg& m);
  void handle_release(sim::Context& ctx, const Msg& m);
  void arm_retry(sim::Context& ctx);

  EntityId self_;
  crypto::KeyPair key_;
  ProofService& svc_;
  Options opt_;

  Vlc local_;
  std::map<EntityId, QueueEntry> queue_;
  std::map<EntityId, ClockValue> latest_;
  std::map<EntityId, Msg> last_release_;
  std::optional<Msg> pending_;
  Bytes pending_raw_;  // retransmitted verbatim so all queues agree
  std::map<EntityId, Msg> replies_;
  bool holding_ = false;
  uint64_t grants_done_ = 0;
  std::optional<AcquisitionProof> last_proof_;
  Bytes release_raw_;
  uint32_t release_rebroadcasts_left_ = 0;
  std::set<crypto::Digest> seen_;
  std::map<EntityId, uint64_t> last_query_at_;
  bool retry_armed_ = false;
  uint64_t retry_interval_ = 0;  // grows exponentially while blocked
};

}  // namespace vlc::mutex
