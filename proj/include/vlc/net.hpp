#pragma once

#include <atomic>
#include <condition_variable>
#include <thread>

#include "vlc/attested.hpp"
#include "vlc/sim.hpp"

namespace vlc::net {

struct Addr {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
};

/// Length-prefixed frame over a stream socket:
/// u32 length, u8 sender-id length, sender id, payload.
bool write_frame(int fd, const EntityId& src, const Bytes& payload);
std::optional<std::pair<EntityId, Bytes>> read_frame(int fd);

/// Real-socket host for one process. Implements the same Context the
/// simulator provides, so protocol handlers run unchanged: one reader
/// task per connection, handlers serialized, timers on a helper thread,
/// virtual time = milliseconds since start.
class RealHost {
 public:
  RealHost(EntityId self, uint16_t listen_port, std::map<EntityId, Addr> peers,
           sim::Process& proc);
  ~RealHost();

  void start();
  void stop();
  uint16_t port() const { return port_; }
  const EntityId& self() const { return self_; }
  /// Peers may be registered after start (ports are often ephemeral) but
  /// before traffic flows; the roster is not guarded against handlers.
  void add_peer(const EntityId& id, const Addr& addr);
  /// App records written by the hosted process so far.
  std::vector<sim::AppRecord> snapshot_log();

 private:
  class HostContext;

  void accept_loop();
  void reader_loop(int fd);
  void timer_loop();
  void dispatch_message(const EntityId& src, Bytes payload);
  bool raw_send(const EntityId& dst, const Bytes& payload);
  uint64_t now_ms() const;

  EntityId self_;
  uint16_t port_;
  std::map<EntityId, Addr> peers_;
  sim::Process& proc_;
  std::vector<EntityId> roster_;

  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::vector<std::thread> readers_;
  std::mutex readers_mu_;

  std::mutex dispatch_mu_;  // serializes handler invocations
  std::mutex send_mu_;
  std::map<EntityId, int> conns_;
  std::vector<int> accepted_fds_;
  std::vector<int> dead_fds_;

  std::mutex log_mu_;
  std::vector<sim::AppRecord> log_;
  std::atomic<uint64_t> log_seq_{0};

  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  std::multimap<uint64_t, uint64_t> timers_;  // deadline ms -> timer id
  std::thread timer_thread_;

  std::chrono::steady_clock::time_point start_;
};

// ---- validator node wire protocol: PROVE / SIG / REJECT (+ ATTEST) ----

enum class NodeOp : uint8_t { Prove = 1, Sig = 2, RejectMsg = 3, Attest = 4 };

Bytes encode_prove(uint64_t rid, const ProveRequest& req);
Bytes encode_sig(uint64_t rid, const EntityId& node, const crypto::Signature& sig);
Bytes encode_reject(uint64_t rid, Reject code);
Bytes encode_attest(uint64_t rid, const AttestedDoc& doc);

struct ProveMsg {
  uint64_t rid;
  ProveRequest req;
};
struct SigMsg {
  uint64_t rid;
  EntityId node;
  crypto::Signature sig;
};
struct RejectFrame {
  uint64_t rid;
  Reject code;
};
struct AttestMsg {
  uint64_t rid;
  EntityId signer;
  crypto::Digest measurement;
  crypto::Digest user_data;
  crypto::Signature sig;
};
using NodeFrame = std::variant<ProveMsg, SigMsg, RejectFrame, AttestMsg>;
NodeFrame decode_node_frame(std::span<const uint8_t> data);

/// A quorum validator node as a transport-agnostic process: answers
/// PROVE frames with SIG or REJECT.
class QuorumNodeProcess : public sim::Process {
 public:
  QuorumNodeProcess(std::unique_ptr<QuorumNode> node, Deployment dep)
      : node_(std::move(node)), dep_(std::move(dep)) {}
  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) override;

  QuorumNode& node() { return *node_; }

 private:
  std::unique_ptr<QuorumNode> node_;
  Deployment dep_;
};

/// Attested signer endpoint: answers PROVE with ATTEST documents.
class AttestedNodeProcess : public sim::Process {
 public:
  AttestedNodeProcess(std::unique_ptr<AttestedSigner> signer, Deployment dep)
      : signer_(std::move(signer)), dep_(std::move(dep)) {}
  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) override;

  AttestedSigner& signer() { return *signer_; }

 private:
  std::unique_ptr<AttestedSigner> signer_;
  Deployment dep_;
};

/// Socket-side proof service: collects certificates from validator node
/// servers over TCP, widening one node at a time on timeout or mismatch.
class NetProofClient : public ProofService {
 public:
  NetProofClient(Deployment dep, EntityId self, std::map<EntityId, Addr> nodes,
                 uint64_t timeout_ms = 500);
  ~NetProofClient();

  const Deployment& deployment() const override { return dep_; }
  Result<Vlc> prove(const SignedUpdate& update) override;

 private:
  int conn(const EntityId& node);
  void drop_conn(const EntityId& node);

  Deployment dep_;
  EntityId self_;
  std::map<EntityId, Addr> nodes_;
  uint64_t timeout_ms_;
  std::map<EntityId, int> conns_;
  uint64_t next_rid_ = 1;
};

}  // namespace vlc::net
