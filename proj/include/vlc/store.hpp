#pragma once

#include "vlc/deployment.hpp"
#include "vlc/sim.hpp"

namespace vlc::store {

/// Static key-space partition: sorted range starts to owning server.
/// The first range must start at the empty prefix so coverage is total.
struct PartitionMap {
  std::map<Bytes, EntityId> ranges;

  const EntityId& owner(const EntityId& key) const;
  /// Splits a sorted key universe into contiguous chunks, one per server.
  static PartitionMap uniform(const std::vector<EntityId>& servers,
                              const std::vector<EntityId>& keys);
};

/// A stored value with its versioned dependency clock. The clock's own
/// key coordinate is the entry's version number; the origin signature
/// binds the value bytes to the clock.
struct VersionedEntry {
  EntityId key;
  Bytes value;
  Vlc vclock;
  EntityId origin;
  crypto::Signature origin_sig{};

  uint64_t version() const { return vclock.value.get(key); }
};

crypto::Digest entry_sign_payload(const EntityId& key, const Bytes& value, const Vlc& vclock);
crypto::Digest dep_sign_payload(const ClockValue& dep);

/// App-frontend aux encoding: client id plus its signature over the
/// dependency clock being merged.
Bytes encode_app_aux(const EntityId& client, const crypto::Signature& sig);
std::pair<EntityId, crypto::Signature> decode_app_aux(std::span<const uint8_t> aux);

/// The worked per-client key ACL application predicate: validates the
/// client signature over the merged dependency clock and checks the
/// client may write the key. Pure; all config is captured at install.
AppPredicate make_acl_predicate(std::map<EntityId, crypto::PublicKey> clients,
                                std::map<EntityId, std::set<EntityId>> acl,
                                bool allow_unlisted_clients = false);

// ---- wire frames ----

enum class Op : uint8_t { Get = 1, Put = 2, Reply = 3, Propagate = 4 };
enum class Status : uint8_t {
  Ok = 0,
  NotUpToDate = 1,
  WrongOwner = 2,
  AppDenied = 3,
  Invalid = 4,
};

const char* to_string(Status s);

struct RequestFrame {
  Op op = Op::Get;
  uint64_t seq = 0;
  EntityId client;
  EntityId key;
  Bytes value;     // put only
  ClockValue dep;  // session dependency clock
  crypto::Signature sig{};
};

struct ReplyFrame {
  uint64_t seq = 0;
  Status status = Status::Ok;
  bool has_entry = false;
  EntityId key;
  Bytes value;
  Vlc vclock;
  EntityId origin;
  crypto::Signature origin_sig{};
};

Bytes encode_request(const RequestFrame& f);
Bytes encode_reply(const ReplyFrame& f);
Bytes encode_propagate(const VersionedEntry& e);

/// Any store frame, decoded by leading op byte.
using Frame = std::variant<RequestFrame, ReplyFrame, VersionedEntry>;
Frame decode_frame(std::span<const uint8_t> data);

// ---- server ----

struct ServerOptions {
  uint64_t get_cost = 1;  // reply delay in ticks, models processing
  uint64_t put_cost = 4;  // includes the proof round
  bool forge_replies = false;  // byzantine: fabricate values without valid clocks
  size_t max_value_bytes = 64 * 1024;
  /// Append-only snapshot for restart; loaded on construction when set.
  std::string snapshot_path;
};

/// Fully replicated server: serves Gets from local state, owns a key
/// range for Puts, asynchronously propagates installed entries and
/// parks arrivals with unmet dependencies in a pending set.
class StoreServerProcess : public sim::Process {
 public:
  StoreServerProcess(EntityId self, crypto::KeyPair key, ProofService& svc,
                     PartitionMap partition, std::vector<EntityId> peers,
                     std::map<EntityId, crypto::PublicKey> server_keys, ServerOptions opt);

  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) override;
  void on_timer(sim::Context& ctx, uint64_t timer_id) override;

  const std::map<EntityId, VersionedEntry>& entries() const { return data_; }
  size_t pending_count() const { return pending_.size(); }

  /// Local version of every id in `dep` at least as new as required.
  bool up_to_date(const ClockValue& dep) const;

  /// The worked ACL predicate, also installed in the app-predicate
  /// registry as "store-acl".
  static AppPredicate acl_predicate_from_json(const nlohmann::json& config);

 private:
  void handle_request(sim::Context& ctx, const EntityId& src, const RequestFrame& req);
  ReplyFrame serve_get(const RequestFrame& req);
  ReplyFrame serve_put(sim::Context& ctx, const RequestFrame& req);
  void install(sim::Context& ctx, VersionedEntry entry, bool propagate);
  void apply_remote(sim::Context& ctx, VersionedEntry entry);
  void send_delayed(sim::Context& ctx, const EntityId& dst, Bytes frame, uint64_t delay);

  EntityId self_;
  crypto::KeyPair key_;
  ProofService& svc_;
  PartitionMap partition_;
  std::vector<EntityId> peers_;
  std::map<EntityId, crypto::PublicKey> server_keys_;
  ServerOptions opt_;
  std::map<EntityId, VersionedEntry> data_;
  std::map<crypto::Digest, VersionedEntry> pending_;
  // first unmet (key, version) -> digests of parked entries
  std::multimap<std::pair<EntityId, uint64_t>, crypto::Digest> pending_index_;
  std::map<EntityId, std::pair<uint64_t, Bytes>> last_reply_;  // at-most-once per client
  std::map<uint64_t, std::pair<EntityId, Bytes>> mailbox_;     // delayed sends
  uint64_t next_timer_ = 1;
};

// ---- client ----

struct WorkloadOp {
  bool is_put = false;
  EntityId key;
  Bytes value;
};

std::vector<WorkloadOp> make_workload(uint64_t seed, const EntityId& client, uint64_t ops,
                                      double write_ratio, uint32_t keys);

struct ClientOptions {
  uint64_t retry_backoff = 8;
  uint32_t max_attempts = 8;
  uint64_t think_ticks = 0;
};

/// One client session: closed loop over a pre-generated workload,
/// dependency clock maintained by merging accepted reply clocks. Gets go
/// to any server (rotating on retry); Puts go to the partition owner.
class StoreClientProcess : public sim::Process {
 public:
  StoreClientProcess(EntityId self, crypto::KeyPair key, const Deployment& dep,
                     PartitionMap partition, std::vector<EntityId> servers,
                     std::map<EntityId, crypto::PublicKey> server_keys,
                     std::vector<WorkloadOp> workload, ClientOptions opt);

  void on_start(sim::Context& ctx) override;
  void on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) override;
  void on_timer(sim::Context& ctx, uint64_t timer_id) override;

  bool done() const { return next_op_ >= workload_.size(); }
  uint64_t accepted() const { return accepted_; }
  uint64_t failed() const { return failed_; }
  const std::vector<uint64_t>& latencies() const { return latencies_; }
  const ClockValue& dep_clock() const { return dep_clock_; }

 private:
  void issue(sim::Context& ctx);
  void finish_op(sim::Context& ctx, bool ok);
  EntityId pick_server(const WorkloadOp& op) const;

  EntityId self_;
  crypto::KeyPair key_;
  const Deployment& dep_;
  PartitionMap partition_;
  std::vector<EntityId> servers_;
  std::map<EntityId, crypto::PublicKey> server_keys_;
  std::vector<WorkloadOp> workload_;
  ClientOptions opt_;
  ClockValue dep_clock_;
  size_t next_op_ = 0;
  uint64_t seq_ = 0;
  uint32_t attempt_ = 0;
  uint64_t issued_at_ = 0;
  bool waiting_ = false;
  uint64_t accepted_ = 0;
  uint64_t failed_ = 0;
  std::vector<uint64_t> latencies_;
};

/// Byzantine fork detection: two entries for one key whose clocks both
/// verify yet compare concurrent prove the owner forked the key.
bool detect_fork(const Deployment& dep, const VersionedEntry& a, const VersionedEntry& b);

}  // namespace vlc::store
