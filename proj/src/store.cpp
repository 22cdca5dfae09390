#include "vlc/store.hpp"

#include <fstream>

#include "vlc/app_registry.hpp"

namespace vlc::store {

const EntityId& PartitionMap::owner(const EntityId& key) const {
  if (ranges.empty()) throw std::logic_error("empty partition map");
  auto it = ranges.upper_bound(key.bytes);
  if (it == ranges.begin()) throw std::logic_error("partition map does not cover key space");
  return std::prev(it)->second;
}

PartitionMap PartitionMap::uniform(const std::vector<EntityId>& servers,
                                   const std::vector<EntityId>& keys) {
  if (servers.empty()) throw std::logic_error("no servers");
  std::vector<Bytes> sorted;
  for (const auto& k : keys) sorted.push_back(k.bytes);
  std::sort(sorted.begin(), sorted.end());
  PartitionMap pm;
  size_t per = (sorted.size() + servers.size() - 1) / std::max<size_t>(1, servers.size());
  pm.ranges[Bytes{}] = servers[0];
  for (size_t s = 1; s < servers.size(); ++s) {
    size_t idx = s * per;
    if (idx >= sorted.size()) break;
    pm.ranges[sorted[idx]] = servers[s];
  }
  return pm;
}

crypto::Digest entry_sign_payload(const EntityId& key, const Bytes& value, const Vlc& vclock) {
  ByteWriter w;
  w.tag("CHRONO/ENTRY/v1");
  w.var8(std::span<const uint8_t>(key.bytes));
  w.raw(std::span<const uint8_t>(crypto::sha256(value)));
  w.raw(std::span<const uint8_t>(vlc_digest(vclock)));
  return crypto::sha256(w.bytes());
}

crypto::Digest dep_sign_payload(const ClockValue& dep) {
  ByteWriter w;
  w.tag("CHRONO/DEP/v1");
  w.raw(serialize(dep));
  return crypto::sha256(w.bytes());
}

Bytes encode_app_aux(const EntityId& client, const crypto::Signature& sig) {
  ByteWriter w;
  w.var8(std::span<const uint8_t>(client.bytes));
  w.raw(std::span<const uint8_t>(sig));
  return w.take();
}

std::pair<EntityId, crypto::Signature> decode_app_aux(std::span<const uint8_t> aux) {
  ByteReader r(aux);
  Bytes idb = r.var8();
  if (idb.empty()) throw WireError("empty client id in aux");
  crypto::Signature sig;
  auto raw = r.raw(sig.size());
  std::copy(raw.begin(), raw.end(), sig.begin());
  r.expect_done();
  return {EntityId(std::move(idb)), sig};
}

AppPredicate make_acl_predicate(std::map<EntityId, crypto::PublicKey> clients,
                                std::map<EntityId, std::set<EntityId>> acl,
                                bool allow_unlisted_clients) {
  return [clients = std::move(clients), acl = std::move(acl),
          allow_unlisted_clients](const ProveRequest& req, const Bytes& aux) -> Result<void> {
    EntityId client;
    crypto::Signature sig;
    try {
      std::tie(client, sig) = decode_app_aux(aux);
    } catch (const WireError& e) {
      return Rejection{Reject::AppRuleViolation, std::string("malformed aux: ") + e.what()};
    }
    auto kp = clients.find(client);
    if (kp == clients.end())
      return Rejection{Reject::AppRuleViolation, "unknown client " + client.printable()};
    if (req.merged.size() != 1)
      return Rejection{Reject::AppRuleViolation, "expected exactly one dependency clock"};
    if (!crypto::verify(dep_sign_payload(req.merged[0].value), sig, kp->second))
      return Rejection{Reject::AppRuleViolation, "client signature over dependency clock invalid"};
    auto allowed = acl.find(client);
    if (allowed == acl.end()) {
      if (allow_unlisted_clients) return {};
      return Rejection{Reject::AppRuleViolation, "client has no ACL entry"};
    }
    if (!allowed->second.contains(req.id))
      return Rejection{Reject::AppRuleViolation,
                       "client lacks write permission on key " + req.id.printable()};
    return {};
  };
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Ok: return "Ok";
    case Status::NotUpToDate: return "NotUpToDate";
    case Status::WrongOwner: return "WrongOwner";
    case Status::AppDenied: return "AppDenied";
    case Status::Invalid: return "Invalid";
  }
  return "?";
}

Bytes encode_request(const RequestFrame& f) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(f.op));
  w.u64(f.seq);
  w.var8(std::span<const uint8_t>(f.client.bytes));
  w.var8(std::span<const uint8_t>(f.key.bytes));
  w.var32(std::span<const uint8_t>(f.value));
  w.raw(serialize(f.dep));
  w.raw(std::span<const uint8_t>(f.sig));
  return w.take();
}

Bytes encode_reply(const ReplyFrame& f) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(Op::Reply));
  w.u64(f.seq);
  w.u8(static_cast<uint8_t>(f.status));
  w.u8(f.has_entry ? 1 : 0);
  w.var8(std::span<const uint8_t>(f.key.bytes));
  w.var32(std::span<const uint8_t>(f.value));
  write_vlc(w, f.vclock);
  w.var8(std::span<const uint8_t>(f.origin.bytes));
  w.raw(std::span<const uint8_t>(f.origin_sig));
  return w.take();
}

Bytes encode_propagate(const VersionedEntry& e) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(Op::Propagate));
  w.var8(std::span<const uint8_t>(e.key.bytes));
  w.var32(std::span<const uint8_t>(e.value));
  write_vlc(w, e.vclock);
  w.var8(std::span<const uint8_t>(e.origin.bytes));
  w.raw(std::span<const uint8_t>(e.origin_sig));
  return w.take();
}

static crypto::Signature read_sig(ByteReader& r) {
  crypto::Signature sig;
  auto raw = r.raw(sig.size());
  std::copy(raw.begin(), raw.end(), sig.begin());
  return sig;
}

Frame decode_frame(std::span<const uint8_t> data) {
  ByteReader r(data);
  uint8_t op = r.u8();
  if (op == static_cast<uint8_t>(Op::Get) || op == static_cast<uint8_t>(Op::Put)) {
    RequestFrame f;
    f.op = static_cast<Op>(op);
    f.seq = r.u64();
    Bytes cb = r.var8();
    if (cb.empty()) throw WireError("empty client");
    f.client = EntityId(std::move(cb));
    Bytes kb = r.var8();
    if (kb.empty()) throw WireError("empty key");
    f.key = EntityId(std::move(kb));
    f.value = r.var32();
    f.dep = read_clock(r);
    f.sig = read_sig(r);
    r.expect_done();
    return f;
  }
  if (op == static_cast<uint8_t>(Op::Reply)) {
    ReplyFrame f;
    f.seq = r.u64();
    uint8_t st = r.u8();
    if (st > 4) throw WireError("bad status");
    f.status = static_cast<Status>(st);
    f.has_entry = r.u8() != 0;
    Bytes kb = r.var8();
    if (kb.empty()) throw WireError("empty key");
    f.key = EntityId(std::move(kb));
    f.value = r.var32();
    f.vclock = read_vlc(r);
    Bytes ob = r.var8();
    if (!ob.empty()) f.origin = EntityId(std::move(ob));
    f.origin_sig = read_sig(r);
    r.expect_done();
    return f;
  }
  if (op == static_cast<uint8_t>(Op::Propagate)) {
    VersionedEntry e;
    Bytes kb = r.var8();
    if (kb.empty()) throw WireError("empty key");
    e.key = EntityId(std::move(kb));
    e.value = r.var32();
    e.vclock = read_vlc(r);
    Bytes ob = r.var8();
    if (ob.empty()) throw WireError("empty origin");
    e.origin = EntityId(std::move(ob));
    e.origin_sig = read_sig(r);
    r.expect_done();
    return e;
  }
  throw WireError("unknown store op");
}

StoreServerProcess::StoreServerProcess(EntityId self, crypto::KeyPair key, ProofService& svc,
                                       PartitionMap partition, std::vector<EntityId> peers,
                                       std::map<EntityId, crypto::PublicKey> server_keys,
                                       ServerOptions opt)
    : self_(std::move(self)),
      key_(key),
      svc_(svc),
      partition_(std::move(partition)),
      peers_(std::move(peers)),
      server_keys_(std::move(server_keys)),
      opt_(opt) {
  if (opt_.snapshot_path.empty()) return;
  std::ifstream in(opt_.snapshot_path, std::ios::binary);
  if (!in) return;
  // replay the append-only snapshot: highest version per key wins
  while (true) {
    uint8_t head[4];
    if (!in.read(reinterpret_cast<char*>(head), 4)) break;
    uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 | uint32_t(head[2]) << 8 |
                   uint32_t(head[3]);
    Bytes frame(len);
    if (!in.read(reinterpret_cast<char*>(frame.data()), len)) break;
    try {
      auto decoded = decode_frame(frame);
      if (auto* entry = std::get_if<VersionedEntry>(&decoded)) {
        auto it = data_.find(entry->key);
        if (it == data_.end() || it->second.version() < entry->version())
          data_[entry->key] = std::move(*entry);
      }
    } catch (const WireError&) {
      break;  // truncated tail after a crash: ignore the partial record
    }
  }
}

bool StoreServerProcess::up_to_date(const ClockValue& dep) const {
  for (const auto& [id, ver] : dep.entries()) {
    auto it = data_.find(id);
    uint64_t local = it == data_.end() ? 0 : it->second.version();
    if (local < ver) return false;
  }
  return true;
}

void StoreServerProcess::send_delayed(sim::Context& ctx, const EntityId& dst, Bytes frame,
                                      uint64_t delay) {
  if (delay == 0) {
    ctx.send(dst, std::move(frame));
    return;
  }
  uint64_t id = next_timer_++;
  mailbox_[id] = {dst, std::move(frame)};
  ctx.set_timer(delay, id);
}

void StoreServerProcess::on_timer(sim::Context& ctx, uint64_t timer_id) {
  auto it = mailbox_.find(timer_id);
  if (it == mailbox_.end()) return;
  ctx.send(it->second.first, std::move(it->second.second));
  mailbox_.erase(it);
}

void StoreServerProcess::on_message(sim::Context& ctx, const EntityId& src, const Bytes& raw) {
  Frame frame;
  try {
    frame = decode_frame(raw);
  } catch (const WireError& e) {
    ctx.log("malformed", {{"what", e.what()}});
    return;
  }
  if (const auto* req = std::get_if<RequestFrame>(&frame)) {
    handle_request(ctx, src, *req);
  } else if (const auto* entry = std::get_if<VersionedEntry>(&frame)) {
    apply_remote(ctx, *entry);
  }
  // replies to a server are ignored
}

void StoreServerProcess::handle_request(sim::Context& ctx, const EntityId& src,
                                        const RequestFrame& req) {
  // at-most-once for executed puts: a duplicate put frame replays the
  // cached reply instead of creating another version. Gets and
  // rejections are idempotent and recomputed.
  auto seen = last_reply_.find(req.client);
  if (seen != last_reply_.end() && req.op == Op::Put) {
    if (seen->second.first == req.seq) {
      ctx.send(src, seen->second.second);
      return;
    }
    if (req.seq < seen->second.first) return;  // stale duplicate
  }

  if (opt_.forge_replies) {
    // byzantine: fabricate a value and an unproven clock
    ReplyFrame forged;
    forged.seq = req.seq;
    forged.status = Status::Ok;
    forged.has_entry = true;
    forged.key = req.key;
    forged.value = to_bytes("forged");
    forged.vclock.value.set(req.key, req.dep.get(req.key) + 7);
    forged.origin = self_;
    send_delayed(ctx, src, encode_reply(forged), opt_.get_cost);
    return;
  }

  ReplyFrame reply = req.op == Op::Get ? serve_get(req) : serve_put(ctx, req);
  Bytes bytes = encode_reply(reply);
  if (req.op == Op::Put && reply.status == Status::Ok)
    last_reply_[req.client] = {req.seq, bytes};
  send_delayed(ctx, src, std::move(bytes), req.op == Op::Get ? opt_.get_cost : opt_.put_cost);
  ctx.log("served", {{"op", req.op == Op::Get ? "get" : "put"},
                     {"client", sim::id_to_json(req.client)},
                     {"key", sim::id_to_json(req.key)},
                     {"status", to_string(reply.status)}});
}

ReplyFrame StoreServerProcess::serve_get(const RequestFrame& req) {
  ReplyFrame reply;
  reply.seq = req.seq;
  reply.key = req.key;
  if (!up_to_date(req.dep)) {
    reply.status = Status::NotUpToDate;
    return reply;
  }
  auto it = data_.find(req.key);
  if (it == data_.end()) {
    reply.status = Status::Ok;
    reply.has_entry = false;  // never written: genesis clock
    return reply;
  }
  reply.status = Status::Ok;
  reply.has_entry = true;
  reply.value = it->second.value;
  reply.vclock = it->second.vclock;
  reply.origin = it->second.origin;
  reply.origin_sig = it->second.origin_sig;
  return reply;
}

ReplyFrame StoreServerProcess::serve_put(sim::Context& ctx, const RequestFrame& req) {
  ReplyFrame reply;
  reply.seq = req.seq;
  reply.key = req.key;
  if (partition_.owner(req.key) != self_) {
    reply.status = Status::WrongOwner;
    return reply;
  }
  if (req.value.size() > opt_.max_value_bytes) {
    reply.status = Status::Invalid;
    return reply;
  }
  if (!up_to_date(req.dep)) {
    reply.status = Status::NotUpToDate;
    return reply;
  }
  auto it = data_.find(req.key);
  Vlc base = it == data_.end() ? Vlc::genesis() : it->second.vclock;
  Vlc dep_clock;
  dep_clock.value = req.dep;  // client dependency clock rides unproven; the
                              // app frontend vouches for it via the signature
  auto proved = svc_.prove_update(req.key, key_, base, {dep_clock},
                                  encode_app_aux(req.client, req.sig));
  if (!proved) {
    reply.status = proved.code() == Reject::AppRuleViolation ? Status::AppDenied
                                                             : Status::Invalid;
    ctx.log("put-rejected", {{"key", sim::id_to_json(req.key)},
                             {"reason", to_string(proved.code())},
                             {"detail", proved.error().detail}});
    return reply;
  }
  VersionedEntry entry;
  entry.key = req.key;
  entry.value = req.value;
  entry.vclock = proved.take();
  entry.origin = self_;
  entry.origin_sig = crypto::sign(entry_sign_payload(entry.key, entry.value, entry.vclock),
                                  key_.sec);
  install(ctx, entry, true);
  reply.status = Status::Ok;
  reply.has_entry = true;
  reply.value = entry.value;
  reply.vclock = entry.vclock;
  reply.origin = entry.origin;
  reply.origin_sig = entry.origin_sig;
  return reply;
}

void StoreServerProcess::install(sim::Context& ctx, VersionedEntry entry, bool propagate) {
  EntityId key = entry.key;
  uint64_t version = entry.version();
  data_[key] = entry;
  if (!opt_.snapshot_path.empty()) {
    std::ofstream out(opt_.snapshot_path, std::ios::binary | std::ios::app);
    Bytes frame = encode_propagate(data_[key]);
    uint8_t head[4] = {static_cast<uint8_t>(frame.size() >> 24),
                       static_cast<uint8_t>(frame.size() >> 16),
                       static_cast<uint8_t>(frame.size() >> 8),
                       static_cast<uint8_t>(frame.size())};
    out.write(reinterpret_cast<const char*>(head), 4);
    out.write(reinterpret_cast<const char*>(frame.data()),
              static_cast<std::streamsize>(frame.size()));
  }
  ctx.log("install", {{"key", sim::id_to_json(key)}, {"version", version}});
  if (propagate) {
    Bytes frame = encode_propagate(entry);
    for (const EntityId& peer : peers_) {
      if (peer == self_) continue;
      send_delayed(ctx, peer, frame, opt_.put_cost);
    }
  }

  // wake pending entries parked on this key at or below the new version
  std::vector<crypto::Digest> ready;
  auto lo = pending_index_.lower_bound({key, 0});
  auto hi = pending_index_.upper_bound({key, version});
  for (auto it = lo; it != hi; ++it) ready.push_back(it->second);
  pending_index_.erase(lo, hi);
  for (const auto& digest : ready) {
    auto it = pending_.find(digest);
    if (it == pending_.end()) continue;
    VersionedEntry parked = std::move(it->second);
    pending_.erase(it);
    apply_remote(ctx, std::move(parked));  // re-examines, may park again
  }
}

void StoreServerProcess::apply_remote(sim::Context& ctx, VersionedEntry entry) {
  if (!svc_.verify(entry.vclock)) {
    ctx.log("propagate-rejected", {{"key", sim::id_to_json(entry.key)},
                                   {"origin", sim::id_to_json(entry.origin)},
                                   {"reason", "InvalidProof"}});
    return;
  }
  auto origin_key = server_keys_.find(entry.origin);
  if (origin_key == server_keys_.end() ||
      !crypto::verify(entry_sign_payload(entry.key, entry.value, entry.vclock), entry.origin_sig,
                      origin_key->second)) {
    ctx.log("propagate-rejected", {{"key", sim::id_to_json(entry.key)},
                                   {"origin", sim::id_to_json(entry.origin)},
                                   {"reason", "BadOriginSignature"}});
    return;
  }
  uint64_t version = entry.version();
  auto local = data_.find(entry.key);
  uint64_t local_version = local == data_.end() ? 0 : local->second.version();
  if (version <= local_version) return;  // older than installed: discard

  // dependencies: every other coordinate must be installed locally
  for (const auto& [id, ver] : entry.vclock.value.entries()) {
    if (id == entry.key) continue;
    auto it = data_.find(id);
    uint64_t have = it == data_.end() ? 0 : it->second.version();
    if (have < ver) {
      EntityId key = entry.key;
      auto digest = crypto::sha256(encode_propagate(entry));
      pending_index_.emplace(std::pair{id, ver}, digest);
      pending_.emplace(digest, std::move(entry));
      ctx.log("pend", {{"key", sim::id_to_json(key)},
                       {"waiting_on", sim::id_to_json(id)},
                       {"needs", ver}});
      return;
    }
  }
  install(ctx, std::move(entry), false);
}

std::vector<WorkloadOp> make_workload(uint64_t seed, const EntityId& client, uint64_t ops,
                                      double write_ratio, uint32_t keys) {
  std::array<uint64_t, 1> parts{fnv1a(std::span<const uint8_t>(client.bytes))};
  Rng rng = Rng::derive(seed, parts);
  std::vector<WorkloadOp> out;
  out.reserve(ops);
  for (uint64_t i = 0; i < ops; ++i) {
    WorkloadOp op;
    op.is_put = rng.chance(write_ratio);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "k%04u", static_cast<unsigned>(rng.below(keys)));
    op.key = EntityId(buf);
    if (op.is_put)
      op.value = to_bytes(client.printable() + ":" + std::to_string(i));
    out.push_back(std::move(op));
  }
  return out;
}

StoreClientProcess::StoreClientProcess(EntityId self, crypto::KeyPair key, const Deployment& dep,
                                       PartitionMap partition, std::vector<EntityId> servers,
                                       std::map<EntityId, crypto::PublicKey> server_keys,
                                       std::vector<WorkloadOp> workload, ClientOptions opt)
    : self_(std::move(self)),
      key_(key),
      dep_(dep),
      partition_(std::move(partition)),
      servers_(std::move(servers)),
      server_keys_(std::move(server_keys)),
      workload_(std::move(workload)),
      opt_(opt) {}

void StoreClientProcess::on_start(sim::Context& ctx) { issue(ctx); }

EntityId StoreClientProcess::pick_server(const WorkloadOp& op) const {
  if (op.is_put) return partition_.owner(op.key);
  size_t base = fnv1a(std::span<const uint8_t>(self_.bytes)) + seq_;
  return servers_[(base + attempt_) % servers_.size()];
}

void StoreClientProcess::issue(sim::Context& ctx) {
  if (done()) {
    ctx.log("client-done", {{"accepted", accepted_}, {"failed", failed_}});
    return;
  }
  const WorkloadOp& op = workload_[next_op_];
  RequestFrame req;
  req.op = op.is_put ? Op::Put : Op::Get;
  req.seq = seq_;
  req.client = self_;
  req.key = op.key;
  req.value = op.value;
  req.dep = dep_clock_;
  req.sig = crypto::sign(dep_sign_payload(dep_clock_), key_.sec);
  if (attempt_ == 0) issued_at_ = ctx.now();
  waiting_ = true;
  ctx.send(pick_server(op), encode_request(req));
}

void StoreClientProcess::finish_op(sim::Context& ctx, bool ok) {
  waiting_ = false;
  if (ok) {
    ++accepted_;
    latencies_.push_back(ctx.now() - issued_at_);
  } else {
    ++failed_;
    ctx.log("op-failed", {{"op_index", next_op_}});
  }
  ++next_op_;
  ++seq_;
  attempt_ = 0;
  if (opt_.think_ticks == 0) {
    issue(ctx);
  } else {
    ctx.set_timer(opt_.think_ticks, 1);  // think, then next op
  }
}

void StoreClientProcess::on_timer(sim::Context& ctx, uint64_t timer_id) {
  if (timer_id == 1 && !waiting_) issue(ctx);          // think time elapsed
  if (timer_id == 2 && waiting_) issue(ctx);           // retry the current op
}

void StoreClientProcess::on_message(sim::Context& ctx, const EntityId&, const Bytes& raw) {
  Frame frame;
  try {
    frame = decode_frame(raw);
  } catch (const WireError&) {
    return;
  }
  const auto* reply = std::get_if<ReplyFrame>(&frame);
  if (reply == nullptr || !waiting_ || reply->seq != seq_) return;  // stale or duplicate

  const WorkloadOp& op = workload_[next_op_];
  bool retry = false;
  bool accepted = false;

  if (reply->status == Status::Ok) {
    if (!op.is_put && !reply->has_entry) {
      // never-written key: genesis clock, acceptable only with no dependency
      if (dep_clock_.get(op.key) == 0) {
        accepted = true;
        ctx.log("op-accepted", {{"session", self_.printable()},
                                {"op", "get"},
                                {"key", sim::id_to_json(op.key)},
                                {"version", 0},
                                {"vclock", to_hex(serialize(ClockValue{}))}});
      } else {
        retry = true;  // this replica is behind our session
      }
    } else if (reply->key != op.key) {
      retry = true;
    } else {
      // proof-carrying reply: clock must verify regardless of who served it
      bool proof_ok = dep_.verify(reply->vclock);
      auto origin_key = server_keys_.find(reply->origin);
      bool origin_ok = proof_ok && reply->has_entry && origin_key != server_keys_.end() &&
                       crypto::verify(entry_sign_payload(reply->key, reply->value, reply->vclock),
                                      reply->origin_sig, origin_key->second);
      uint64_t version = reply->vclock.value.get(op.key);
      if (!proof_ok || !origin_ok) {
        ctx.log("reply-rejected", {{"key", sim::id_to_json(op.key)},
                                   {"reason", "InvalidProof"}});
        retry = true;
      } else if (!op.is_put) {
        if (version >= dep_clock_.get(op.key)) {
          accepted = true;
          dep_clock_.merge_max(reply->vclock.value);
          ctx.log("op-accepted", {{"session", self_.printable()},
                                  {"op", "get"},
                                  {"key", sim::id_to_json(op.key)},
                                  {"version", version},
                                  {"vclock", to_hex(serialize(reply->vclock.value))}});
        } else {
          ctx.log("reply-rejected", {{"key", sim::id_to_json(op.key)},
                                     {"reason", "StaleRead"}});
          retry = true;
        }
      } else {
        if (compare(reply->vclock.value, dep_clock_) == Ordering4::AF) {
          accepted = true;
          dep_clock_.merge_max(reply->vclock.value);
          ctx.log("op-accepted", {{"session", self_.printable()},
                                  {"op", "put"},
                                  {"key", sim::id_to_json(op.key)},
                                  {"version", version},
                                  {"vclock", to_hex(serialize(reply->vclock.value))}});
        } else {
          ctx.log("reply-rejected", {{"key", sim::id_to_json(op.key)},
                                     {"reason", "CausalityViolated"}});
          retry = true;
        }
      }
    }
  } else if (reply->status == Status::NotUpToDate) {
    retry = true;
  } else if (reply->status == Status::AppDenied) {
    ctx.log("op-denied", {{"key", sim::id_to_json(op.key)}});
    finish_op(ctx, false);
    return;
  } else {
    retry = true;
  }

  if (accepted) {
    finish_op(ctx, true);
    return;
  }
  if (retry) {
    if (++attempt_ >= opt_.max_attempts) {
      finish_op(ctx, false);
      return;
    }
    ctx.set_timer(opt_.retry_backoff, 2);
  }
}

AppPredicate StoreServerProcess::acl_predicate_from_json(const nlohmann::json& config) {
  std::map<EntityId, crypto::PublicKey> clients;
  std::map<EntityId, std::set<EntityId>> acl;
  if (config.contains("clients")) {
    for (auto it = config["clients"].begin(); it != config["clients"].end(); ++it) {
      Bytes pk = from_hex(it.value().get<std::string>());
      crypto::PublicKey key{};
      if (pk.size() != key.size()) continue;
      std::copy(pk.begin(), pk.end(), key.begin());
      clients[sim::id_from_json(it.key())] = key;
    }
  }
  if (config.contains("acl")) {
    for (auto it = config["acl"].begin(); it != config["acl"].end(); ++it) {
      std::set<EntityId> keys;
      for (const auto& k : it.value()) keys.insert(sim::id_from_json(k));
      acl[sim::id_from_json(it.key())] = std::move(keys);
    }
  }
  return make_acl_predicate(std::move(clients), std::move(acl),
                            config.value("allow_unlisted", false));
}

namespace {
const bool registered = [] {
  register_app_predicate("store-acl", StoreServerProcess::acl_predicate_from_json);
  return true;
}();
}  // namespace

bool detect_fork(const Deployment& dep, const VersionedEntry& a, const VersionedEntry& b) {
  if (!(a.key == b.key)) return false;
  if (!dep.verify(a.vclock) || !dep.verify(b.vclock)) return false;
  return compare(a.vclock.value, b.vclock.value) == Ordering4::CC;
}

}  // namespace vlc::store
