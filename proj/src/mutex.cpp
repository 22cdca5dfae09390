#include "vlc/mutex.hpp"

namespace vlc::mutex {

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::Request: return "Request";
    case MsgKind::Reply: return "Reply";
    case MsgKind::Release: return "Release";
    case MsgKind::Query: return "Query";
    case MsgKind::Ack: return "Ack";
  }
  return "?";
}

Bytes encode_msg(const Msg& m) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(m.kind));
  w.var8(std::span<const uint8_t>(m.sender.bytes));
  write_vlc(w, m.clock);
  if (m.kind == MsgKind::Reply) {
    w.u32(static_cast<uint32_t>(m.reply_clocks.size()));
    for (const ReplyEntry& e : m.reply_clocks) {
      w.var8(std::span<const uint8_t>(e.requester.bytes));
      w.raw(serialize(e.clock));
    }
  }
  return w.take();
}

static Msg read_msg(ByteReader& r) {
  Msg m;
  uint8_t k = r.u8();
  if (k < 1 || k > 5) throw WireError("bad mutex message kind");
  m.kind = static_cast<MsgKind>(k);
  Bytes idb = r.var8();
  if (idb.empty()) throw WireError("empty sender");
  m.sender = EntityId(std::move(idb));
  m.clock = read_vlc(r);
  if (m.kind == MsgKind::Reply) {
    uint32_t n = r.u32();
    if (n > 4096) throw WireError("oversized reply list");
    for (uint32_t i = 0; i < n; ++i) {
      ReplyEntry e;
      Bytes rq = r.var8();
      if (rq.empty()) throw WireError("empty requester in reply list");
      e.requester = EntityId(std::move(rq));
      e.clock = read_clock(r);
      m.reply_clocks.push_back(std::move(e));
    }
  }
  return m;
}

Msg decode_msg(std::span<const uint8_t> data) {
  ByteReader r(data);
  Msg m = read_msg(r);
  r.expect_done();
  return m;
}

Bytes encode_proof(const AcquisitionProof& p) {
  ByteWriter w;
  w.var32(encode_msg(p.request));
  w.u32(static_cast<uint32_t>(p.support.size()));
  for (const auto& [id, msg] : p.support) {
    w.var8(std::span<const uint8_t>(id.bytes));
    w.var32(encode_msg(msg));
  }
  return w.take();
}

AcquisitionProof decode_proof(std::span<const uint8_t> data) {
  ByteReader r(data);
  AcquisitionProof p;
  p.request = decode_msg(r.var32());
  uint32_t n = r.u32();
  if (n > 4096) throw WireError("oversized proof");
  for (uint32_t i = 0; i < n; ++i) {
    Bytes idb = r.var8();
    if (idb.empty()) throw WireError("empty proof slot id");
    EntityId id(std::move(idb));
    Msg m = decode_msg(r.var32());
    if (!p.support.emplace(id, std::move(m)).second) throw WireError("duplicate proof slot");
  }
  r.expect_done();
  return p;
}

bool check_acquisition(const Deployment& dep, const std::vector<EntityId>& roster,
                       const AcquisitionProof& proof, std::string* why) {
  auto fail = [&](const std::string& reason) {
    if (why != nullptr) *why = reason;
    return false;
  };

  if (proof.request.kind != MsgKind::Request) return fail("proof core is not a Request");
  const EntityId& holder = proof.request.sender;
  if (std::find(roster.begin(), roster.end(), holder) == roster.end())
    return fail("requester not in roster");
  if (!dep.verify(proof.request.clock)) return fail("request clock does not verify");
  const ClockValue& c_req = proof.request.clock.value;

  for (const EntityId& q : roster) {
    if (q == holder) continue;
    auto it = proof.support.find(q);
    if (it == proof.support.end()) return fail("missing support from " + q.printable());
    const Msg& m = it->second;
    if (m.sender != q) return fail("support slot sender mismatch for " + q.printable());
    if (!dep.verify(m.clock)) return fail("support clock does not verify: " + q.printable());
    if (m.kind == MsgKind::Reply) {
      if (compare(c_req, m.clock.value) != Ordering4::BF)
        return fail("reply from " + q.printable() + " not ordered after the request");
    } else if (m.kind == MsgKind::Release) {
      if (!total_less(c_req, m.clock.value))
        return fail("release from " + q.printable() + " not totally ordered after the request");
    } else {
      return fail("support slot is neither Reply nor Release");
    }
  }

  // Every request listed in a Reply must be covered by a Release from
  // its owner, ordered after the listed request clock.
  for (const auto& [q, m] : proof.support) {
    if (m.kind != MsgKind::Reply) continue;
    for (const ReplyEntry& e : m.reply_clocks) {
      if (e.requester == holder) {
        // the holder cannot vouch for itself with a Release
        return fail("reply from " + q.printable() + " lists an uncovered request of the holder");
      }
      auto slot = proof.support.find(e.requester);
      if (slot == proof.support.end() || slot->second.kind != MsgKind::Release)
        return fail("listed request from " + e.requester.printable() +
                    " lacks a Release in the proof");
      if (compare(e.clock, slot->second.clock.value) != Ordering4::BF)
        return fail("release from " + e.requester.printable() +
                    " not ordered after its listed request");
    }
  }
  return true;
}

MutexProcess::MutexProcess(EntityId self, crypto::KeyPair key, ProofService& svc, Options opt)
    : self_(std::move(self)), key_(key), svc_(svc), opt_(opt) {}

void MutexProcess::on_start(sim::Context& ctx) {
  if (opt_.contend) ctx.set_timer(opt_.request_at, kTimerRequest);
}

void MutexProcess::arm_retry(sim::Context& ctx) {
  if (retry_armed_) return;
  retry_armed_ = true;
  if (retry_interval_ == 0) retry_interval_ = opt_.retry_every;
  ctx.set_timer(retry_interval_, kTimerRetry);
  if (retry_interval_ < opt_.retry_every * 8) retry_interval_ *= 2;
}

bool MutexProcess::advance_local(sim::Context& ctx, const Vlc& received) {
  auto next = svc_.prove_update(self_, key_, local_, {received});
  if (!next) {
    ctx.log("prove-failed", {{"reason", to_string(next.code())}});
    return false;
  }
  local_ = next.take();
  return true;
}

void MutexProcess::send_msg(sim::Context& ctx, const EntityId& dst, MsgKind kind,
                            std::vector<ReplyEntry> entries) {
  Msg m;
  m.kind = kind;
  m.sender = self_;
  m.clock = local_;
  m.reply_clocks = std::move(entries);
  ctx.send(dst, encode_msg(m));
}

void MutexProcess::broadcast_msg(sim::Context& ctx, MsgKind kind) {
  Msg m;
  m.kind = kind;
  m.sender = self_;
  m.clock = local_;
  Bytes raw = encode_msg(m);
  if (kind == MsgKind::Request) {
    pending_ = m;
    pending_raw_ = raw;
  } else if (kind == MsgKind::Release) {
    release_raw_ = raw;
    last_release_[self_] = m;
  }
  for (const EntityId& dst : ctx.roster())
    if (dst != self_) ctx.send(dst, raw);
}

void MutexProcess::do_request(sim::Context& ctx) {
  if (pending_.has_value() || holding_) {
    ctx.log("request-rejected", {{"reason", "already pending"}});
    return;
  }
  auto fresh = svc_.prove_update(self_, key_, local_, {});
  if (!fresh) {
    ctx.log("request-rejected", {{"reason", to_string(fresh.code())}});
    return;
  }
  local_ = fresh.take();
  queue_[self_] = QueueEntry{local_.value, true, true};
  broadcast_msg(ctx, MsgKind::Request);
  ctx.log("request", {{"clock", to_hex(serialize(local_.value))}});
  arm_retry(ctx);
  try_acquire(ctx);
}

void MutexProcess::do_release(sim::Context& ctx) {
  if (!holding_) return;
  auto fresh = svc_.prove_update(self_, key_, local_, {});
  if (!fresh) {
    ctx.log("prove-failed", {{"reason", to_string(fresh.code())}});
    return;
  }
  local_ = fresh.take();
  queue_.erase(self_);
  holding_ = false;
  pending_.reset();
  pending_raw_.clear();
  replies_.clear();
  ++grants_done_;
  broadcast_msg(ctx, MsgKind::Release);
  release_rebroadcasts_left_ = opt_.release_rebroadcasts;
  retry_interval_ = 0;
  ctx.log("release", {{"clock", to_hex(serialize(local_.value))}});
  if (release_rebroadcasts_left_ > 0) arm_retry(ctx);
}

void MutexProcess::handle_request(sim::Context& ctx, const Msg& m) {
  const ClockValue& c_r = m.clock.value;
  if (auto rel = last_release_.find(m.sender); rel != last_release_.end()) {
    if (compare(rel->second.clock.value, c_r) != Ordering4::BF) {
      ctx.log("request-ignored", {{"from", sim::id_to_json(m.sender)},
                                  {"reason", "not ordered after release"}});
      return;
    }
  }
  auto it = queue_.find(m.sender);
  if (it != queue_.end()) {
    if (it->second.clock == c_r) {
      it->second.direct = true;  // a retransmit or confirmation of a learned entry
    } else {
      // one request per requester until released
      ctx.log("request-ignored",
              {{"from", sim::id_to_json(m.sender)}, {"reason", "already queued"}});
      return;
    }
  } else {
    queue_[m.sender] = QueueEntry{c_r, true, false};
  }
  eval_owed_replies(ctx, true);
}

void MutexProcess::handle_reply(const Msg& m) {
  if (!pending_.has_value()) return;
  const ClockValue& own = pending_->clock.value;
  if (compare(own, m.clock.value) != Ordering4::BF) return;  // reply to an older request
  replies_[m.sender] = m;
  for (const ReplyEntry& e : m.reply_clocks) {
    if (e.requester == self_) continue;
    if (queue_.contains(e.requester)) continue;
    if (auto rel = last_release_.find(e.requester); rel != last_release_.end()) {
      if (compare(e.clock, rel->second.clock.value) == Ordering4::BF)
        continue;  // that request was already released
    }
    queue_[e.requester] = QueueEntry{e.clock, false, false};
  }
}

void MutexProcess::handle_release(sim::Context& ctx, const Msg& m) {
  auto it = queue_.find(m.sender);
  if (it != queue_.end()) {
    if (compare(it->second.clock, m.clock.value) != Ordering4::BF) {
      ctx.log("release-ignored", {{"from", sim::id_to_json(m.sender)},
                                  {"reason", "not ordered after queued request"}});
      return;
    }
    queue_.erase(it);
  }
  auto rel = last_release_.find(m.sender);
  if (rel == last_release_.end() || total_less(rel->second.clock.value, m.clock.value))
    last_release_[m.sender] = m;
}

void MutexProcess::maybe_query(sim::Context& ctx, const EntityId& q) {
  // one Ack refreshes our view of q for every queued request at once, so
  // queries are deduplicated per peer with a cooldown
  auto it = last_query_at_.find(q);
  if (it != last_query_at_.end() && ctx.now() - it->second < opt_.retry_every) return;
  last_query_at_[q] = ctx.now();
  send_msg(ctx, q, MsgKind::Query);
}

void MutexProcess::eval_owed_replies(sim::Context& ctx, bool send_queries) {
  std::set<EntityId> to_query;
  for (auto& [requester, entry] : queue_) {
    if (requester == self_ || !entry.direct || entry.replied) continue;
    std::vector<EntityId> unsatisfied;
    for (const EntityId& q : ctx.roster()) {
      if (q == self_ || q == requester) continue;
      if (queue_.contains(q)) continue;
      auto known = latest_.find(q);
      if (known != latest_.end() && compare(entry.clock, known->second) == Ordering4::BF)
        continue;
      unsatisfied.push_back(q);
    }
    if (unsatisfied.empty()) {
      std::vector<ReplyEntry> listed;
      for (const auto& [x, xe] : queue_) {
        if (x != requester && total_less(xe.clock, entry.clock))
          listed.push_back(ReplyEntry{x, xe.clock});
      }
      send_msg(ctx, requester, MsgKind::Reply, std::move(listed));
      entry.replied = true;
    } else if (send_queries) {
      if (ctx.now() < entry.queued_at + opt_.query_grace) {
        ctx.set_timer(entry.queued_at + opt_.query_grace - ctx.now(), kTimerGrace);
      } else {
        to_query.insert(unsatisfied.begin(), unsatisfied.end());
        arm_retry(ctx);
      }
    }
  }
  for (const EntityId& q : to_query) maybe_query(ctx, q);
}

MutexProcess::AcquireBlock MutexProcess::try_acquire(sim::Context& ctx) {
  AcquireBlock block;
  if (!pending_.has_value() || holding_) return block;
  const ClockValue& own = pending_->clock.value;
  for (const auto& [x, e] : queue_) {
    if (x != self_ && total_less(e.clock, own)) {
      block.order_blocked = true;  // a smaller request goes first
      return block;
    }
  }
  for (const EntityId& q : ctx.roster()) {
    if (q == self_) continue;
    auto known = latest_.find(q);
    if (known == latest_.end() || compare(own, known->second) != Ordering4::BF)
      block.query.push_back(q);
  }

  AcquisitionProof proof;
  proof.request = *pending_;
  for (const EntityId& q : ctx.roster()) {
    if (q == self_) continue;
    auto rel = last_release_.find(q);
    if (rel != last_release_.end() && total_less(own, rel->second.clock.value)) {
      proof.support[q] = rel->second;
      continue;
    }
    auto rep = replies_.find(q);
    if (rep == replies_.end()) {
      block.resend_request.push_back(q);
      continue;
    }
    proof.support[q] = rep->second;
  }
  if (!block.query.empty() || !block.resend_request.empty()) return block;

  std::string why;
  std::vector<EntityId> roster = ctx.roster();
  if (!check_acquisition(svc_.deployment(), roster, proof, &why)) {
    // a listed request lacks a usable Release: chase fresh replies from
    // the repliers whose lists still carry it
    for (const auto& [q, m] : proof.support) {
      if (m.kind != MsgKind::Reply) continue;
      for (const ReplyEntry& e : m.reply_clocks) {
        auto rel = last_release_.find(e.requester);
        if (rel == last_release_.end() || !total_less(own, rel->second.clock.value))
          block.resend_request.push_back(q);
      }
    }
    return block;
  }

  holding_ = true;
  last_proof_ = proof;
  retry_interval_ = 0;
  ctx.log("grant", {{"request_clock", to_hex(serialize(own))},
                    {"proof", to_hex(encode_proof(proof))}});
  ctx.set_timer(opt_.hold_ticks, kTimerRelease);
  block.granted = true;
  return block;
}

void MutexProcess::on_message(sim::Context& ctx, const EntityId&, const Bytes& raw) {
  Msg m;
  try {
    m = decode_msg(raw);
  } catch (const WireError& e) {
    ctx.log("malformed", {{"what", e.what()}});
    return;
  }
  auto digest = crypto::sha256(raw);
  if (seen_.contains(digest)) {
    // retransmitted Request: re-elicit our Reply with current queue state
    if (m.kind == MsgKind::Request) {
      auto it = queue_.find(m.sender);
      if (it != queue_.end() && it->second.clock == m.clock.value && it->second.replied) {
        it->second.replied = false;
        eval_owed_replies(ctx, true);
      }
    }
    return;
  }
  seen_.insert(digest);

  if (!svc_.verify(m.clock)) {
    ctx.log("invalid-clock", {{"from", sim::id_to_json(m.sender)},
                              {"kind", to_string(m.kind)}});
    return;
  }
  if (!advance_local(ctx, m.clock)) return;
  auto known = latest_.find(m.sender);
  if (known == latest_.end() || compare(known->second, m.clock.value) == Ordering4::BF)
    latest_[m.sender] = m.clock.value;

  switch (m.kind) {
    case MsgKind::Request: handle_request(ctx, m); break;
    case MsgKind::Reply: handle_reply(m); break;
    case MsgKind::Release: handle_release(ctx, m); break;
    case MsgKind::Query: send_msg(ctx, m.sender, MsgKind::Ack); break;
    case MsgKind::Ack: break;
  }
  eval_owed_replies(ctx, false);
  try_acquire(ctx);
}

void MutexProcess::on_timer(sim::Context& ctx, uint64_t timer_id) {
  switch (timer_id) {
    case kTimerRequest:
      do_request(ctx);
      break;
    case kTimerRelease:
      do_release(ctx);
      break;
    case kTimerGrace:
      eval_owed_replies(ctx, true);
      break;
    case kTimerRetry: {
      retry_armed_ = false;
      bool more = false;
      if (pending_.has_value() && !holding_) {
        // targeted chase: only peers that can actually unblock us
        AcquireBlock block = try_acquire(ctx);
        if (!block.granted) {
          std::set<EntityId> resend(block.resend_request.begin(), block.resend_request.end());
          for (const EntityId& q : resend) ctx.send(q, pending_raw_);
          for (const EntityId& q : block.query)
            if (!resend.contains(q)) maybe_query(ctx, q);
          more = true;  // keep the (backed-off) timer alive while pending
        }
      }
      if (release_rebroadcasts_left_ > 0) {
        --release_rebroadcasts_left_;
        for (const EntityId& dst : ctx.roster())
          if (dst != self_) ctx.send(dst, release_raw_);
        more = more || release_rebroadcasts_left_ > 0;
      }
      eval_owed_replies(ctx, true);
      for (const auto& [requester, entry] : queue_) {
        if (requester != self_ && entry.direct && !entry.replied) more = true;
      }
      if (more) arm_retry(ctx);
      break;
    }
    default:
      break;
  }
}

}  // namespace vlc::mutex
