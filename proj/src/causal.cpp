#include "vlc/causal.hpp"

namespace vlc::causal {

Bytes encode_envelope(const CausalEnvelope& env) {
  ByteWriter w;
  w.var8(std::span<const uint8_t>(env.sender.bytes));
  write_vlc(w, env.clock);
  w.var32(std::span<const uint8_t>(env.payload));
  return w.take();
}

CausalEnvelope decode_envelope(std::span<const uint8_t> data) {
  ByteReader r(data);
  CausalEnvelope env;
  Bytes idb = r.var8();
  if (idb.empty()) throw WireError("empty sender id");
  env.sender = EntityId(std::move(idb));
  env.clock = read_vlc(r);
  env.payload = r.var32();
  r.expect_done();
  return env;
}

const char* to_string(Disposition d) {
  switch (d) {
    case Disposition::Deliver: return "deliver";
    case Disposition::InvalidProof: return "InvalidProof";
    case Disposition::Stale: return "Stale";
    case Disposition::Duplicate: return "Duplicate";
    case Disposition::ProveFailed: return "ProveFailed";
  }
  return "?";
}

CausalPeer::CausalPeer(EntityId self, crypto::KeyPair key, ProofService& svc)
    : self_(std::move(self)), key_(key), svc_(svc) {}

Result<CausalEnvelope> CausalPeer::egress(const Bytes& payload) {
  if (local_.value.empty() || attached_) {
    auto fresh = svc_.prove_update(self_, key_, local_, {});
    if (!fresh) return fresh.error();
    local_ = fresh.take();
  }
  attached_ = true;
  return CausalEnvelope{self_, local_, payload};
}

Disposition CausalPeer::ingress(const CausalEnvelope& env) {
  auto digest = crypto::sha256(encode_envelope(env));
  if (seen_.contains(digest)) return Disposition::Duplicate;
  seen_.insert(digest);
  if (!svc_.verify(env.clock)) return Disposition::InvalidProof;
  if (compare(env.clock.value, local_.value) == Ordering4::BF) return Disposition::Stale;
  auto merged = svc_.prove_update(self_, key_, local_, {env.clock});
  if (!merged) return Disposition::ProveFailed;
  local_ = merged.take();
  attached_ = false;
  return Disposition::Deliver;
}

CausalProcess::CausalProcess(EntityId self, crypto::KeyPair key, ProofService& svc,
                             CausalApp* app)
    : peer_(std::move(self), key, svc), app_(app) {}

bool CausalProcess::send_causal(sim::Context& ctx, const EntityId& dst, const Bytes& payload) {
  auto env = peer_.egress(payload);
  if (!env) {
    ctx.log("send-failed", {{"dst", sim::id_to_json(dst)},
                            {"reason", to_string(env.code())},
                            {"detail", env.error().detail}});
    return false;
  }
  ctx.log("send", {{"dst", sim::id_to_json(dst)},
                   {"payload", to_hex(payload)},
                   {"clock", to_hex(serialize(env.value().clock.value))}});
  ctx.send(dst, encode_envelope(env.value()));
  return true;
}

void CausalProcess::on_start(sim::Context& ctx) { app_->start(ctx); }

void CausalProcess::on_message(sim::Context& ctx, const EntityId& src, const Bytes& payload) {
  CausalEnvelope env;
  try {
    env = decode_envelope(payload);
  } catch (const WireError& e) {
    ctx.log("discard", {{"src", sim::id_to_json(src)}, {"reason", "Malformed"}, {"what", e.what()}});
    return;
  }
  Disposition d = peer_.ingress(env);
  if (d == Disposition::Deliver) {
    ctx.log("deliver", {{"src", sim::id_to_json(env.sender)},
                        {"payload", to_hex(env.payload)},
                        {"clock", to_hex(serialize(env.clock.value))}});
    app_->deliver(ctx, env.sender, env.payload);
  } else {
    ctx.log("discard", {{"src", sim::id_to_json(env.sender)},
                        {"payload", to_hex(env.payload)},
                        {"clock", to_hex(serialize(env.clock.value))},
                        {"reason", to_string(d)}});
  }
}

}  // namespace vlc::causal
