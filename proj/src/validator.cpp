#include "vlc/validator.hpp"

namespace vlc {

crypto::Digest request_sign_digest(const ProveRequest& req) {
  ByteWriter w;
  w.tag("CHRONO/REQ/v1");
  w.u8(static_cast<uint8_t>(req.kind));
  w.var8(std::span<const uint8_t>(req.id.bytes));
  w.raw(serialize(req.base.value));
  w.u32(static_cast<uint32_t>(req.merged.size()));
  for (const Vlc& m : req.merged) w.raw(serialize(m.value));
  return crypto::sha256(w.bytes());
}

ProveRequest make_request(FrontendKind kind, const EntityId& id, const crypto::KeyPair& invoker,
                          Vlc base, std::vector<Vlc> merged, Bytes aux) {
  ProveRequest req;
  req.kind = kind;
  req.id = id;
  req.base = std::move(base);
  req.merged = std::move(merged);
  req.aux = std::move(aux);
  req.invoker = invoker.pub;
  auto digest = request_sign_digest(req);
  req.invoker_sig = crypto::sign(digest, invoker.sec);
  return req;
}

ClockValue request_output(const ProveRequest& req) {
  std::vector<ClockValue> values;
  values.reserve(req.merged.size());
  for (const Vlc& m : req.merged) values.push_back(m.value);
  return update_value(req.id, req.base.value, values);
}

void write_request(ByteWriter& w, const ProveRequest& req) {
  w.u8(static_cast<uint8_t>(req.kind));
  w.var8(std::span<const uint8_t>(req.id.bytes));
  write_vlc(w, req.base);
  w.u32(static_cast<uint32_t>(req.merged.size()));
  for (const Vlc& m : req.merged) write_vlc(w, m);
  w.var32(std::span<const uint8_t>(req.aux));
  w.raw(std::span<const uint8_t>(req.invoker));
  w.raw(std::span<const uint8_t>(req.invoker_sig));
}

ProveRequest read_request(ByteReader& r) {
  ProveRequest req;
  uint8_t k = r.u8();
  if (k > 2) throw WireError("bad frontend kind");
  req.kind = static_cast<FrontendKind>(k);
  Bytes idb = r.var8();
  if (idb.empty()) throw WireError("empty id");
  req.id = EntityId(std::move(idb));
  req.base = read_vlc(r);
  uint32_t n = r.u32();
  if (n > 4096) throw WireError("too many merged clocks");
  req.merged.reserve(n);
  for (uint32_t i = 0; i < n; ++i) req.merged.push_back(read_vlc(r));
  req.aux = r.var32();
  auto pk = r.raw(req.invoker.size());
  std::copy(pk.begin(), pk.end(), req.invoker.begin());
  auto sig = r.raw(req.invoker_sig.size());
  std::copy(sig.begin(), sig.end(), req.invoker_sig.begin());
  return req;
}

Bytes serialize(const ProveRequest& req) {
  ByteWriter w;
  write_request(w, req);
  return w.take();
}

ProveRequest deserialize_request(std::span<const uint8_t> data) {
  ByteReader r(data);
  ProveRequest req = read_request(r);
  r.expect_done();
  return req;
}

static Result<void> check_inputs(const ProveRequest& req, const InputVerify& verify) {
  if (!verify.check_base(req.base))
    return Rejection{Reject::InvalidInputClock, "base clock failed verification"};
  for (size_t i = 0; i < req.merged.size(); ++i) {
    if (!verify.check_merged(req.merged[i]))
      return Rejection{Reject::InvalidInputClock,
                       "merged clock " + std::to_string(i) + " failed verification"};
  }
  return {};
}

static Result<void> check_invoker(const ProveRequest& req, const PermissionTable& perms) {
  auto keys = perms.lookup(req.id);
  if (!keys.contains(req.invoker))
    return Rejection{Reject::PermissionDenied,
                     "invoker key not permitted on id " + req.id.printable()};
  if (!crypto::verify(request_sign_digest(req), req.invoker_sig, req.invoker))
    return Rejection{Reject::BadSignature, "invoker signature invalid"};
  return {};
}

Result<ClockValue> frontend_update(const ProveRequest& req, const PermissionTable& perms,
                                   const InputVerify& verify) {
  if (req.kind != FrontendKind::Update)
    return Rejection{Reject::BadSignature, "request not typed for update frontend"};
  if (auto r = check_inputs(req, verify); !r) return r.error();
  if (auto r = check_invoker(req, perms); !r) return r.error();
  return request_output(req);
}

Result<ClockValue> frontend_mono(const ProveRequest& req, const PermissionTable& perms,
                                 MonoState& state, const InputVerify& verify) {
  if (req.kind != FrontendKind::Mono)
    return Rejection{Reject::BadSignature, "request not typed for mono frontend"};
  if (auto r = check_inputs(req, verify); !r) return r.error();
  if (auto r = check_invoker(req, perms); !r) return r.error();
  uint64_t issued = 0;
  if (auto it = state.find(req.id); it != state.end()) issued = it->second;
  uint64_t base_counter = req.base.value.get(req.id);
  if (base_counter < issued)
    return Rejection{Reject::StaleBase,
                     "base counter " + std::to_string(base_counter) + " below issued " +
                         std::to_string(issued)};
  ClockValue out = request_output(req);
  state[req.id] = base_counter + 1;
  return out;
}

Result<ClockValue> frontend_app(const ProveRequest& req, const AppPredicate& predicate,
                                const InputVerify& verify) {
  if (req.kind != FrontendKind::App)
    return Rejection{Reject::BadSignature, "request not typed for app frontend"};
  if (auto r = check_inputs(req, verify); !r) return r.error();
  if (!predicate) return Rejection{Reject::AppRuleViolation, "no application predicate installed"};
  if (auto r = predicate(req, req.aux); !r)
    return Rejection{Reject::AppRuleViolation, r.error().detail};
  return request_output(req);
}

}  // namespace vlc
