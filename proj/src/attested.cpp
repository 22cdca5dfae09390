#include "vlc/attested.hpp"

namespace vlc {

AttestedSigner::AttestedSigner(EntityId id, crypto::KeyPair key, crypto::Digest measurement,
                               PermissionTable perms, AppPredicate app)
    : id_(std::move(id)),
      key_(key),
      measurement_(measurement),
      perms_(std::move(perms)),
      app_(std::move(app)) {}

std::optional<Result<AttestedDoc>> AttestedSigner::prove(const ProveRequest& req,
                                                         const Deployment& dep) {
  if (fault == FaultMode::Silent) return std::nullopt;

  InputVerify verify = dep.input_verify();
  Result<ClockValue> out(Reject::InvalidInputClock);
  switch (req.kind) {
    case FrontendKind::Update:
      out = frontend_update(req, perms_, verify);
      break;
    case FrontendKind::Mono:
      if (fault == FaultMode::StaleState) {
        MonoState scratch;
        out = frontend_mono(req, perms_, scratch, verify);
      } else {
        out = frontend_mono(req, perms_, mono, verify);
      }
      break;
    case FrontendKind::App:
      out = frontend_app(req, app_, verify);
      break;
  }
  if (!out) return Result<AttestedDoc>(out.error());

  ClockValue value = out.take();
  if (fault == FaultMode::WrongValue) value.set(req.id, value.get(req.id) + 1);

  AttestedDoc doc;
  doc.signer = id_;
  doc.measurement = measurement_;
  doc.user_data = crypto::sha256(serialize(value));
  doc.value = value;
  doc.sig = crypto::sign(attest_sign_payload(req.kind, doc.measurement, doc.user_data), key_.sec);
  return Result<AttestedDoc>(std::move(doc));
}

crypto::Digest compute_measurement(std::string_view version,
                                   const std::set<FrontendKind>& kinds) {
  ByteWriter w;
  w.tag("CHRONO/MEASURE/");
  w.tag(version);
  for (FrontendKind k : kinds) w.u8(static_cast<uint8_t>(k));
  return crypto::sha256(w.bytes());
}

Result<AttestedProveResult> attested_prove(const AttestedConfig& cfg,
                                           std::span<AttestedSigner* const> signers,
                                           const ProveRequest& req, const Deployment& dep) {
  const uint32_t t = cfg.threshold(req.kind);
  if (t == 0 || signers.empty()) return Rejection{Reject::InsufficientQuorum, "no signers"};

  std::map<Bytes, std::vector<AttestedDoc>> groups;
  std::map<Reject, uint32_t> rejections;
  size_t contacted = 0;
  size_t target = std::min<size_t>(t, signers.size());

  while (true) {
    for (; contacted < target; ++contacted) {
      auto reply = signers[contacted]->prove(req, dep);
      if (!reply.has_value()) continue;
      if (!reply->ok()) {
        rejections[reply->code()]++;
        continue;
      }
      AttestedDoc doc = reply->take();
      if (doc.measurement != cfg.expected_measurement) continue;
      auto root = cfg.roots.find(doc.signer);
      if (root == cfg.roots.end()) continue;
      if (!crypto::verify(attest_sign_payload(req.kind, doc.measurement, doc.user_data), doc.sig,
                          root->second))
        continue;
      groups[serialize(doc.value)].push_back(std::move(doc));
    }
    for (auto& [value_bytes, docs] : groups) {
      if (docs.size() >= t) {
        AttestedProveResult out;
        out.value = deserialize_clock(value_bytes);
        out.cert.kind = req.kind;
        out.cert.measurement = cfg.expected_measurement;
        out.cert.user_data = crypto::sha256(value_bytes);
        for (const AttestedDoc& d : docs) out.cert.sigs.emplace(d.signer, d.sig);
        return out;
      }
    }
    if (target >= signers.size()) break;
    ++target;
  }

  if (!rejections.empty()) {
    auto best = std::max_element(rejections.begin(), rejections.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    return Rejection{best->first, std::string("attested rejected: ") + to_string(best->first)};
  }
  return Rejection{Reject::InsufficientQuorum, "fewer than required matching documents"};
}

LocalAttestedService::LocalAttestedService(Deployment dep,
                                           std::vector<std::unique_ptr<AttestedSigner>> signers)
    : dep_(std::move(dep)), signers_(std::move(signers)) {
  for (auto& s : signers_) order_.push_back(s.get());
}

Result<Vlc> LocalAttestedService::prove(const SignedUpdate& update) {
  Vlc out;
  bool first = true;
  for (FrontendKind kind : {FrontendKind::Update, FrontendKind::App, FrontendKind::Mono}) {
    auto it = update.requests.find(kind);
    if (it == update.requests.end()) continue;
    auto r = attested_prove(dep_.attested, order_, it->second, dep_);
    if (!r) return r.error();
    AttestedProveResult got = r.take();
    if (first) {
      out.value = got.value;
      first = false;
    } else if (!(out.value == got.value)) {
      return Rejection{Reject::InsufficientQuorum, "kinds disagreed on output value"};
    }
    out.proofs.emplace(kind, std::move(got.cert));
  }
  return out;
}

}  // namespace vlc
