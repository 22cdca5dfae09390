#include "vlc/quorum.hpp"

#include <algorithm>

namespace vlc {

const char* to_string(FaultMode m) {
  switch (m) {
    case FaultMode::Honest: return "honest";
    case FaultMode::Silent: return "silent";
    case FaultMode::WrongValue: return "wrong-value";
    case FaultMode::Equivocate: return "equivocate";
    case FaultMode::StaleState: return "stale-state";
  }
  return "?";
}

QuorumNode::QuorumNode(EntityId id, crypto::KeyPair key, PermissionTable perms, AppPredicate app)
    : id_(std::move(id)), key_(key), perms_(std::move(perms)), app_(std::move(app)) {}

std::optional<Result<PartialSig>> QuorumNode::prove(const ProveRequest& req,
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
        // Byzantine: ignores its mono table entirely.
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
  if (!out) return Result<PartialSig>(out.error());

  ClockValue value = out.take();
  if (fault == FaultMode::WrongValue) {
    value.set(req.id, value.get(req.id) + 1);
  } else if (fault == FaultMode::Equivocate) {
    // Different forged clocks for different invokers.
    value.set(req.id, value.get(req.id) + 1 + (req.invoker[0] & 1));
  }
  PartialSig ps;
  ps.node_id = id_;
  ps.value = value;
  ps.sig = crypto::sign(qc_sign_payload(req.kind, value), key_.sec);
  return Result<PartialSig>(std::move(ps));
}

Result<QuorumProveResult> client_prove(const QuorumConfig& cfg,
                                       std::span<QuorumNode* const> nodes,
                                       const ProveRequest& req, const Deployment& dep) {
  const uint32_t t = cfg.threshold(req.kind);
  if (t == 0 || nodes.empty()) return Rejection{Reject::InsufficientQuorum, "no nodes"};

  // Replies grouped by canonical output clock; only signatures that
  // verify under the registry key are counted.
  std::map<Bytes, std::vector<PartialSig>> groups;
  std::map<Reject, uint32_t> rejections;
  size_t contacted = 0;
  size_t target = std::min<size_t>(t, nodes.size());

  while (true) {
    for (; contacted < target; ++contacted) {
      QuorumNode* node = nodes[contacted];
      auto reply = node->prove(req, dep);
      if (!reply.has_value()) continue;  // timeout, widen later
      if (!reply->ok()) {
        rejections[reply->code()]++;
        continue;
      }
      PartialSig ps = reply->take();
      auto reg = cfg.registry.find(ps.node_id);
      if (reg == cfg.registry.end()) continue;
      if (!crypto::verify(qc_sign_payload(req.kind, ps.value), ps.sig, reg->second)) continue;
      groups[serialize(ps.value)].push_back(std::move(ps));
    }
    for (auto& [value_bytes, sigs] : groups) {
      if (sigs.size() >= t) {
        QuorumProveResult out;
        out.value = deserialize_clock(value_bytes);
        out.cert.kind = req.kind;
        out.cert.value_hash = crypto::sha256(value_bytes);
        for (const PartialSig& ps : sigs) out.cert.sigs.emplace(ps.node_id, ps.sig);
        return out;
      }
    }
    if (target >= nodes.size()) break;
    ++target;  // widen one node at a time
  }

  // Surface the dominant rejection when nodes answered with one; this is
  // how e.g. a mono StaleBase becomes visible to the caller.
  if (!rejections.empty()) {
    auto best = std::max_element(rejections.begin(), rejections.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    return Rejection{best->first, std::string("quorum rejected: ") + to_string(best->first) +
                                      " from " + std::to_string(best->second) + " nodes"};
  }
  return Rejection{Reject::InsufficientQuorum, "fewer than t matching replies"};
}

LocalQuorumService::LocalQuorumService(Deployment dep,
                                       std::vector<std::unique_ptr<QuorumNode>> nodes)
    : dep_(std::move(dep)), nodes_(std::move(nodes)) {
  for (auto& n : nodes_) order_.push_back(n.get());
}

Result<Vlc> LocalQuorumService::prove(const SignedUpdate& update) {
  Vlc out;
  bool first = true;
  // Mono goes last: it is the only stateful frontend, and a rejection
  // from a later kind must not leave node mono counters advanced.
  for (FrontendKind kind : {FrontendKind::Update, FrontendKind::App, FrontendKind::Mono}) {
    auto it = update.requests.find(kind);
    if (it == update.requests.end()) continue;
    auto r = client_prove(dep_.quorum, order_, it->second, dep_);
    if (!r) return r.error();
    QuorumProveResult got = r.take();
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
