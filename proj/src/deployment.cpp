#include "vlc/deployment.hpp"

#include <cstring>

namespace vlc {

const char* to_string(BackendKind b) {
  switch (b) {
    case BackendKind::Quorum: return "quorum";
    case BackendKind::Attested: return "attested";
  }
  return "?";
}

bool check_cert(const QuorumConfig& cfg, const QuorumCert& cert, const ClockValue& value) {
  if (cert.sigs.size() < cfg.threshold(cert.kind)) return false;
  if (cert.value_hash != crypto::sha256(serialize(value))) return false;
  auto payload = qc_sign_payload(cert.kind, value);
  for (const auto& [node, sig] : cert.sigs) {
    auto it = cfg.registry.find(node);
    if (it == cfg.registry.end()) return false;
    if (!crypto::verify(payload, sig, it->second)) return false;
  }
  return true;
}

bool attested_check(const AttestedConfig& cfg, const AttestedCert& cert, const ClockValue& value) {
  if (cert.sigs.size() < cfg.threshold(cert.kind)) return false;
  if (cert.measurement != cfg.expected_measurement) return false;
  if (cert.user_data != crypto::sha256(serialize(value))) return false;
  auto payload = attest_sign_payload(cert.kind, cert.measurement, cert.user_data);
  for (const auto& [signer, sig] : cert.sigs) {
    auto it = cfg.roots.find(signer);
    if (it == cfg.roots.end()) return false;
    if (!crypto::verify(payload, sig, it->second)) return false;
  }
  return true;
}

bool Deployment::verify(const Vlc& c) const {
  if (c.value.empty()) return true;  // genesis carries no claims
  auto digest = vlc_digest(c);
  {
    std::lock_guard lk(cache_mu_);
    if (auto it = cache_.find(digest); it != cache_.end()) return it->second;
  }
  bool ok = verify_uncached(c);
  std::lock_guard lk(cache_mu_);
  if (cache_.size() > 1u << 20) cache_.clear();
  cache_.emplace(digest, ok);
  return ok;
}

bool Deployment::verify_uncached(const Vlc& c) const {
  for (FrontendKind kind : kinds) {
    auto it = c.proofs.find(kind);
    if (it == c.proofs.end()) return false;
    switch (backend) {
      case BackendKind::Quorum: {
        const auto* qc = std::get_if<QuorumCert>(&it->second);
        if (qc == nullptr || qc->kind != kind) return false;
        if (!check_cert(quorum, *qc, c.value)) return false;
        break;
      }
      case BackendKind::Attested: {
        const auto* at = std::get_if<AttestedCert>(&it->second);
        if (at == nullptr || at->kind != kind) return false;
        if (!attested_check(attested, *at, c.value)) return false;
        break;
      }
    }
  }
  return true;
}

InputVerify Deployment::input_verify() const {
  InputVerify v;
  v.strict = [this](const Vlc& c) { return verify(c); };
  if (allow_unproven_merged) {
    v.merged = [this](const Vlc& c) { return c.proofs.empty() || verify(c); };
  }
  return v;
}

SignedUpdate SignedUpdate::make(const Deployment& dep, const EntityId& id,
                                const crypto::KeyPair& invoker, Vlc base,
                                std::vector<Vlc> merged, Bytes aux) {
  SignedUpdate out;
  for (FrontendKind kind : dep.kinds)
    out.requests.emplace(kind, make_request(kind, id, invoker, base, merged, aux));
  return out;
}

Result<Vlc> ProofService::prove_update(const EntityId& id, const crypto::KeyPair& invoker,
                                       Vlc base, std::vector<Vlc> merged, Bytes aux) {
  auto update = SignedUpdate::make(deployment(), id, invoker, std::move(base), std::move(merged),
                                   std::move(aux));
  return prove(update);
}

}  // namespace vlc
