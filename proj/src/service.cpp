#include "vlc/service.hpp"

namespace vlc {

crypto::KeyPair derive_keypair(std::string_view role, uint64_t seed, uint64_t index) {
  ByteWriter w;
  w.tag("CHRONO/KEY/");
  w.tag(role);
  w.u64(seed);
  w.u64(index);
  auto d = crypto::sha256(w.bytes());
  return crypto::KeyPair::from_seed(d);
}

static EntityId node_name(std::string_view prefix, uint32_t i) {
  std::string s(prefix);
  s += std::to_string(i);
  return EntityId(s);
}

Deployment make_deployment(const LocalBackendOptions& opt) {
  Deployment dep;
  dep.kinds = opt.kinds;
  dep.backend = opt.backend;
  dep.allow_unproven_merged = opt.allow_unproven_merged;
  if (opt.backend == BackendKind::Quorum) {
    dep.quorum.n = opt.n;
    dep.quorum.f = opt.f;
    for (uint32_t i = 0; i < opt.n; ++i)
      dep.quorum.registry.emplace(node_name("qn", i), derive_keypair("qnode", opt.seed, i).pub);
  } else {
    dep.attested.n = opt.n;
    dep.attested.expected_measurement = compute_measurement(opt.measurement_version, opt.kinds);
    for (uint32_t i = 0; i < opt.n; ++i)
      dep.attested.roots.emplace(node_name("att", i), derive_keypair("attest", opt.seed, i).pub);
  }
  return dep;
}

std::unique_ptr<LocalQuorumService> make_local_quorum(const LocalBackendOptions& opt) {
  Deployment dep = make_deployment(opt);
  std::vector<std::unique_ptr<QuorumNode>> nodes;
  for (uint32_t i = 0; i < opt.n; ++i) {
    nodes.push_back(std::make_unique<QuorumNode>(
        node_name("qn", i), derive_keypair("qnode", opt.seed, i), opt.perms, opt.app));
  }
  return std::make_unique<LocalQuorumService>(std::move(dep), std::move(nodes));
}

std::unique_ptr<LocalAttestedService> make_local_attested(const LocalBackendOptions& opt) {
  Deployment dep = make_deployment(opt);
  auto measurement = dep.attested.expected_measurement;
  std::vector<std::unique_ptr<AttestedSigner>> signers;
  for (uint32_t i = 0; i < opt.n; ++i) {
    signers.push_back(std::make_unique<AttestedSigner>(
        node_name("att", i), derive_keypair("attest", opt.seed, i), measurement, opt.perms,
        opt.app));
  }
  return std::make_unique<LocalAttestedService>(std::move(dep), std::move(signers));
}

std::unique_ptr<ProofService> make_local_service(const LocalBackendOptions& opt) {
  if (opt.backend == BackendKind::Quorum) return make_local_quorum(opt);
  return make_local_attested(opt);
}

}  // namespace vlc
