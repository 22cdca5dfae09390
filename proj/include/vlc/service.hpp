#pragma once

#include "vlc/attested.hpp"

namespace vlc {

/// Deterministic key derivation for seeded configs and tests.
crypto::KeyPair derive_keypair(std::string_view role, uint64_t seed, uint64_t index);

/// Knobs for an in-process backend deployment.
struct LocalBackendOptions {
  BackendKind backend = BackendKind::Quorum;
  uint32_t n = 4;
  uint32_t f = 1;
  std::set<FrontendKind> kinds{FrontendKind::Update};
  uint64_t seed = 1;
  PermissionTable perms;
  AppPredicate app;
  bool allow_unproven_merged = false;
  std::string measurement_version = "chrono-validator-1.0";
};

/// Deployment config (the verifier half) for the given options.
Deployment make_deployment(const LocalBackendOptions& opt);

/// Deployment plus in-process nodes/signers (the prover half).
std::unique_ptr<ProofService> make_local_service(const LocalBackendOptions& opt);

std::unique_ptr<LocalQuorumService> make_local_quorum(const LocalBackendOptions& opt);
std::unique_ptr<LocalAttestedService> make_local_attested(const LocalBackendOptions& opt);

}  // namespace vlc
