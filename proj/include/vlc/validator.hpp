#pragma once

#include <functional>
#include <set>

#include "vlc/proof.hpp"
#include "vlc/result.hpp"

namespace vlc {

/// Which public keys may invoke updates on an entity id. `exact` is the
/// table loaded from signed config; `fallback` serves open key spaces
/// (e.g. a store deriving key ownership from its partition map).
struct PermissionTable {
  std::map<EntityId, std::set<crypto::PublicKey>> exact;
  std::function<std::set<crypto::PublicKey>(const EntityId&)> fallback;

  std::set<crypto::PublicKey> lookup(const EntityId& id) const {
    auto it = exact.find(id);
    if (it != exact.end()) return it->second;
    if (fallback) return fallback(id);
    return {};
  }
};

/// Highest clock counter the monotonicity validator has issued per id.
using MonoState = std::map<EntityId, uint64_t>;

/// The signed inputs of one Update invocation, as sent to validators.
struct ProveRequest {
  FrontendKind kind = FrontendKind::Update;
  EntityId id;
  Vlc base;
  std::vector<Vlc> merged;
  Bytes aux;  // app frontend only
  crypto::PublicKey invoker{};
  crypto::Signature invoker_sig{};
};

/// What the invoker signs: domain tag, kind byte, id, canonical base and
/// merged clock values (proofs excluded).
crypto::Digest request_sign_digest(const ProveRequest& req);

ProveRequest make_request(FrontendKind kind, const EntityId& id, const crypto::KeyPair& invoker,
                          Vlc base, std::vector<Vlc> merged, Bytes aux = {});

/// The deterministic output clock of the requested update.
ClockValue request_output(const ProveRequest& req);

void write_request(ByteWriter& w, const ProveRequest& req);
ProveRequest read_request(ByteReader& r);
Bytes serialize(const ProveRequest& req);
ProveRequest deserialize_request(std::span<const uint8_t> data);

/// Input clock verification hooks, injected so frontends compose with
/// any backend's check. `merged` may relax the rule for deployments that
/// accept unproven merged inputs (vetted by the app frontend instead).
struct InputVerify {
  std::function<bool(const Vlc&)> strict;
  std::function<bool(const Vlc&)> merged;

  bool check_base(const Vlc& c) const { return strict(c); }
  bool check_merged(const Vlc& c) const { return merged ? merged(c) : strict(c); }
};

/// Pure application predicate: sees only the request and aux bytes.
/// Returns a rejection with detail when the rule is violated.
using AppPredicate = std::function<Result<void>(const ProveRequest&, const Bytes& aux)>;

/// Stateless check that the update is well-formed: inputs verify, the
/// invoker holds permission on id and signed the request.
Result<ClockValue> frontend_update(const ProveRequest& req, const PermissionTable& perms,
                                   const InputVerify& verify);

/// Update checks plus local-ordering enforcement: the base counter for
/// id must not regress below the highest issued counter. Bumps state on
/// success.
Result<ClockValue> frontend_mono(const ProveRequest& req, const PermissionTable& perms,
                                 MonoState& state, const InputVerify& verify);

/// Input verification plus the pre-installed pure application predicate
/// over (req, aux). No invoker signature requirement.
Result<ClockValue> frontend_app(const ProveRequest& req, const AppPredicate& predicate,
                                const InputVerify& verify);

}  // namespace vlc
