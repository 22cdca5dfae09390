#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fork_sweep.hpp"
#include "tamper.hpp"
#include "vlc/service.hpp"

using namespace vlc;

namespace {
const EntityId kId("P1");

LocalBackendOptions quorum_opt(uint32_t n, uint32_t f, std::set<FrontendKind> kinds,
                               const crypto::PublicKey& owner_pub) {
  LocalBackendOptions opt;
  opt.backend = BackendKind::Quorum;
  opt.n = n;
  opt.f = f;
  opt.kinds = std::move(kinds);
  opt.seed = 13;
  opt.perms.exact[kId] = {owner_pub};
  return opt;
}
}  // namespace

TEST_CASE("threshold arithmetic") {
  QuorumConfig cfg;
  cfg.n = 5;
  cfg.f = 1;
  CHECK(cfg.t_stateless() == 2);
  CHECK(cfg.t_stateful() == 4);  // ceil((5+1+1)/2)
  cfg.n = 4;
  CHECK(cfg.t_stateful() == 3);  // ceil((4+1+1)/2)
  cfg.n = 1;
  cfg.f = 0;
  CHECK(cfg.t_stateless() == 1);
  CHECK(cfg.t_stateful() == 1);

  AttestedConfig at;
  at.n = 3;
  CHECK(at.threshold(FrontendKind::Update) == 1);
  CHECK(at.threshold(FrontendKind::Mono) == 2);  // simple majority of 3
}

TEST_CASE("quorum intersection arithmetic: two stateful certs share an honest node") {
  for (auto [n, f] : std::vector<std::pair<uint32_t, uint32_t>>{{4, 1}, {5, 1}, {7, 2}}) {
    QuorumConfig cfg;
    cfg.n = n;
    cfg.f = f;
    uint32_t t = cfg.t_stateful();
    CHECK(2 * t >= n + f + 1);  // overlap 2t-N >= f+1
  }
}

TEST_CASE("client_prove collects a stateless cert with one silent node") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update}, owner.pub));
  svc->node(0).fault = FaultMode::Silent;

  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  const auto& cert = std::get<QuorumCert>(got.value().proofs.at(FrontendKind::Update));
  CHECK(cert.sigs.size() == 2);  // exactly t = f+1
  CHECK_FALSE(cert.sigs.contains(EntityId("qn0")));
  CHECK(svc->verify(got.value()));
}

TEST_CASE("client_prove excludes wrong-value signatures by matching") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update}, owner.pub));
  svc->node(0).fault = FaultMode::WrongValue;

  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  CHECK(got.value().value == ClockValue{{kId, 1}});
  const auto& cert = std::get<QuorumCert>(got.value().proofs.at(FrontendKind::Update));
  CHECK_FALSE(cert.sigs.contains(EntityId("qn0")));
  CHECK(check_cert(svc->deployment().quorum, cert, got.value().value));
}

TEST_CASE("client_prove with equivocating node still converges") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update}, owner.pub));
  svc->node(1).fault = FaultMode::Equivocate;
  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  CHECK(got.value().value == ClockValue{{kId, 1}});
}

TEST_CASE("single-node deployment issues single-signature certs") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(1, 0, {FrontendKind::Update}, owner.pub));
  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  const auto& cert = std::get<QuorumCert>(got.value().proofs.at(FrontendKind::Update));
  CHECK(cert.sigs.size() == 1);
  CHECK(svc->verify(got.value()));
}

TEST_CASE("client_prove fails closed when too many nodes are silent") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(3, 1, {FrontendKind::Update}, owner.pub));
  svc->node(0).fault = FaultMode::Silent;
  svc->node(1).fault = FaultMode::Silent;
  svc->node(2).fault = FaultMode::Silent;
  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE_FALSE(got.ok());
  CHECK(got.code() == Reject::InsufficientQuorum);
}

TEST_CASE("mono rejections surface StaleBase through client_prove") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc =
      make_local_quorum(quorum_opt(4, 1, {FrontendKind::Update, FrontendKind::Mono}, owner.pub));
  auto first = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(first.ok());
  auto second = svc->prove_update(kId, owner, first.value(), {});
  REQUIRE(second.ok());
  // reuse the older clock as base: every honest node reports StaleBase
  auto forked = svc->prove_update(kId, owner, first.value(), {});
  REQUIRE_FALSE(forked.ok());
  CHECK(forked.code() == Reject::StaleBase);
}

TEST_CASE("check_cert rejects tampering") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update}, owner.pub));
  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  const auto& cfg = svc->deployment().quorum;
  QuorumCert cert = std::get<QuorumCert>(got.value().proofs.at(FrontendKind::Update));
  ClockValue value = got.value().value;
  REQUIRE(check_cert(cfg, cert, value));

  SUBCASE("forged signature flips the verdict") {
    QuorumCert bad = cert;
    bad.sigs.begin()->second[5] ^= 0x40;
    CHECK_FALSE(check_cert(cfg, bad, value));
  }
  SUBCASE("value hash mismatch") {
    QuorumCert bad = cert;
    bad.value_hash[0] ^= 1;
    CHECK_FALSE(check_cert(cfg, bad, value));
  }
  SUBCASE("presented value mismatch") {
    ClockValue other = value;
    other.set(kId, 9);
    CHECK_FALSE(check_cert(cfg, cert, other));
  }
  SUBCASE("below threshold") {
    QuorumCert bad = cert;
    bad.sigs.erase(bad.sigs.begin());
    CHECK_FALSE(check_cert(cfg, bad, value));
  }
  SUBCASE("unregistered signer") {
    QuorumCert bad = cert;
    auto sig = bad.sigs.begin()->second;
    bad.sigs.erase(bad.sigs.begin());
    bad.sigs.emplace(EntityId("mallory"), sig);
    CHECK_FALSE(check_cert(cfg, bad, value));
  }
  SUBCASE("kind confusion") {
    QuorumCert bad = cert;
    bad.kind = FrontendKind::Mono;
    CHECK_FALSE(check_cert(cfg, bad, value));
  }
}

TEST_CASE("cert bit-flip fuzz, small round") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc = make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update}, owner.pub));
  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  auto stats = vlc::testing::tamper_fuzz(svc->deployment(), got.value().value,
                                         got.value().proofs.at(FrontendKind::Update), 500, 77);
  CHECK(stats.attempts == 500);
  CHECK(stats.false_accepts == 0);
}

TEST_CASE("attested backend round-trip and tamper rejection") {
  crypto::KeyPair owner = derive_keypair("proc", 4, 0);
  LocalBackendOptions opt;
  opt.backend = BackendKind::Attested;
  opt.n = 3;
  opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  opt.seed = 21;
  opt.perms.exact[kId] = {owner.pub};
  auto svc = make_local_attested(opt);

  auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(got.ok());
  CHECK(svc->verify(got.value()));

  const auto& cfg = svc->deployment().attested;
  AttestedCert upd = std::get<AttestedCert>(got.value().proofs.at(FrontendKind::Update));
  AttestedCert mono = std::get<AttestedCert>(got.value().proofs.at(FrontendKind::Mono));
  CHECK(upd.sigs.size() == 1);   // any single attested signer suffices
  CHECK(mono.sigs.size() == 2);  // simple majority of 3

  SUBCASE("measurement mismatch") {
    AttestedCert bad = upd;
    bad.measurement[3] ^= 2;
    CHECK_FALSE(attested_check(cfg, bad, got.value().value));
  }
  SUBCASE("forged signature") {
    AttestedCert bad = upd;
    bad.sigs.begin()->second[0] ^= 1;
    CHECK_FALSE(attested_check(cfg, bad, got.value().value));
  }
  SUBCASE("clock digest mismatch") {
    ClockValue other = got.value().value;
    other.set(kId, 5);
    CHECK_FALSE(attested_check(cfg, upd, other));
  }
}

TEST_CASE("clock attested under a different measurement is rejected as input") {
  crypto::KeyPair owner = derive_keypair("proc", 4, 0);
  LocalBackendOptions opt;
  opt.backend = BackendKind::Attested;
  opt.n = 1;
  opt.kinds = {FrontendKind::Update};
  opt.seed = 22;
  opt.perms.exact[kId] = {owner.pub};

  LocalBackendOptions old = opt;
  old.measurement_version = "chrono-validator-0.9";
  auto old_svc = make_local_attested(old);
  auto cur_svc = make_local_attested(opt);

  auto from_old = old_svc->prove_update(kId, owner, Vlc::genesis(), {});
  REQUIRE(from_old.ok());
  CHECK_FALSE(cur_svc->verify(from_old.value()));

  auto stale_input = cur_svc->prove_update(kId, owner, from_old.value(), {});
  REQUIRE_FALSE(stale_input.ok());
  CHECK(stale_input.code() == Reject::InvalidInputClock);
}

TEST_CASE("mono fork sweep at N=4 f=1: at most one concurrent cert forms") {
  auto result = vlc::testing::mono_fork_sweep(4, 1);
  CHECK(result.schedules == 70u * 4u);
  CHECK(result.both_success == 0);
  CHECK(result.single_success > 0);
}

TEST_CASE("vlc wire encoding round-trips full proof sets") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto qsvc =
      make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update, FrontendKind::Mono}, owner.pub));
  LocalBackendOptions aopt;
  aopt.backend = BackendKind::Attested;
  aopt.n = 3;
  aopt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  aopt.seed = 13;
  aopt.perms.exact[kId] = {owner.pub};
  auto asvc = make_local_attested(aopt);

  for (ProofService* svc : {static_cast<ProofService*>(qsvc.get()),
                            static_cast<ProofService*>(asvc.get())}) {
    auto proved = svc->prove_update(kId, owner, Vlc::genesis(), {});
    REQUIRE(proved.ok());
    Bytes wire = serialize(proved.value());
    Vlc back = deserialize_vlc(wire);
    CHECK(back == proved.value());
    CHECK(svc->verify(back));
    Bytes truncated(wire.begin(), wire.end() - 1);
    CHECK_THROWS_AS((void)deserialize_vlc(truncated), WireError);
  }
}

TEST_CASE("proof size stays constant along a long causal history") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  auto svc =
      make_local_quorum(quorum_opt(5, 1, {FrontendKind::Update, FrontendKind::Mono}, owner.pub));
  Vlc cur = Vlc::genesis();
  size_t first_size = 0;
  for (int i = 0; i < 50; ++i) {
    auto next = svc->prove_update(kId, owner, cur, {});
    REQUIRE(next.ok());
    cur = next.take();
    size_t proof_bytes = serialize(cur).size() - serialize(cur.value).size();
    if (i == 0)
      first_size = proof_bytes;
    else
      CHECK(proof_bytes == first_size);  // certs never grow with history
  }
  CHECK(svc->verify(cur));
}

TEST_CASE("unforgeability: exhaustive single-fault sweep never certifies a corrupt value") {
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  const ClockValue honest{{kId, 1}};
  // mono needs t_stateful reachable honest nodes, so N=3 runs the
  // stateless sweep only (a silent node leaves 2 < t_stateful = 3)
  auto kinds_for = [](uint32_t n) -> std::set<FrontendKind> {
    if (n == 3) return {FrontendKind::Update};
    return {FrontendKind::Update, FrontendKind::Mono};
  };
  for (uint32_t n : {3u, 4u, 5u}) {
    for (uint32_t pos = 0; pos < n; ++pos) {
      for (FaultMode mode : {FaultMode::Silent, FaultMode::WrongValue, FaultMode::Equivocate,
                             FaultMode::StaleState}) {
        CAPTURE(n);
        CAPTURE(pos);
        CAPTURE(to_string(mode));
        auto svc = make_local_quorum(quorum_opt(n, 1, kinds_for(n), owner.pub));
        svc->node(pos).fault = mode;
        auto got = svc->prove_update(kId, owner, Vlc::genesis(), {});
        REQUIRE(got.ok());  // liveness with one faulty node
        CHECK(got.value().value == honest);
        CHECK(svc->verify(got.value()));
        // and no cert the faulty node could assemble verifies over a
        // value honest nodes would not sign
        for (const auto& [kind, proof] : got.value().proofs) {
          ClockValue corrupt = honest;
          corrupt.set(kId, 2);
          CHECK_FALSE(check_cert(svc->deployment().quorum, std::get<QuorumCert>(proof), corrupt));
        }
      }
    }
  }
}
