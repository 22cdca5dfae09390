#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vlc/service.hpp"

using namespace vlc;

namespace {
const EntityId kId("P2");

struct Fixture {
  crypto::KeyPair owner = derive_keypair("proc", 7, 0);
  crypto::KeyPair stranger = derive_keypair("proc", 7, 1);
  LocalBackendOptions opt;
  std::unique_ptr<LocalQuorumService> svc;

  explicit Fixture(std::set<FrontendKind> kinds = {FrontendKind::Update}) {
    opt.kinds = std::move(kinds);
    opt.n = 4;
    opt.f = 1;
    opt.perms.exact[kId] = {owner.pub};
    opt.perms.exact[EntityId("P1")] = {derive_keypair("proc", 7, 2).pub};
    svc = make_local_quorum(opt);
  }
  const Deployment& dep() const { return svc->deployment(); }
  InputVerify verify() const { return dep().input_verify(); }
};
}  // namespace

TEST_CASE("frontend_update accepts a valid signed genesis update") {
  Fixture fx;
  auto req = make_request(FrontendKind::Update, kId, fx.owner, Vlc::genesis(), {});
  auto got = frontend_update(req, fx.opt.perms, fx.verify());
  REQUIRE(got.ok());
  CHECK(got.value() == ClockValue{{kId, 1}});
}

TEST_CASE("frontend_update rejects an unverifiable merged clock") {
  Fixture fx;
  Vlc forged;
  forged.value = ClockValue{{EntityId("P1"), 3}};  // claims history, carries no proof
  auto req = make_request(FrontendKind::Update, kId, fx.owner, Vlc::genesis(), {forged});
  auto got = frontend_update(req, fx.opt.perms, fx.verify());
  REQUIRE_FALSE(got.ok());
  CHECK(got.code() == Reject::InvalidInputClock);
}

TEST_CASE("frontend_update rejects a key without permission") {
  Fixture fx;
  auto req = make_request(FrontendKind::Update, kId, fx.stranger, Vlc::genesis(), {});
  auto got = frontend_update(req, fx.opt.perms, fx.verify());
  REQUIRE_FALSE(got.ok());
  CHECK(got.code() == Reject::PermissionDenied);
}

TEST_CASE("frontend_update rejects a tampered signature") {
  Fixture fx;
  auto req = make_request(FrontendKind::Update, kId, fx.owner, Vlc::genesis(), {});
  req.invoker_sig[0] ^= 0x01;
  auto got = frontend_update(req, fx.opt.perms, fx.verify());
  REQUIRE_FALSE(got.ok());
  CHECK(got.code() == Reject::BadSignature);
}

TEST_CASE("frontend_update is deterministic") {
  Fixture fx;
  auto req = make_request(FrontendKind::Update, kId, fx.owner, Vlc::genesis(), {});
  auto a = frontend_update(req, fx.opt.perms, fx.verify());
  auto b = frontend_update(req, fx.opt.perms, fx.verify());
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value() == b.value());
}

TEST_CASE("frontend_mono enforces local ordering") {
  Fixture fx({FrontendKind::Update, FrontendKind::Mono});
  MonoState state;

  SUBCASE("base equal to issued counter is accepted and bumps state") {
    state[kId] = 3;
    Vlc base;
    base.value = ClockValue{{kId, 3}};
    // give the base a real proof so input verification passes
    auto proven = fx.svc->prove_update(kId, fx.owner, Vlc::genesis(), {});
    REQUIRE(proven.ok());
    // build a chain to counter 3
    Vlc cur = proven.take();
    for (int i = 0; i < 2; ++i) {
      auto next = fx.svc->prove_update(kId, fx.owner, cur, {});
      REQUIRE(next.ok());
      cur = next.take();
    }
    CHECK(cur.value.get(kId) == 3);
    // the service's own nodes are now at issued=3; a fresh frontend state
    // at 3 accepts this base
    auto req = make_request(FrontendKind::Mono, kId, fx.owner, cur, {});
    auto got = frontend_mono(req, fx.opt.perms, state, fx.verify());
    REQUIRE(got.ok());
    CHECK(state[kId] == 4);
    CHECK(got.value().get(kId) == 4);
  }

  SUBCASE("stale base is rejected") {
    state[kId] = 3;
    auto proven = fx.svc->prove_update(kId, fx.owner, Vlc::genesis(), {});
    REQUIRE(proven.ok());
    Vlc stale = proven.take();  // counter 1 < issued 3
    auto req = make_request(FrontendKind::Mono, kId, fx.owner, stale, {});
    auto got = frontend_mono(req, fx.opt.perms, state, fx.verify());
    REQUIRE_FALSE(got.ok());
    CHECK(got.code() == Reject::StaleBase);
    CHECK(state[kId] == 3);  // unchanged on reject
  }

  SUBCASE("fresh id starts at zero") {
    auto req = make_request(FrontendKind::Mono, kId, fx.owner, Vlc::genesis(), {});
    auto got = frontend_mono(req, fx.opt.perms, state, fx.verify());
    REQUIRE(got.ok());
    CHECK(state[kId] == 1);
    CHECK(got.value() == ClockValue{{kId, 1}});
  }
}

TEST_CASE("mono-fork exclusion: accepted counters strictly increase") {
  Fixture fx({FrontendKind::Update, FrontendKind::Mono});
  MonoState state;
  uint64_t last = 0;
  Vlc cur = Vlc::genesis();
  for (int i = 0; i < 5; ++i) {
    auto req = make_request(FrontendKind::Mono, kId, fx.owner, cur, {});
    auto got = frontend_mono(req, fx.opt.perms, state, fx.verify());
    REQUIRE(got.ok());
    uint64_t counter = got.value().get(kId);
    CHECK(counter > last);
    last = counter;
    // advance the base through the real service so it verifies
    auto next = fx.svc->prove_update(kId, fx.owner, cur, {});
    REQUIRE(next.ok());
    cur = next.take();
  }
}

TEST_CASE("frontend_app runs the pure predicate") {
  Fixture fx;
  const EntityId client("client-7");

  AppPredicate acl = [&](const ProveRequest& req, const Bytes& aux) -> Result<void> {
    // aux names the client; only client-7 may touch kId
    if (to_string(std::span<const uint8_t>(aux)) == "client-7" && req.id == kId) return {};
    return Rejection{Reject::AppRuleViolation, "client lacks permission on key"};
  };

  SUBCASE("allowed client passes") {
    auto req = make_request(FrontendKind::App, kId, fx.owner, Vlc::genesis(), {},
                            to_bytes("client-7"));
    auto got = frontend_app(req, acl, fx.verify());
    REQUIRE(got.ok());
    CHECK(got.value() == ClockValue{{kId, 1}});
  }

  SUBCASE("client without write permission is rejected with detail") {
    auto req = make_request(FrontendKind::App, kId, fx.owner, Vlc::genesis(), {},
                            to_bytes("client-9"));
    auto got = frontend_app(req, acl, fx.verify());
    REQUIRE_FALSE(got.ok());
    CHECK(got.code() == Reject::AppRuleViolation);
    CHECK(got.error().detail == "client lacks permission on key");
  }

  SUBCASE("always-true predicate matches frontend_update output") {
    AppPredicate yes = [](const ProveRequest&, const Bytes&) -> Result<void> { return {}; };
    auto app_req = make_request(FrontendKind::App, kId, fx.owner, Vlc::genesis(), {});
    auto upd_req = make_request(FrontendKind::Update, kId, fx.owner, Vlc::genesis(), {});
    auto a = frontend_app(app_req, yes, fx.verify());
    auto u = frontend_update(upd_req, fx.opt.perms, fx.verify());
    REQUIRE(a.ok());
    REQUIRE(u.ok());
    CHECK(a.value() == u.value());
  }
}

TEST_CASE("verified closure: proving over verified inputs yields a verifying Vlc") {
  Fixture fx({FrontendKind::Update, FrontendKind::Mono});
  auto first = fx.svc->prove_update(kId, fx.owner, Vlc::genesis(), {});
  REQUIRE(first.ok());
  CHECK(fx.svc->verify(first.value()));
  auto second = fx.svc->prove_update(kId, fx.owner, first.value(), {});
  REQUIRE(second.ok());
  CHECK(fx.svc->verify(second.value()));
  CHECK(compare(first.value().value, second.value().value) == Ordering4::BF);
}

TEST_CASE("request serialization round-trips") {
  Fixture fx;
  Vlc base;
  base.value = ClockValue{{kId, 1}};
  auto req = make_request(FrontendKind::Update, kId, fx.owner, base, {Vlc::genesis()},
                          to_bytes("aux"));
  Bytes wire = serialize(req);
  ProveRequest back = deserialize_request(wire);
  CHECK(back.kind == req.kind);
  CHECK(back.id == req.id);
  CHECK(back.base == req.base);
  CHECK(back.merged == req.merged);
  CHECK(back.aux == req.aux);
  CHECK(back.invoker == req.invoker);
  CHECK(back.invoker_sig == req.invoker_sig);
  CHECK(request_sign_digest(back) == request_sign_digest(req));
}
