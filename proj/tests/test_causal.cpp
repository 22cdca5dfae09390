#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vlc/scenarios.hpp"

using namespace vlc;
using causal::CausalEnvelope;
using causal::CausalPeer;
using causal::Disposition;

namespace {
const EntityId P1("P1"), P2("P2"), P3("P3");

struct TwoPeers {
  crypto::KeyPair k1 = derive_keypair("proc", 55, 1);
  crypto::KeyPair k2 = derive_keypair("proc", 55, 2);
  std::unique_ptr<ProofService> svc;

  TwoPeers() {
    LocalBackendOptions opt;
    opt.n = 4;
    opt.f = 1;
    opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
    opt.seed = 5;
    opt.perms.exact[P1] = {k1.pub};
    opt.perms.exact[P2] = {k2.pub};
    svc = make_local_service(opt);
  }
};
}  // namespace

TEST_CASE("egress increments per send; receive-then-send is one update") {
  TwoPeers fx;
  CausalPeer a(P1, fx.k1, *fx.svc);
  CausalPeer b(P2, fx.k2, *fx.svc);

  auto m1 = a.egress(to_bytes("m1"));
  REQUIRE(m1.ok());
  CHECK(m1.value().clock.value == ClockValue{{P1, 1}});
  auto m2 = a.egress(to_bytes("m2"));
  REQUIRE(m2.ok());
  CHECK(m2.value().clock.value == ClockValue{{P1, 2}});

  CHECK(b.ingress(m2.value()) == Disposition::Deliver);
  CHECK(b.local().value == ClockValue{{P1, 2}, {P2, 1}});
  auto m3 = b.egress(to_bytes("m3"));
  REQUIRE(m3.ok());
  // the clock proved at ingress rides out unchanged
  CHECK(m3.value().clock.value == ClockValue{{P1, 2}, {P2, 1}});
  // but a second send does increment
  auto m4 = b.egress(to_bytes("m4"));
  REQUIRE(m4.ok());
  CHECK(m4.value().clock.value == ClockValue{{P1, 2}, {P2, 2}});
}

TEST_CASE("ingress dispositions") {
  TwoPeers fx;
  CausalPeer a(P1, fx.k1, *fx.svc);
  CausalPeer b(P2, fx.k2, *fx.svc);

  auto m1 = a.egress(to_bytes("m1")).take();
  auto m2 = a.egress(to_bytes("m2")).take();

  SUBCASE("stale after newer delivered") {
    CHECK(b.ingress(m2) == Disposition::Deliver);
    CHECK(b.ingress(m1) == Disposition::Stale);
  }
  SUBCASE("exact duplicate discarded by digest") {
    CHECK(b.ingress(m1) == Disposition::Deliver);
    CHECK(b.ingress(m1) == Disposition::Duplicate);
  }
  SUBCASE("forged proof rejected") {
    CausalEnvelope forged = m2;
    forged.clock.value.set(P2, 7);  // value no longer matches the certs
    CHECK(b.ingress(forged) == Disposition::InvalidProof);
  }
  SUBCASE("missing mono proof rejected") {
    CausalEnvelope stripped = m2;
    stripped.clock.proofs.erase(FrontendKind::Mono);
    CHECK(b.ingress(stripped) == Disposition::InvalidProof);
  }
  SUBCASE("fresh concurrent clock delivered") {
    auto from_b = b.egress(to_bytes("hello")).take();  // {P2:1}, concurrent with m1
    CHECK(compare(from_b.clock.value, m1.clock.value) == Ordering4::CC);
    CHECK(a.ingress(from_b) == Disposition::Deliver);
  }
}

TEST_CASE("envelope encoding round-trips and rejects truncation") {
  TwoPeers fx;
  CausalPeer a(P1, fx.k1, *fx.svc);
  auto env = a.egress(to_bytes("payload")).take();
  Bytes wire = causal::encode_envelope(env);
  CausalEnvelope back = causal::decode_envelope(wire);
  CHECK(back.sender == env.sender);
  CHECK(back.clock == env.clock);
  CHECK(back.payload == env.payload);
  for (size_t cut : {size_t(1), wire.size() / 2, wire.size() - 1}) {
    Bytes bad(wire.begin(), wire.begin() + static_cast<ptrdiff_t>(cut));
    CHECK_THROWS_AS((void)causal::decode_envelope(bad), WireError);
  }
}

TEST_CASE("motivating schedule reproduces pinned clocks on both backends") {
  for (BackendKind backend : {BackendKind::Quorum, BackendKind::Attested}) {
    CAPTURE(to_string(backend));
    auto got = scen::run_motivating(backend, 42);
    REQUIRE(got.ok());
    const auto& out = got.value();
    CHECK(out.m1 == ClockValue{{P1, 1}});
    CHECK(out.m2 == ClockValue{{P1, 2}});
    CHECK(out.m3 == ClockValue{{P1, 2}, {P2, 1}});
    CHECK(out.m3_delivered_before_m1);
    CHECK(out.m1_discarded_stale);
  }
}

TEST_CASE("all three clock-forging adversaries are defeated on both backends") {
  for (BackendKind backend : {BackendKind::Quorum, BackendKind::Attested}) {
    for (const auto& name : scen::attack_names()) {
      CAPTURE(to_string(backend));
      CAPTURE(name);
      auto got = scen::run_attack(name, backend, 7);
      REQUIRE(got.ok());
      const auto& out = got.value();
      CHECK(out.blocked);
      CHECK_FALSE(out.misordered);
      CHECK(out.honest_msg_delivered);
      if (name == "stale-own-clock")
        CHECK(out.verdict == "rejected-by-mono");
      else
        CHECK(out.verdict == "rejected-by-verify");
      auto causal_ok = check::causal_delivery(out.trace, {P2});
      CHECK(causal_ok.pass);
    }
  }
}

TEST_CASE("honest gossip under faults never delivers out of causal order") {
  struct GossipApp : causal::CausalApp {
    causal::CausalProcess* proc = nullptr;
    int rounds = 0;
    void start(sim::Context& ctx) override {
      proc->send_causal(ctx, ctx.roster()[(fnv1a(ctx.self().bytes) + 1) % ctx.roster().size()],
                        to_bytes("r0"));
    }
    void deliver(sim::Context& ctx, const EntityId&, const Bytes&) override {
      if (++rounds > 12) return;
      for (const EntityId& dst : ctx.roster()) {
        if (dst != ctx.self() && (fnv1a(dst.bytes) + rounds) % 2 == 0)
          proc->send_causal(ctx, dst, to_bytes("r" + std::to_string(rounds)));
      }
    }
  };

  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    LocalBackendOptions opt;
    opt.n = 4;
    opt.f = 1;
    opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
    opt.seed = seed;
    std::vector<EntityId> ids;
    std::vector<crypto::KeyPair> keys;
    for (int i = 0; i < 4; ++i) {
      ids.push_back(EntityId("G" + std::to_string(i)));
      keys.push_back(derive_keypair("gossip", seed, static_cast<uint64_t>(i)));
      opt.perms.exact[ids.back()] = {keys.back().pub};
    }
    auto svc = make_local_service(opt);

    sim::FaultPlan plan;
    plan.seed = seed;
    plan.delay_min = 1;
    plan.delay_max = 12;
    plan.reorder_p = 0.4;
    plan.duplicate_p = 0.15;
    plan.drop_p = 0.05;
    sim::Simulator sim(plan);

    std::vector<GossipApp> apps(4);
    std::vector<std::unique_ptr<causal::CausalProcess>> procs;
    for (int i = 0; i < 4; ++i) {
      procs.push_back(std::make_unique<causal::CausalProcess>(ids[i], keys[i], *svc, &apps[i]));
      apps[i].proc = procs.back().get();
      sim.add_process(ids[i], procs.back().get());
    }
    auto trace = sim.run(200'000);
    REQUIRE(trace.ok());
    auto result = check::causal_delivery(trace.value());
    CHECK(result.pass);
    if (!result.pass) MESSAGE(result.violation);
  }
}
