#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "vlc/app_registry.hpp"
#include "vlc/scenarios.hpp"
#include "vlc/store.hpp"

using namespace vlc;

TEST_CASE("app predicate registry instantiates the store ACL by name") {
  crypto::KeyPair ck = derive_keypair("client", 44, 0);
  nlohmann::json config;
  config["clients"]["C0"] = to_hex(std::span<const uint8_t>(ck.pub));
  config["acl"]["C0"] = {"k0001"};

  auto made = make_app_predicate("store-acl", config);
  REQUIRE(made.ok());
  const AppPredicate& predicate = made.value();

  ClockValue dep;
  auto sig = crypto::sign(store::dep_sign_payload(dep), ck.sec);
  Bytes aux = store::encode_app_aux(EntityId("C0"), sig);
  crypto::KeyPair owner = derive_keypair("server", 44, 0);

  auto allowed = make_request(FrontendKind::App, EntityId("k0001"), owner, Vlc::genesis(),
                              {Vlc{dep, {}}}, aux);
  CHECK(predicate(allowed, allowed.aux).ok());
  auto denied = make_request(FrontendKind::App, EntityId("k0002"), owner, Vlc::genesis(),
                             {Vlc{dep, {}}}, aux);
  CHECK_FALSE(predicate(denied, denied.aux).ok());

  CHECK_FALSE(make_app_predicate("no-such-app", {}).ok());
}

TEST_CASE("snapshot file restores server state across restart") {
  namespace fs = std::filesystem;
  const EntityId S0("S0"), C0("C0"), key("k0001");
  fs::path snap = fs::temp_directory_path() / "chrono_snapshot_test.bin";
  fs::remove(snap);

  LocalBackendOptions opt;
  opt.n = 1;
  opt.f = 0;
  opt.kinds = {FrontendKind::Update};
  opt.seed = 51;
  crypto::KeyPair sk = derive_keypair("server", 51, 0);
  opt.allow_unproven_merged = true;
  opt.perms.exact[key] = {sk.pub};
  auto svc = make_local_service(opt);
  std::map<EntityId, crypto::PublicKey> spubs{{S0, sk.pub}};
  auto partition = store::PartitionMap::uniform({S0}, {key});

  store::ServerOptions so;
  so.get_cost = 0;
  so.put_cost = 0;
  so.snapshot_path = snap.string();

  crypto::KeyPair ck = derive_keypair("client", 51, 0);
  auto put_once = [&](store::StoreServerProcess& server, sim::Simulator& sim, uint64_t seq) {
    struct OneShot : sim::Process {
      EntityId dst;
      Bytes frame;
      void on_start(sim::Context& ctx) override { ctx.send(dst, frame); }
      void on_message(sim::Context&, const EntityId&, const Bytes&) override {}
    } shot;
    store::RequestFrame req;
    req.op = store::Op::Put;
    req.seq = seq;
    req.client = C0;
    req.key = key;
    req.value = to_bytes("v" + std::to_string(seq));
    req.sig = crypto::sign(store::dep_sign_payload(req.dep), ck.sec);
    shot.dst = S0;
    shot.frame = store::encode_request(req);
    sim.add_process(C0, &shot);
    sim.add_process(S0, &server);
    REQUIRE(sim.run(10'000).ok());
  };

  {
    store::StoreServerProcess server(S0, sk, *svc, partition, {S0}, spubs, so);
    sim::FaultPlan plan;
    sim::Simulator sim(plan);
    put_once(server, sim, 0);
    CHECK(server.entries().at(key).version() == 1);
  }
  {
    // restart: a fresh process over the same snapshot file
    store::StoreServerProcess reborn(S0, sk, *svc, partition, {S0}, spubs, so);
    REQUIRE(reborn.entries().contains(key));
    CHECK(reborn.entries().at(key).version() == 1);
    CHECK(reborn.entries().at(key).value == to_bytes("v0"));

    sim::FaultPlan plan;
    sim::Simulator sim(plan);
    put_once(reborn, sim, 1);
    CHECK(reborn.entries().at(key).version() == 2);
  }
  {
    // and again, picking up both appended records
    store::StoreServerProcess third(S0, sk, *svc, partition, {S0}, spubs, so);
    CHECK(third.entries().at(key).version() == 2);
    CHECK(third.entries().at(key).value == to_bytes("v1"));
  }
  fs::remove(snap);
}

TEST_CASE("reversed propagation arrival pends, then commits on the dependency") {
  // S1 owns k1, S0 owns k0. An entry for k1 depending on k0@1 reaches S2
  // before k0's entry: it must park, then commit when k0 lands.
  const EntityId S0("S0"), S1("S1"), S2("S2"), C0("C0");
  const EntityId k0("k0000"), k1("k0001");
  LocalBackendOptions opt;
  opt.n = 1;
  opt.f = 0;
  opt.kinds = {FrontendKind::Update};
  opt.seed = 61;
  opt.allow_unproven_merged = true;
  crypto::KeyPair sk0 = derive_keypair("server", 61, 0);
  crypto::KeyPair sk1 = derive_keypair("server", 61, 1);
  crypto::KeyPair sk2 = derive_keypair("server", 61, 2);
  std::vector<EntityId> servers{S0, S1, S2};
  auto partition = store::PartitionMap::uniform(servers, {k0, k1});
  std::map<EntityId, crypto::PublicKey> spubs{{S0, sk0.pub}, {S1, sk1.pub}, {S2, sk2.pub}};
  opt.perms.fallback = [partition, spubs](const EntityId& key) {
    return std::set<crypto::PublicKey>{spubs.at(partition.owner(key))};
  };
  auto svc = make_local_service(opt);
  REQUIRE(partition.owner(k0) == S0);
  REQUIRE(partition.owner(k1) == S1);

  // build the two entries directly through the proof service
  auto v0 = svc->prove_update(k0, sk0, Vlc::genesis(), {Vlc{}});
  REQUIRE(v0.ok());
  store::VersionedEntry e0{k0, to_bytes("zero"), v0.take(), S0, {}};
  e0.origin_sig = crypto::sign(store::entry_sign_payload(e0.key, e0.value, e0.vclock), sk0.sec);

  ClockValue dep;
  dep.set(k0, 1);
  auto v1 = svc->prove_update(k1, sk1, Vlc::genesis(), {Vlc{dep, {}}});
  REQUIRE(v1.ok());
  store::VersionedEntry e1{k1, to_bytes("one"), v1.take(), S1, {}};
  e1.origin_sig = crypto::sign(store::entry_sign_payload(e1.key, e1.value, e1.vclock), sk1.sec);

  store::ServerOptions so;
  so.get_cost = 0;
  so.put_cost = 0;
  store::StoreServerProcess s2(S2, sk2, *svc, partition, servers, spubs, so);

  struct Feeder : sim::Process {
    Bytes first, second;
    void on_start(sim::Context& ctx) override {
      ctx.send(EntityId("S2"), first);
      ctx.set_timer(5, 1);
    }
    void on_timer(sim::Context& ctx, uint64_t) override { ctx.send(EntityId("S2"), second); }
    void on_message(sim::Context&, const EntityId&, const Bytes&) override {}
  } feeder;
  feeder.first = store::encode_propagate(e1);   // dependent entry first
  feeder.second = store::encode_propagate(e0);  // dependency later

  sim::FaultPlan plan;
  sim::Simulator sim(plan);
  sim.add_process(EntityId("feeder"), &feeder);
  sim.add_process(S2, &s2);

  bool pended = false;
  auto run = sim.run(10'000, [&] {
    if (s2.pending_count() == 1) pended = true;
    return s2.entries().size() == 2;
  });
  REQUIRE(run.ok());
  CHECK(pended);  // the dependent entry parked before its dependency landed
  CHECK(s2.pending_count() == 0);
  CHECK(s2.entries().at(k0).version() == 1);
  CHECK(s2.entries().at(k1).version() == 1);

  // an older key-version arriving after install is discarded
  store::StoreServerProcess s3(S2, sk2, *svc, partition, servers, spubs, so);
  sim::Simulator sim2(plan);
  struct Feeder2 : sim::Process {
    Bytes a, b;
    void on_start(sim::Context& ctx) override {
      ctx.send(EntityId("S2"), a);
      ctx.send(EntityId("S2"), b);
    }
    void on_message(sim::Context&, const EntityId&, const Bytes&) override {}
  } feeder2;
  auto v0b = svc->prove_update(k0, sk0, e0.vclock, {Vlc{}});
  REQUIRE(v0b.ok());
  store::VersionedEntry e0b{k0, to_bytes("zero2"), v0b.take(), S0, {}};
  e0b.origin_sig =
      crypto::sign(store::entry_sign_payload(e0b.key, e0b.value, e0b.vclock), sk0.sec);
  feeder2.a = store::encode_propagate(e0b);  // version 2 first
  feeder2.b = store::encode_propagate(e0);   // version 1 after
  sim2.add_process(EntityId("feeder"), &feeder2);
  sim2.add_process(S2, &s3);
  REQUIRE(sim2.run(10'000).ok());
  CHECK(s3.entries().at(k0).version() == 2);
  CHECK(s3.entries().at(k0).value == to_bytes("zero2"));
}

TEST_CASE("oversized values are rejected") {
  const EntityId S0("S0"), C0("C0"), key("k0001");
  LocalBackendOptions opt;
  opt.n = 1;
  opt.f = 0;
  opt.kinds = {FrontendKind::Update};
  opt.seed = 52;
  crypto::KeyPair sk = derive_keypair("server", 52, 0);
  opt.allow_unproven_merged = true;
  opt.perms.exact[key] = {sk.pub};
  auto svc = make_local_service(opt);
  auto partition = store::PartitionMap::uniform({S0}, {key});

  store::ServerOptions so;
  so.get_cost = 0;
  so.put_cost = 0;
  so.max_value_bytes = 64;
  store::StoreServerProcess server(S0, sk, *svc, partition, {S0}, {{S0, sk.pub}}, so);

  struct Catcher : sim::Process {
    EntityId dst;
    Bytes frame;
    std::optional<store::Status> status;
    void on_start(sim::Context& ctx) override { ctx.send(dst, frame); }
    void on_message(sim::Context&, const EntityId&, const Bytes& raw) override {
      auto f = store::decode_frame(raw);
      if (auto* reply = std::get_if<store::ReplyFrame>(&f)) status = reply->status;
    }
  } catcher;

  crypto::KeyPair ck = derive_keypair("client", 52, 0);
  store::RequestFrame req;
  req.op = store::Op::Put;
  req.client = C0;
  req.key = key;
  req.value = Bytes(65, 0xab);  // one byte over the cap
  req.sig = crypto::sign(store::dep_sign_payload(req.dep), ck.sec);
  catcher.dst = S0;
  catcher.frame = store::encode_request(req);

  sim::FaultPlan plan;
  sim::Simulator sim(plan);
  sim.add_process(C0, &catcher);
  sim.add_process(S0, &server);
  REQUIRE(sim.run(10'000).ok());
  REQUIRE(catcher.status.has_value());
  CHECK(*catcher.status == store::Status::Invalid);
  CHECK(server.entries().empty());
}
