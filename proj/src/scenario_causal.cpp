#include "vlc/scenarios.hpp"

namespace vlc::scen {

using causal::CausalApp;
using causal::CausalEnvelope;
using causal::CausalProcess;
using sim::Context;
using sim::FaultPlan;
using sim::Simulator;

namespace {

const EntityId P1("P1"), P2("P2"), P3("P3");

struct Peers {
  crypto::KeyPair k1 = derive_keypair("proc", 101, 1);
  crypto::KeyPair k2 = derive_keypair("proc", 101, 2);
  crypto::KeyPair k3 = derive_keypair("proc", 101, 3);
};

std::unique_ptr<ProofService> make_service(BackendKind backend, uint64_t seed, const Peers& p) {
  LocalBackendOptions opt;
  opt.backend = backend;
  opt.n = backend == BackendKind::Quorum ? 4 : 3;
  opt.f = backend == BackendKind::Quorum ? 1 : 0;
  opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  opt.seed = seed;
  opt.perms.exact[P1] = {p.k1.pub};
  opt.perms.exact[P2] = {p.k2.pub};
  opt.perms.exact[P3] = {p.k3.pub};
  return make_local_service(opt);
}

/// Sends a fixed list of messages at start or upon a trigger delivery.
struct SenderApp : CausalApp {
  CausalProcess* proc = nullptr;
  std::vector<std::pair<EntityId, std::string>> at_start;
  std::string trigger;  // payload that triggers the second batch
  std::vector<std::pair<EntityId, std::string>> on_trigger;

  void start(Context& ctx) override {
    for (const auto& [dst, payload] : at_start) proc->send_causal(ctx, dst, to_bytes(payload));
  }
  void deliver(Context& ctx, const EntityId&, const Bytes& payload) override {
    if (!trigger.empty() && to_string(std::span<const uint8_t>(payload)) == trigger) {
      for (const auto& [dst, p] : on_trigger) proc->send_causal(ctx, dst, to_bytes(p));
    }
  }
};

struct SinkApp : CausalApp {
  void deliver(Context&, const EntityId&, const Bytes&) override {}
};

/// Payload delivery order observed by a process, from the trace.
std::vector<std::string> deliveries_of(const sim::Trace& trace, const EntityId& proc) {
  std::vector<std::string> out;
  for (const auto& r : trace.app) {
    if (r.proc == proc && r.tag == "deliver")
      out.push_back(to_string(std::span<const uint8_t>(from_hex(r.detail["payload"].get<std::string>()))));
  }
  return out;
}

bool discarded_with(const sim::Trace& trace, const EntityId& proc, const std::string& payload,
                    const std::string& reason) {
  for (const auto& r : trace.app) {
    if (r.proc == proc && r.tag == "discard" &&
        to_string(std::span<const uint8_t>(from_hex(r.detail["payload"].get<std::string>()))) == payload &&
        r.detail["reason"].get<std::string>() == reason)
      return true;
  }
  return false;
}

std::optional<ClockValue> sent_clock(const sim::Trace& trace, const EntityId& proc,
                                     const std::string& payload) {
  for (const auto& r : trace.app) {
    if (r.proc == proc && r.tag == "send" &&
        to_string(std::span<const uint8_t>(from_hex(r.detail["payload"].get<std::string>()))) == payload)
      return deserialize_clock(from_hex(r.detail["clock"].get<std::string>()));
  }
  return std::nullopt;
}

}  // namespace

Result<MotivatingOutcome> run_motivating(BackendKind backend, uint64_t seed) {
  Peers peers;
  auto svc = make_service(backend, seed, peers);

  FaultPlan plan;
  plan.seed = seed;
  plan.link_delays[{P1, P3}] = sim::LinkDelay{40, 40};  // m1 crawls to P3
  plan.link_delays[{P1, P2}] = sim::LinkDelay{1, 1};
  plan.link_delays[{P2, P3}] = sim::LinkDelay{1, 1};

  SenderApp app1;
  app1.at_start = {{P3, "m1"}, {P2, "m2"}};
  SenderApp app2;
  app2.trigger = "m2";
  app2.on_trigger = {{P3, "m3"}};
  SinkApp app3;

  CausalProcess p1(P1, peers.k1, *svc, &app1);
  CausalProcess p2(P2, peers.k2, *svc, &app2);
  CausalProcess p3(P3, peers.k3, *svc, &app3);
  app1.proc = &p1;
  app2.proc = &p2;

  Simulator sim(plan);
  sim.add_process(P1, &p1);
  sim.add_process(P2, &p2);
  sim.add_process(P3, &p3);
  auto run = sim.run(100'000);
  if (!run) return run.error();

  MotivatingOutcome out;
  out.trace = run.take();
  auto m1 = sent_clock(out.trace, P1, "m1");
  auto m2 = sent_clock(out.trace, P1, "m2");
  auto m3 = sent_clock(out.trace, P2, "m3");
  if (!m1 || !m2 || !m3)
    return Rejection{Reject::Unavailable, "scenario did not produce all three sends"};
  out.m1 = *m1;
  out.m2 = *m2;
  out.m3 = *m3;
  auto order = deliveries_of(out.trace, P3);
  out.m3_delivered_before_m1 = !order.empty() && order.front() == "m3";
  out.m1_discarded_stale = discarded_with(out.trace, P3, "m1", "Stale");
  return out;
}

const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names{"erroneous-clock", "cherry-pick",
                                              "stale-own-clock"};
  return names;
}

namespace {

/// Forges an envelope from P2 carrying `value` with proofs lifted from a
/// legitimately received clock.
Bytes forged_envelope(const ClockValue& value, const Vlc& stolen_from, const Bytes& payload) {
  Vlc forged;
  forged.value = value;
  forged.proofs = stolen_from.proofs;
  return causal::encode_envelope(CausalEnvelope{P2, forged, payload});
}

/// Scenario 1: fabricates an arbitrary concurrent clock for m3.
struct ErroneousClockAttacker : sim::Process {
  void on_message(Context& ctx, const EntityId&, const Bytes& raw) override {
    auto env = causal::decode_envelope(raw);
    if (to_string(std::span<const uint8_t>(env.payload)) != "m2") return;
    ClockValue forged;  // the "«0,2,3»" shape: pretends m1 never happened
    forged.set(P2, 2);
    forged.set(P3, 3);
    ctx.log("attack-sent", {{"value", to_hex(serialize(forged))}});
    ctx.send(P3, forged_envelope(forged, env.clock, to_bytes("m3")));
  }
};

/// Scenario 2: cherry-picks coordinates from two received clocks.
struct CherryPickAttacker : sim::Process {
  std::optional<CausalEnvelope> ma, m2;
  void on_message(Context& ctx, const EntityId&, const Bytes& raw) override {
    auto env = causal::decode_envelope(raw);
    std::string payload = to_string(std::span<const uint8_t>(env.payload));
    if (payload == "ma") ma = env;
    if (payload == "m2") m2 = env;
    if (!ma || !m2) return;
    // Take P1's entry from the newest clock, P3's from the oldest, and
    // invent its own; the mix matches no valid update output.
    ClockValue forged;
    forged.set(P1, m2->clock.value.get(P1));
    forged.set(P2, 2);
    forged.set(P3, ma->clock.value.get(P3));
    ctx.log("attack-sent", {{"value", to_hex(serialize(forged))}});
    ctx.send(P3, forged_envelope(forged, m2->clock, to_bytes("m3")));
    ma.reset();
  }
};

/// Scenario 3: replays one of its older clocks as the update base. The
/// mono frontend holds the highest issued counter and rejects the fork;
/// the attacker then ships the clock it wanted anyway, unprovable.
struct StaleOwnClockAttacker : sim::Process {
  ProofService& svc;
  crypto::KeyPair key;
  Vlc old_clock;  // c_a, kept from its own history
  explicit StaleOwnClockAttacker(ProofService& s, crypto::KeyPair k) : svc(s), key(k) {}

  void on_start(Context& ctx) override {
    // honest prefix: three own updates c_a, c_b, c_c
    Vlc cur;
    for (int i = 0; i < 3; ++i) {
      auto r = svc.prove_update(P2, key, cur, {});
      if (!r) return;
      cur = r.take();
      if (i == 0) old_clock = cur;
    }
    ctx.send(P1, causal::encode_envelope(CausalEnvelope{P2, cur, to_bytes("mpre")}));
  }

  void on_message(Context& ctx, const EntityId&, const Bytes& raw) override {
    auto env = causal::decode_envelope(raw);
    if (to_string(std::span<const uint8_t>(env.payload)) != "m2") return;
    // fork attempt from the stale base
    auto attempt = svc.prove_update(P2, key, old_clock, {env.clock});
    ctx.log("attack-prove", {{"ok", attempt.ok()},
                             {"code", attempt.ok() ? "" : to_string(attempt.code())}});
    ClockValue wanted = update_value(P2, old_clock.value, {{env.clock.value}});
    ctx.log("attack-sent", {{"value", to_hex(serialize(wanted))}});
    ctx.send(P3, forged_envelope(wanted, env.clock, to_bytes("m3")));
  }
};

}  // namespace

Result<AttackOutcome> run_attack(const std::string& scenario, BackendKind backend,
                                 uint64_t seed) {
  Peers peers;
  auto svc = make_service(backend, seed, peers);

  FaultPlan plan;
  plan.seed = seed;
  plan.byzantine[P2] = scenario;
  plan.link_delays[{P1, P3}] = sim::LinkDelay{60, 60};  // honest m1 arrives last
  plan.link_delays[{P1, P2}] = sim::LinkDelay{1, 1};
  plan.link_delays[{P2, P3}] = sim::LinkDelay{1, 1};
  plan.link_delays[{P3, P1}] = sim::LinkDelay{1, 1};
  plan.link_delays[{P3, P2}] = sim::LinkDelay{1, 1};
  plan.link_delays[{P2, P1}] = sim::LinkDelay{1, 1};

  SenderApp app1;
  SinkApp app3;
  CausalProcess p1(P1, peers.k1, *svc, &app1);
  CausalProcess p3(P3, peers.k3, *svc, &app3);
  app1.proc = &p1;

  std::unique_ptr<sim::Process> attacker;
  SenderApp app3_sender;  // scenario 2 uses P3 as the earlier sender
  std::unique_ptr<CausalProcess> p3_sender;

  Simulator sim(plan);
  sim.add_process(P1, &p1);

  if (scenario == "erroneous-clock") {
    app1.at_start = {{P3, "m1"}, {P2, "m2"}};
    attacker = std::make_unique<ErroneousClockAttacker>();
    sim.add_process(P3, &p3);
  } else if (scenario == "cherry-pick") {
    // P3 first sends ma to P2 and mb to P1; P1 reacts to mb.
    app3_sender.at_start = {{P2, "ma"}, {P1, "mb"}};
    app1.trigger = "mb";
    app1.on_trigger = {{P3, "m1"}, {P2, "m2"}};
    p3_sender = std::make_unique<CausalProcess>(P3, peers.k3, *svc, &app3_sender);
    app3_sender.proc = p3_sender.get();
    attacker = std::make_unique<CherryPickAttacker>();
    sim.add_process(P3, p3_sender.get());
  } else if (scenario == "stale-own-clock") {
    app1.trigger = "mpre";
    app1.on_trigger = {{P3, "m1"}, {P2, "m2"}};
    attacker = std::make_unique<StaleOwnClockAttacker>(*svc, peers.k2);
    sim.add_process(P3, &p3);
  } else {
    return Rejection{Reject::Unavailable, "unknown attack scenario: " + scenario};
  }
  sim.add_process(P2, attacker.get());

  auto run = sim.run(100'000);
  if (!run) return run.error();

  AttackOutcome out;
  out.scenario = scenario;
  out.backend = backend;
  out.trace = run.take();

  auto order = deliveries_of(out.trace, P3);
  bool m3_delivered = false, m1_delivered = false;
  size_t m3_at = 0, m1_at = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (order[i] == "m3") {
      m3_delivered = true;
      m3_at = i;
    }
    if (order[i] == "m1") {
      m1_delivered = true;
      m1_at = i;
    }
  }
  out.honest_msg_delivered = m1_delivered;
  out.misordered = m3_delivered && m1_delivered && m3_at < m1_at;
  out.blocked = !m3_delivered && discarded_with(out.trace, P3, "m3", "InvalidProof");

  if (scenario == "stale-own-clock") {
    for (const auto& r : out.trace.app) {
      if (r.proc == P2 && r.tag == "attack-prove") {
        if (r.detail["ok"].get<bool>()) out.blocked = false;
        if (r.detail["code"].get<std::string>() == "StaleBase") out.verdict = "rejected-by-mono";
      }
    }
    if (out.verdict.empty()) out.verdict = "prove-not-rejected";
  } else {
    out.verdict = out.blocked ? "rejected-by-verify" : "forged-clock-accepted";
  }
  return out;
}

}  // namespace vlc::scen
