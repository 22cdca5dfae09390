// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Simulation criteria are rerun to confirm byte-identical
// artifacts for a fixed seed.

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "dag_oracle.hpp"
#include "fork_sweep.hpp"
#include "tamper.hpp"
#include "vlc/config.hpp"
#include "vlc/mutex.hpp"
#include "vlc/scenarios.hpp"
#include "vlc/store.hpp"

using namespace vlc;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::cout << "criterion " << criterion << ": " << (pass ? "PASS" : "FAIL") << " — " << what
            << std::endl;
  if (!pass) ++failures;
}

// ---- criterion 1: clock laws against the reachability oracle ----

bool clock_law_suite(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  for (uint64_t seed = 1; seed <= 1000; ++seed) {
    auto h = vlc::testing::random_history(seed, 50, 8);
    size_t n = h.clocks.size();
    for (size_t a = 0; a < n; ++a) {
      for (size_t b = 0; b < n; ++b) {
        if (a == b) {
          if (compare(h.clocks[a], h.clocks[b]) != Ordering4::EQ) {
            detail = "reflexive compare not EQ";
            return false;
          }
          if (total_less(h.clocks[a], h.clocks[b])) {
            detail = "total_less not irreflexive";
            return false;
          }
          continue;
        }
        Ordering4 want = h.path(a, b)   ? Ordering4::BF
                         : h.path(b, a) ? Ordering4::AF
                                        : Ordering4::CC;
        if (compare(h.clocks[a], h.clocks[b]) != want) {
          detail = "compare disagrees with reachability oracle (seed " + std::to_string(seed) +
                   ", events " + std::to_string(a) + "," + std::to_string(b) + ")";
          return false;
        }
        bool lt = total_less(h.clocks[a], h.clocks[b]);
        bool gt = total_less(h.clocks[b], h.clocks[a]);
        if (lt == gt) {  // distinct events have distinct clocks here
          detail = "total_less not total/antisymmetric";
          return false;
        }
        if (want == Ordering4::BF && !lt) {
          detail = "total_less does not extend the partial order";
          return false;
        }
      }
    }
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  detail = "1000 histories, all pairs agree with the oracle, " + std::to_string(elapsed) + " ms";
  return elapsed < 10'000;
}

// ---- criterion 2: three-process schedule reproduction ----

bool motivating(std::string& detail) {
  auto got = scen::run_motivating(BackendKind::Quorum, 42);
  if (!got) {
    detail = got.error().detail;
    return false;
  }
  const auto& out = got.value();
  const EntityId P1("P1"), P2("P2");
  bool clocks_ok = out.m1 == ClockValue{{P1, 1}} && out.m2 == ClockValue{{P1, 2}} &&
                   out.m3 == ClockValue{{P1, 2}, {P2, 1}};
  detail = "m1/m2/m3 clocks exact, m3 overtakes, m1 discarded Stale";
  if (!clocks_ok) detail = "attached clocks differ from the pinned values";
  return clocks_ok && out.m3_delivered_before_m1 && out.m1_discarded_stale;
}

// ---- criterion 3: adversary regression, both backends ----

bool attacks(std::string& detail) {
  int passed = 0, total = 0;
  for (BackendKind backend : {BackendKind::Quorum, BackendKind::Attested}) {
    for (const auto& name : scen::attack_names()) {
      ++total;
      auto got = scen::run_attack(name, backend, 7);
      if (!got) {
        detail = name + " failed to run";
        return false;
      }
      const auto& out = got.value();
      bool verdict_ok = name == "stale-own-clock" ? out.verdict == "rejected-by-mono"
                                                  : out.verdict == "rejected-by-verify";
      if (out.blocked && !out.misordered && out.honest_msg_delivered && verdict_ok) {
        ++passed;
      } else {
        detail = name + " on " + to_string(backend) + " not blocked (verdict " + out.verdict + ")";
        return false;
      }
    }
  }
  detail = std::to_string(passed) + "/" + std::to_string(total) +
           " scenario runs rejected the forged clocks";
  return passed == total;
}

// ---- criterion 4: quorum thresholds and the mono fork sweep ----

bool thresholds(std::string& detail) {
  QuorumConfig cfg;
  cfg.n = 5;
  cfg.f = 1;
  if (cfg.t_stateless() != 2 || cfg.t_stateful() != 4) {
    detail = "threshold arithmetic wrong";
    return false;
  }

  // stateless cert with one silent node: exactly 2 signatures
  const EntityId id("P1");
  crypto::KeyPair owner = derive_keypair("proc", 3, 0);
  LocalBackendOptions opt;
  opt.n = 5;
  opt.f = 1;
  opt.kinds = {FrontendKind::Update};
  opt.seed = 13;
  opt.perms.exact[id] = {owner.pub};
  auto svc = make_local_quorum(opt);
  svc->node(0).fault = FaultMode::Silent;
  auto proved = svc->prove_update(id, owner, Vlc::genesis(), {});
  if (!proved) {
    detail = "stateless prove failed with one silent node";
    return false;
  }
  const auto& cert = std::get<QuorumCert>(proved.value().proofs.at(FrontendKind::Update));
  if (cert.sigs.size() != 2 || !svc->verify(proved.value())) {
    detail = "stateless cert does not have exactly f+1 signatures";
    return false;
  }

  for (uint32_t n : {4u, 5u}) {
    auto sweep = vlc::testing::mono_fork_sweep(n, 1);
    if (sweep.both_success != 0) {
      detail = "two concurrent mono certs formed at N=" + std::to_string(n);
      return false;
    }
    if (sweep.single_success == 0) {
      detail = "sweep degenerate at N=" + std::to_string(n);
      return false;
    }
  }
  detail = "t=f+1 stateless (2 sigs, 1 silent node), t_stateful=4; exhaustive sweeps at N=4 "
           "(280 schedules) and N=5 (1260 schedules): at most one mono cert per schedule";
  return true;
}

// ---- criterion 5: cert tamper fuzz ----

bool tamper(std::string& detail) {
  const EntityId id("P1");
  crypto::KeyPair owner = derive_keypair("proc", 5, 0);

  LocalBackendOptions qopt;
  qopt.n = 5;
  qopt.f = 1;
  qopt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  qopt.seed = 17;
  qopt.perms.exact[id] = {owner.pub};
  auto qsvc = make_local_quorum(qopt);
  auto qproved = qsvc->prove_update(id, owner, Vlc::genesis(), {});
  if (!qproved) {
    detail = "quorum prove failed";
    return false;
  }

  LocalBackendOptions aopt = qopt;
  aopt.backend = BackendKind::Attested;
  aopt.n = 3;
  aopt.f = 0;
  auto asvc = make_local_attested(aopt);
  auto aproved = asvc->prove_update(id, owner, Vlc::genesis(), {});
  if (!aproved) {
    detail = "attested prove failed";
    return false;
  }

  uint64_t total_attempts = 0, false_accepts = 0;
  for (auto kind : {FrontendKind::Update, FrontendKind::Mono}) {
    auto qs = vlc::testing::tamper_fuzz(qsvc->deployment(), qproved.value().value,
                                        qproved.value().proofs.at(kind), 10'000, 91 + int(kind));
    auto as = vlc::testing::tamper_fuzz(asvc->deployment(), aproved.value().value,
                                        aproved.value().proofs.at(kind), 10'000, 92 + int(kind));
    total_attempts += qs.attempts + as.attempts;
    false_accepts += qs.false_accepts + as.false_accepts;
  }
  detail = std::to_string(total_attempts) + " single-bit mutations across quorum and attested "
           "certs, " + std::to_string(false_accepts) + " false accepts";
  return false_accepts == 0;
}

// ---- criterion 6: mutex safety and liveness ----

std::vector<sim::FaultPlan> mutex_plans(uint64_t seed) {
  sim::FaultPlan calm;
  calm.seed = seed;
  calm.delay_min = 1;
  calm.delay_max = 3;
  sim::FaultPlan jitter;
  jitter.seed = seed;
  jitter.delay_min = 1;
  jitter.delay_max = 8;
  jitter.reorder_p = 0.3;
  jitter.duplicate_p = 0.1;
  sim::FaultPlan lossy;
  lossy.seed = seed;
  lossy.delay_min = 1;
  lossy.delay_max = 5;
  lossy.drop_p = 0.05;
  lossy.reorder_p = 0.2;
  return {calm, jitter, lossy};
}

bool mutex_suite(std::string& detail) {
  uint64_t runs = 0;
  std::map<uint32_t, uint64_t> calm_messages;
  std::optional<mutex::AcquisitionProof> sample_proof;
  Deployment sample_dep;
  std::vector<EntityId> sample_roster;

  for (uint32_t n : {3u, 5u, 10u}) {
    int plan_idx = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      auto plans = mutex_plans(seed);
      for (size_t p = 0; p < plans.size(); ++p) {
        auto got = scen::run_mutex(n, n, BackendKind::Quorum, plans[p]);
        ++runs;
        if (!got) {
          detail = "n=" + std::to_string(n) + " plan=" + std::to_string(p) + " seed=" +
                   std::to_string(seed) + ": " + got.error().detail;
          return false;
        }
        const auto& out = got.value();
        if (!out.all_granted || out.grants != n) {
          detail = "liveness: not all requests granted (n=" + std::to_string(n) + ")";
          return false;
        }
        if (!out.exclusion.pass) {
          detail = "exclusion violated: " + out.exclusion.violation;
          return false;
        }
        if (!out.ordered.pass) {
          detail = "ordered access violated: " + out.ordered.violation;
          return false;
        }
        if (!out.proofs_checked) {
          detail = "an honest grant produced an invalid acquisition proof";
          return false;
        }
        if (p == 0 && seed == 1) calm_messages[n] = out.messages;
        if (!sample_proof.has_value() && n == 5 && p == 0) {
          for (const auto& r : out.trace.app) {
            if (r.tag != "grant") continue;
            auto proof = mutex::decode_proof(from_hex(r.detail["proof"].get<std::string>()));
            bool has_release = false;
            for (const auto& [q, m] : proof.support)
              if (m.kind == mutex::MsgKind::Release) has_release = true;
            if (has_release) {
              sample_proof = proof;
              LocalBackendOptions opt;
              opt.n = 4;
              opt.f = 1;
              opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
              opt.seed = plans[p].seed;
              sample_dep = make_deployment(opt);
              sample_roster.clear();
              for (uint32_t i = 0; i < n; ++i)
                sample_roster.push_back(EntityId("M" + std::to_string(i)));
            }
          }
        }
      }
      ++plan_idx;
    }
  }

  // proof-collection work grows quadratically: fit messages ~ N^k on the
  // calm all-contend runs and require k <= 2.4, plus an explicit upper
  // bound of 4*N^2 at every size
  double k = std::log(static_cast<double>(calm_messages[10]) /
                       static_cast<double>(calm_messages[3])) /
             std::log(10.0 / 3.0);
  if (k > 2.4) {
    detail = "message growth exponent " + std::to_string(k) + " exceeds quadratic budget";
    return false;
  }
  for (const auto& [n, m] : calm_messages) {
    if (m > 4ull * n * n) {
      detail = "messages at n=" + std::to_string(n) + " exceed 4*N^2";
      return false;
    }
  }

  // tampered acquisition proofs must fail the offline check
  if (!sample_proof.has_value()) {
    detail = "no grant with a Release in its proof found for tampering";
    return false;
  }
  std::string why;
  if (!mutex::check_acquisition(sample_dep, sample_roster, *sample_proof, &why)) {
    detail = "sample proof unexpectedly invalid: " + why;
    return false;
  }
  int tampered_rejected = 0;
  {
    auto bad = *sample_proof;  // 1: drop a support slot
    bad.support.erase(bad.support.begin());
    if (!mutex::check_acquisition(sample_dep, sample_roster, bad, &why)) ++tampered_rejected;
  }
  {
    auto bad = *sample_proof;  // 2: corrupt the request clock
    bad.request.clock.value.set(bad.request.sender, 99);
    if (!mutex::check_acquisition(sample_dep, sample_roster, bad, &why)) ++tampered_rejected;
  }
  {
    auto bad = *sample_proof;  // 3: a release rewound to before the request
    for (auto& [q, m] : bad.support)
      if (m.kind == mutex::MsgKind::Release) m.clock = bad.request.clock;
    if (!mutex::check_acquisition(sample_dep, sample_roster, bad, &why)) ++tampered_rejected;
  }
  if (tampered_rejected != 3) {
    detail = "a tampered acquisition proof passed the check";
    return false;
  }

  std::ostringstream os;
  os << runs << " runs green (N in {3,5,10}, 3 plans x 10 seeds); message growth N^"
     << std::fixed << std::setprecision(2) << k << "; 3/3 tampered proofs rejected";
  detail = os.str();
  return true;
}

// ---- criterion 7: store correctness and bench direction ----

bool store_suite(std::string& detail) {
  scen::StoreParams params;
  params.servers = 3;
  params.clients = 2;
  params.ops = 5000;  // 10^4 ops across the two sessions
  params.write_ratio = 0.05;
  params.keys = 64;
  params.seed = 7;
  params.plan.seed = 7;
  params.plan.delay_min = 1;
  params.plan.delay_max = 6;
  params.plan.reorder_p = 0.2;
  params.plan.duplicate_p = 0.05;

  auto got = scen::run_store(params);
  if (!got) {
    detail = got.error().detail;
    return false;
  }
  const auto& out = got.value();
  if (out.ops_done != 10'000) {
    detail = "only " + std::to_string(out.ops_done) + " ops accepted";
    return false;
  }
  if (!out.causal.pass) {
    detail = "causal sessions: " + out.causal.violation;
    return false;
  }
  if (!out.converged) {
    detail = "servers did not converge after quiescence";
    return false;
  }
  if (!out.versions_linear) {
    detail = "owner-issued versions are not 1,2,3,... per key";
    return false;
  }

  // all-byzantine servers: zero forged accepts
  scen::StoreParams byz = params;
  byz.ops = 30;
  byz.byzantine_servers = true;
  auto byz_got = scen::run_store(byz);
  if (!byz_got) {
    detail = byz_got.error().detail;
    return false;
  }
  if (byz_got.value().forged_accepts != 0) {
    detail = "clients accepted forged replies";
    return false;
  }

  // write-ratio direction: closed-loop throughput at 50% writes below 1%
  auto throughput = [&](double ratio) -> double {
    scen::StoreParams p = params;
    p.ops = 1000;
    p.write_ratio = ratio;
    auto r = scen::run_store(p);
    if (!r) return -1.0;
    return static_cast<double>(r.value().ops_done) / static_cast<double>(r.value().final_time);
  };
  double t_low = throughput(0.01);
  double t_high = throughput(0.50);
  if (t_low <= 0 || t_high <= 0) {
    detail = "ratio runs failed";
    return false;
  }
  if (!(t_high < t_low)) {
    detail = "throughput did not degrade with write ratio";
    return false;
  }

  std::ostringstream os;
  os << "10^4 ops causal+convergent, zero forged accepts, throughput(50% writes)="
     << std::fixed << std::setprecision(4) << t_high << " < throughput(1%)=" << t_low
     << " ops/tick";
  detail = os.str();
  return true;
}

// ---- criterion 8: determinism of every simulation criterion ----

bool determinism(std::string& detail) {
  auto motivating_bytes = [] {
    auto got = scen::run_motivating(BackendKind::Quorum, 42);
    return got ? got.value().trace.to_jsonl({{"scenario", "motivating"}}) : std::string();
  };
  auto attack_bytes = [] {
    auto got = scen::run_attack("cherry-pick", BackendKind::Quorum, 7);
    return got ? got.value().trace.to_jsonl({{"scenario", "attack"}}) : std::string();
  };
  auto attack_attested_bytes = [] {
    auto got = scen::run_attack("stale-own-clock", BackendKind::Attested, 7);
    return got ? got.value().trace.to_jsonl({{"scenario", "attack-attested"}}) : std::string();
  };
  auto mutex_bytes = [] {
    sim::FaultPlan plan;
    plan.seed = 3;
    plan.delay_min = 1;
    plan.delay_max = 8;
    plan.reorder_p = 0.3;
    plan.duplicate_p = 0.1;
    auto got = scen::run_mutex(5, 5, BackendKind::Quorum, plan);
    if (!got) return std::string();
    cfg::RunReport report;
    report.scenario = "mutex";
    report.seed = 3;
    report.backend = "quorum";
    report.n = 5;
    report.config_hash = cfg::config_hash({{"plan", plan.to_json()}});
    report.metric("messages", got.value().messages);
    report.metric("p50", cfg::quantile(got.value().grant_latencies, 0.5));
    return got.value().trace.to_jsonl({{"scenario", "mutex"}}) + report.to_csv();
  };
  auto store_bytes = [] {
    scen::StoreParams p;
    p.servers = 3;
    p.clients = 2;
    p.ops = 300;
    p.write_ratio = 0.1;
    p.keys = 16;
    p.seed = 11;
    p.plan.seed = 11;
    p.plan.delay_max = 6;
    p.plan.reorder_p = 0.2;
    p.plan.duplicate_p = 0.05;
    auto got = scen::run_store(p);
    if (!got) return std::string();
    cfg::RunReport report;
    report.scenario = "store";
    report.seed = 11;
    report.backend = "quorum";
    report.n = 3;
    report.config_hash = cfg::config_hash({{"plan", p.plan.to_json()}});
    report.metric("ops", got.value().ops_done);
    report.metric("final_time", got.value().final_time);
    return got.value().trace.to_jsonl({{"scenario", "store"}}) + report.to_csv();
  };

  struct Case {
    const char* name;
    std::function<std::string()> run;
  } cases[] = {{"motivating", motivating_bytes},
               {"attack", attack_bytes},
               {"attack-attested", attack_attested_bytes},
               {"mutex", mutex_bytes},
               {"store", store_bytes}};
  for (const auto& c : cases) {
    std::string a = c.run();
    std::string b = c.run();
    if (a.empty() || a != b) {
      detail = std::string("rerun of ") + c.name + " differed";
      return false;
    }
  }
  detail = "motivating/attack(q+a)/mutex/store traces and CSVs byte-identical across reruns";
  return true;
}

}  // namespace

int main() {
  std::string detail;

  bool c1 = clock_law_suite(detail);
  report(1, c1, "clock laws vs reachability oracle: " + detail);

  bool c2 = motivating(detail);
  report(2, c2, "three-process schedule reproduction: " + detail);

  bool c3 = attacks(detail);
  report(3, c3, "adversary regression: " + detail);

  bool c4 = thresholds(detail);
  report(4, c4, "quorum thresholds: " + detail);

  bool c5 = tamper(detail);
  report(5, c5, "certificate tamper fuzz: " + detail);

  bool c6 = mutex_suite(detail);
  report(6, c6, "mutex safety/liveness: " + detail);

  bool c7 = store_suite(detail);
  report(7, c7, "store correctness: " + detail);

  bool c8 = determinism(detail);
  report(8, c8, "determinism: " + detail);

  if (failures == 0) {
    std::cout << "acceptance: all 8 criteria PASS" << std::endl;
    return 0;
  }
  std::cout << "acceptance: " << failures << " criteria FAILED" << std::endl;
  return 1;
}
