#pragma once

#include "vlc/causal.hpp"
#include "vlc/service.hpp"
#include "vlc/trace_check.hpp"

namespace vlc::scen {

/// Three-process causal delivery schedule where the relayed message
/// overtakes the direct one.
struct MotivatingOutcome {
  ClockValue m1, m2, m3;  // clocks attached to the three messages
  bool m3_delivered_before_m1 = false;
  bool m1_discarded_stale = false;
  sim::Trace trace;
};

Result<MotivatingOutcome> run_motivating(BackendKind backend, uint64_t seed);

/// Scripted clock-forging adversaries and the defense verdict.
struct AttackOutcome {
  std::string scenario;
  BackendKind backend;
  std::string verdict;       // rejected-by-verify | rejected-by-mono
  bool blocked = false;      // forged clock never delivered
  bool misordered = false;   // victim delivered the pair out of causal order
  bool honest_msg_delivered = false;
  sim::Trace trace;
};

const std::vector<std::string>& attack_names();
Result<AttackOutcome> run_attack(const std::string& scenario, BackendKind backend, uint64_t seed);

/// Mutual exclusion simulation: n processes, the first `contenders`
/// request the resource and release it promptly.
struct MutexOutcome {
  uint32_t n = 0;
  uint32_t contenders = 0;
  uint64_t grants = 0;
  uint64_t messages = 0;
  bool all_granted = false;
  bool proofs_checked = false;  // every honest grant's proof passed offline check
  check::CheckResult exclusion;
  check::CheckResult ordered;
  std::vector<uint64_t> grant_latencies;  // request -> grant, in ticks
  sim::Trace trace;
};

Result<MutexOutcome> run_mutex(uint32_t n, uint32_t contenders, BackendKind backend,
                               const sim::FaultPlan& plan, uint64_t hold_ticks = 2);

/// Causal store simulation with seeded workload.
struct StoreOutcome {
  uint32_t servers = 0;
  uint32_t clients = 0;
  uint64_t ops_done = 0;
  uint64_t forged_accepts = 0;  // must stay zero under byzantine servers
  bool converged = false;       // identical key->version maps after quiescence
  bool versions_linear = false; // owners issued exactly 1,2,3,... per key
  check::CheckResult causal;
  std::vector<uint64_t> op_latencies;
  uint64_t final_time = 0;
  sim::Trace trace;
};

struct StoreParams {
  uint32_t servers = 3;
  uint32_t clients = 2;
  uint64_t ops = 1000;       // per client
  double write_ratio = 0.05;
  uint32_t keys = 64;
  BackendKind backend = BackendKind::Quorum;
  bool byzantine_servers = false;  // all servers forge replies without valid clocks
  uint64_t seed = 1;
  sim::FaultPlan plan;
};

Result<StoreOutcome> run_store(const StoreParams& params);

}  // namespace vlc::scen
