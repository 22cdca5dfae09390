#include "vlc/mutex.hpp"
#include "vlc/scenarios.hpp"

namespace vlc::scen {

Result<MutexOutcome> run_mutex(uint32_t n, uint32_t contenders, BackendKind backend,
                               const sim::FaultPlan& plan, uint64_t hold_ticks) {
  std::vector<EntityId> ids;
  std::vector<crypto::KeyPair> keys;
  LocalBackendOptions opt;
  opt.backend = backend;
  opt.n = backend == BackendKind::Quorum ? 4 : 3;
  opt.f = backend == BackendKind::Quorum ? 1 : 0;
  opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  opt.seed = plan.seed;
  for (uint32_t i = 0; i < n; ++i) {
    ids.push_back(EntityId("M" + std::to_string(i)));
    keys.push_back(derive_keypair("mutex", plan.seed, i));
    opt.perms.exact[ids.back()] = {keys.back().pub};
  }
  auto svc = make_local_service(opt);

  std::vector<std::unique_ptr<mutex::MutexProcess>> procs;
  sim::Simulator sim(plan);
  for (uint32_t i = 0; i < n; ++i) {
    mutex::Options mo;
    mo.contend = i < contenders;
    mo.request_at = 1 + (i % 3);
    mo.hold_ticks = hold_ticks;
    mo.retry_every = 60;
    mo.release_rebroadcasts = plan.drop_p > 0 ? 3 : 0;
    procs.push_back(std::make_unique<mutex::MutexProcess>(ids[i], keys[i], *svc, mo));
    sim.add_process(ids[i], procs.back().get());
  }

  auto done = [&procs, contenders] {
    for (uint32_t i = 0; i < contenders; ++i)
      if (procs[i]->grants_done() < 1) return false;
    return true;
  };
  auto run = sim.run(400'000, contenders > 0 ? std::function<bool()>(done) : nullptr);

  if (!run) return run.error();
  MutexOutcome out;
  out.n = n;
  out.contenders = contenders;
  out.trace = run.take();
  out.messages = out.trace.stats.messages;
  out.all_granted = done();
  for (const auto& p : procs) out.grants += p->grants_done();

  // offline third-party validation of every grant's acquisition proof
  out.proofs_checked = true;
  std::map<EntityId, uint64_t> request_time;
  for (const auto& r : out.trace.app) {
    if (r.tag == "request") request_time[r.proc] = r.time;
    if (r.tag == "grant") {
      auto proof = mutex::decode_proof(from_hex(r.detail["proof"].get<std::string>()));
      std::string why;
      if (!mutex::check_acquisition(svc->deployment(), ids, proof, &why))
        out.proofs_checked = false;
      if (auto it = request_time.find(r.proc); it != request_time.end())
        out.grant_latencies.push_back(r.time - it->second);
    }
  }
  out.exclusion = check::mutex_exclusion(out.trace);
  out.ordered = check::mutex_ordered_access(out.trace);
  return out;
}

}  // namespace vlc::scen
