#include "vlc/scenarios.hpp"
#include "vlc/store.hpp"

namespace vlc::scen {

using store::PartitionMap;
using store::StoreClientProcess;
using store::StoreServerProcess;

Result<StoreOutcome> run_store(const StoreParams& params) {
  std::vector<EntityId> servers, clients, keys;
  std::map<EntityId, crypto::KeyPair> server_keys;
  std::map<EntityId, crypto::PublicKey> server_pubs, client_pubs;
  std::map<EntityId, crypto::KeyPair> client_keys;
  for (uint32_t i = 0; i < params.servers; ++i) {
    servers.push_back(EntityId("S" + std::to_string(i)));
    server_keys[servers.back()] = derive_keypair("server", params.seed, i);
    server_pubs[servers.back()] = server_keys[servers.back()].pub;
  }
  for (uint32_t i = 0; i < params.clients; ++i) {
    clients.push_back(EntityId("C" + std::to_string(i)));
    client_keys[clients.back()] = derive_keypair("client", params.seed, i);
    client_pubs[clients.back()] = client_keys[clients.back()].pub;
  }
  for (uint32_t i = 0; i < params.keys; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "k%04u", i);
    keys.push_back(EntityId(buf));
  }
  PartitionMap partition = PartitionMap::uniform(servers, keys);

  LocalBackendOptions opt;
  opt.backend = params.backend;
  opt.n = params.backend == BackendKind::Quorum ? 4 : 3;
  opt.f = params.backend == BackendKind::Quorum ? 1 : 0;
  opt.kinds = {FrontendKind::Update, FrontendKind::App};
  opt.seed = params.seed;
  opt.allow_unproven_merged = true;
  // key update permission follows the static partition
  opt.perms.fallback = [partition, server_pubs](const EntityId& key) {
    return std::set<crypto::PublicKey>{server_pubs.at(partition.owner(key))};
  };
  opt.app = store::make_acl_predicate(client_pubs, {}, /*allow_unlisted_clients=*/true);
  auto svc = make_local_service(opt);

  sim::Simulator sim(params.plan);
  std::vector<std::unique_ptr<StoreServerProcess>> server_procs;
  std::vector<std::unique_ptr<StoreClientProcess>> client_procs;
  for (const EntityId& s : servers) {
    store::ServerOptions so;
    so.forge_replies = params.byzantine_servers;
    server_procs.push_back(std::make_unique<StoreServerProcess>(
        s, server_keys.at(s), *svc, partition, servers, server_pubs, so));
    sim.add_process(s, server_procs.back().get());
  }
  for (const EntityId& c : clients) {
    auto workload =
        store::make_workload(params.seed, c, params.ops, params.write_ratio, params.keys);
    store::ClientOptions co;
    client_procs.push_back(std::make_unique<StoreClientProcess>(
        c, client_keys.at(c), svc->deployment(), partition, servers, server_pubs,
        std::move(workload), co));
    sim.add_process(c, client_procs.back().get());
  }

  auto done = [&client_procs] {
    for (const auto& c : client_procs)
      if (!c->done()) return false;
    return true;
  };
  uint64_t budget = 400'000 + 200 * params.ops * params.clients;
  auto phase1 = sim.run(budget, done);
  if (!phase1) return phase1.error();
  auto drained = sim.run(budget);  // let propagation quiesce
  if (!drained) return drained.error();

  StoreOutcome out;
  out.servers = params.servers;
  out.clients = params.clients;
  out.trace = drained.take();
  out.final_time = out.trace.final_time;
  for (const auto& c : client_procs) {
    out.ops_done += c->accepted();
    out.op_latencies.insert(out.op_latencies.end(), c->latencies().begin(),
                            c->latencies().end());
  }

  // post-quiescence convergence: identical key -> (version, value) maps
  // and no entry still parked in a pending set
  out.converged = true;
  for (const auto& s : server_procs)
    if (s->pending_count() != 0) out.converged = false;
  for (size_t i = 0; i + 1 < server_procs.size(); ++i) {
    const auto& a = server_procs[i]->entries();
    const auto& b = server_procs[i + 1]->entries();
    if (a.size() != b.size()) out.converged = false;
    for (const auto& [key, ea] : a) {
      auto it = b.find(key);
      if (it == b.end() || it->second.version() != ea.version() ||
          it->second.value != ea.value) {
        out.converged = false;
        break;
      }
    }
  }

  out.causal = check::store_causal_sessions(out.trace);

  // version linearity: the owner of each key issues versions 1,2,3,...
  out.versions_linear = true;
  std::map<EntityId, uint64_t> issued;
  for (const auto& r : out.trace.app) {
    if (r.tag != "install") continue;
    EntityId key = sim::id_from_json(r.detail["key"]);
    if (!(partition.owner(key) == r.proc)) continue;  // replicated install
    uint64_t version = r.detail["version"].get<uint64_t>();
    if (version != issued[key] + 1) out.versions_linear = false;
    issued[key] = version;
  }
  if (params.byzantine_servers) {
    // with every server forging unproven clocks, any accepted op would
    // be an accepted forgery
    uint64_t accepts = 0;
    for (const auto& r : out.trace.app)
      if (r.tag == "op-accepted") ++accepts;
    out.forged_accepts = accepts;
  }
  return out;
}

}  // namespace vlc::scen
