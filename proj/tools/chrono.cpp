// chrono: verifiable-logical-clock toolkit CLI.
//
// Subcommands: keys (config generation), attack (adversary regression
// runs), mutex (mutual-exclusion simulation), store bench / store serve,
// node (validator node server), check (offline trace checking).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "vlc/app_registry.hpp"
#include "vlc/config.hpp"
#include "vlc/mutex.hpp"
#include "vlc/net.hpp"
#include "vlc/scenarios.hpp"
#include "vlc/store.hpp"

using namespace vlc;
namespace fs = std::filesystem;
using cfg::Json;
using cfg::RunReport;

namespace {

BackendKind parse_backend(const std::string& s) {
  if (s == "quorum") return BackendKind::Quorum;
  if (s == "attested") return BackendKind::Attested;
  throw CLI::ValidationError("backend must be quorum or attested");
}

sim::FaultPlan load_plan(const std::string& path, uint64_t seed) {
  sim::FaultPlan plan;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot read fault plan: " + path);
    Json j = Json::parse(in);
    plan = sim::FaultPlan::from_json(j);
  } else {
    plan.delay_min = 1;
    plan.delay_max = 4;
  }
  plan.seed = seed;
  return plan;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

void emit_report(const RunReport& report, const std::string& out_dir,
                 const sim::Trace* trace = nullptr, const Json& header = {}) {
  std::cout << report.to_csv();
  for (const auto& [name, pass] : report.checks)
    std::cout << "check " << name << ": " << (pass ? "pass" : "FAIL") << "\n";
  if (out_dir.empty()) return;
  fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / (report.scenario + ".csv"), report.to_csv());
  write_file(dir / (report.scenario + ".json"), report.to_json().dump(2) + "\n");
  if (trace != nullptr) write_file(dir / (report.scenario + ".trace.jsonl"), trace->to_jsonl(header));
}

Json scenario_header(const std::string& family, const std::string& scenario, uint64_t seed,
                     BackendKind backend, const std::vector<EntityId>& roster,
                     const std::vector<EntityId>& byzantine, const Deployment& dep) {
  Json h;
  h["family"] = family;
  h["scenario"] = scenario;
  h["seed"] = seed;
  h["backend"] = to_string(backend);
  Json r = Json::array();
  for (const auto& id : roster) r.push_back(sim::id_to_json(id));
  h["roster"] = r;
  Json b = Json::array();
  for (const auto& id : byzantine) b.push_back(sim::id_to_json(id));
  h["byzantine"] = b;
  h["deployment"] = cfg::deployment_to_json(dep);
  return h;
}

int cmd_keys(const std::string& out_dir, uint64_t seed, const std::string& backend_name,
             uint32_t nodes, uint32_t f, uint32_t processes, uint32_t servers, uint32_t keys,
             uint32_t clients, uint16_t base_port) {
  BackendKind backend = parse_backend(backend_name);
  LocalBackendOptions opt;
  opt.backend = backend;
  opt.n = nodes;
  opt.f = f;
  opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  opt.seed = seed;
  Deployment dep = make_deployment(opt);

  PermissionTable perms;
  Json process_keys = Json::object();
  for (uint32_t i = 0; i < processes; ++i) {
    EntityId id("P" + std::to_string(i));
    auto kp = derive_keypair("proc", seed, i);
    perms.exact[id] = {kp.pub};
    process_keys[id.printable()] = {
        {"pub", to_hex(std::span<const uint8_t>(kp.pub))},
        {"secret_seed", "derived: role=proc seed=" + std::to_string(seed) +
                            " index=" + std::to_string(i)}};
  }
  crypto::KeyPair root = derive_keypair("config-root", seed, 0);

  Json cluster;
  cluster["seed"] = seed;
  cluster["backend"] = backend_name;
  cluster["n"] = nodes;
  cluster["f"] = f;
  cluster["keys"] = keys;
  Json server_list = Json::array();
  for (uint32_t i = 0; i < servers; ++i) {
    server_list.push_back({{"id", "S" + std::to_string(i)},
                           {"host", "127.0.0.1"},
                           {"port", base_port + i}});
  }
  cluster["servers"] = server_list;
  Json node_list = Json::array();
  for (uint32_t i = 0; i < nodes; ++i) {
    node_list.push_back({{"id", (backend == BackendKind::Quorum ? "qn" : "att") + std::to_string(i)},
                         {"host", "127.0.0.1"},
                         {"port", base_port + 100 + i}});
  }
  cluster["nodes"] = node_list;
  Json client_list = Json::array();
  for (uint32_t i = 0; i < clients; ++i) client_list.push_back("C" + std::to_string(i));
  cluster["clients"] = client_list;

  fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "deployment.json", cfg::deployment_to_json(dep).dump(2) + "\n");
  write_file(dir / "perms.json",
             cfg::sign_config(cfg::perms_to_json(perms), root).dump(2) + "\n");
  write_file(dir / "root.json",
             Json{{"pub", to_hex(std::span<const uint8_t>(root.pub))},
                  {"secret_seed", "derived: role=config-root seed=" + std::to_string(seed)}}
                     .dump(2) +
                 "\n");
  write_file(dir / "process_keys.json", process_keys.dump(2) + "\n");
  write_file(dir / "cluster.json", cluster.dump(2) + "\n");
  std::cout << "wrote deployment.json perms.json root.json process_keys.json cluster.json to "
            << out_dir << "\n";
  return 0;
}

int cmd_attack(const std::string& which, const std::string& backend_name, uint64_t seed,
               const std::string& out_dir) {
  std::vector<std::string> scenarios;
  if (which == "all")
    scenarios = scen::attack_names();
  else
    scenarios.push_back(which);
  std::vector<BackendKind> backends;
  if (backend_name == "both")
    backends = {BackendKind::Quorum, BackendKind::Attested};
  else
    backends.push_back(parse_backend(backend_name));

  bool all_pass = true;
  for (BackendKind backend : backends) {
    for (const auto& name : scenarios) {
      auto got = scen::run_attack(name, backend, seed);
      if (!got) {
        std::cerr << "attack " << name << " failed to run: " << got.error().detail << "\n";
        return 2;
      }
      const auto& out = got.value();
      bool pass = out.blocked && !out.misordered && out.honest_msg_delivered;
      all_pass = all_pass && pass;

      RunReport report;
      report.scenario = "attack-" + name;
      report.seed = seed;
      report.backend = to_string(backend);
      report.n = 3;
      report.config_hash = cfg::config_hash(
          {{"scenario", name}, {"backend", to_string(backend)}, {"seed", seed}});
      report.metric("verdict", out.verdict);
      report.check("forged-clock-blocked", out.blocked);
      report.check("no-misordered-delivery", !out.misordered);
      report.check("honest-message-delivered", out.honest_msg_delivered);
      std::cout << "scenario " << name << " [" << to_string(backend)
                << "] verdict: " << out.verdict << "\n";
      Json header = scenario_header("causal", report.scenario, seed, backend,
                                    {EntityId("P1"), EntityId("P2"), EntityId("P3")},
                                    {EntityId("P2")}, Deployment{});
      emit_report(report, out_dir, &out.trace, header);
    }
  }
  return all_pass ? 0 : 1;
}

int cmd_mutex(uint32_t n, uint32_t contenders, uint64_t seed, const std::string& backend_name,
              const std::string& plan_path, const std::string& out_dir) {
  BackendKind backend = parse_backend(backend_name);
  sim::FaultPlan plan = load_plan(plan_path, seed);
  auto got = scen::run_mutex(n, contenders, backend, plan);
  if (!got) {
    std::cerr << "mutex run failed: " << to_string(got.code()) << " " << got.error().detail
              << "\n";
    return 2;
  }
  const auto& out = got.value();

  RunReport report;
  report.scenario = "mutex";
  report.seed = seed;
  report.backend = backend_name;
  report.n = n;
  report.config_hash =
      cfg::config_hash({{"n", n}, {"contenders", contenders}, {"plan", plan.to_json()}});
  report.metric("grants", out.grants);
  report.metric("messages", out.messages);
  report.metric("latency_p50_ticks", cfg::quantile(out.grant_latencies, 0.50));
  report.metric("latency_p99_ticks", cfg::quantile(out.grant_latencies, 0.99));
  report.metric("latency_p999_ticks", cfg::quantile(out.grant_latencies, 0.999));
  report.metric("final_time_ticks", out.trace.final_time);
  report.check("all-granted", out.all_granted);
  report.check("exclusion", out.exclusion.pass);
  report.check("ordered-access", out.ordered.pass);
  report.check("acquisition-proofs", out.proofs_checked);
  if (!out.exclusion.pass) std::cerr << "violation: " << out.exclusion.violation << "\n";
  if (!out.ordered.pass) std::cerr << "violation: " << out.ordered.violation << "\n";

  std::vector<EntityId> roster;
  for (uint32_t i = 0; i < n; ++i) roster.push_back(EntityId("M" + std::to_string(i)));
  LocalBackendOptions opt;
  opt.backend = backend;
  opt.n = backend == BackendKind::Quorum ? 4 : 3;
  opt.f = backend == BackendKind::Quorum ? 1 : 0;
  opt.kinds = {FrontendKind::Update, FrontendKind::Mono};
  opt.seed = seed;
  Json header =
      scenario_header("mutex", "mutex", seed, backend, roster, {}, make_deployment(opt));
  emit_report(report, out_dir, &out.trace, header);
  return report.all_checks_pass() ? 0 : 1;
}

int cmd_store_bench(uint32_t servers, uint32_t clients, double ratio, uint64_t ops,
                    uint64_t seed, const std::string& backend_name, uint32_t keys,
                    const std::string& plan_path, bool byzantine, const std::string& out_dir) {
  scen::StoreParams params;
  params.servers = servers;
  params.clients = clients;
  params.write_ratio = ratio;
  params.ops = ops;
  params.seed = seed;
  params.backend = parse_backend(backend_name);
  params.keys = keys;
  params.byzantine_servers = byzantine;
  params.plan = load_plan(plan_path, seed);
  if (plan_path.empty()) {
    params.plan.delay_max = 6;
    params.plan.reorder_p = 0.2;
    params.plan.duplicate_p = 0.05;
  }

  auto got = scen::run_store(params);
  if (!got) {
    std::cerr << "store run failed: " << to_string(got.code()) << " " << got.error().detail
              << "\n";
    return 2;
  }
  const auto& out = got.value();

  RunReport report;
  report.scenario = byzantine ? "store-byzantine" : "store-bench";
  report.seed = seed;
  report.backend = backend_name;
  report.n = servers;
  report.config_hash = cfg::config_hash({{"servers", servers},
                                         {"clients", clients},
                                         {"ratio", ratio},
                                         {"ops", ops},
                                         {"keys", keys},
                                         {"plan", params.plan.to_json()}});
  report.metric("ops_accepted", out.ops_done);
  report.metric("final_time_ticks", out.final_time);
  double throughput = out.final_time == 0
                          ? 0.0
                          : static_cast<double>(out.ops_done) / static_cast<double>(out.final_time);
  report.metric("throughput_ops_per_tick", throughput);
  report.metric("latency_p50_ticks", cfg::quantile(out.op_latencies, 0.50));
  report.metric("latency_p99_ticks", cfg::quantile(out.op_latencies, 0.99));
  report.metric("latency_p999_ticks", cfg::quantile(out.op_latencies, 0.999));
  report.check("causal-sessions", out.causal.pass);
  report.check("convergence", out.converged);
  if (byzantine) report.check("zero-forged-accepts", out.forged_accepts == 0);
  if (!out.causal.pass) std::cerr << "violation: " << out.causal.violation << "\n";

  std::vector<EntityId> roster;
  for (uint32_t i = 0; i < servers; ++i) roster.push_back(EntityId("S" + std::to_string(i)));
  for (uint32_t i = 0; i < clients; ++i) roster.push_back(EntityId("C" + std::to_string(i)));
  Json header = scenario_header("store", report.scenario, seed, params.backend, roster,
                                byzantine ? roster : std::vector<EntityId>{}, Deployment{});
  emit_report(report, out_dir, &out.trace, header);
  return report.all_checks_pass() ? 0 : 1;
}

struct ClusterSetup {
  uint64_t seed;
  BackendKind backend;
  uint32_t n, f, keys;
  std::vector<EntityId> servers;
  std::map<EntityId, net::Addr> server_addrs;
  std::vector<EntityId> nodes;
  std::map<EntityId, net::Addr> node_addrs;
  std::vector<EntityId> clients;
};

ClusterSetup load_cluster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read cluster config: " + path);
  Json j = Json::parse(in);
  ClusterSetup c;
  c.seed = j["seed"].get<uint64_t>();
  c.backend = parse_backend(j["backend"].get<std::string>());
  c.n = j["n"].get<uint32_t>();
  c.f = j.value("f", 0u);
  c.keys = j.value("keys", 64u);
  for (const auto& s : j["servers"]) {
    EntityId id = sim::id_from_json(s["id"]);
    c.servers.push_back(id);
    c.server_addrs[id] = {s["host"].get<std::string>(), s["port"].get<uint16_t>()};
  }
  for (const auto& nd : j["nodes"]) {
    EntityId id = sim::id_from_json(nd["id"]);
    c.nodes.push_back(id);
    c.node_addrs[id] = {nd["host"].get<std::string>(), nd["port"].get<uint16_t>()};
  }
  for (const auto& cl : j["clients"]) c.clients.push_back(sim::id_from_json(cl));
  return c;
}

std::pair<LocalBackendOptions, store::PartitionMap> cluster_backend_options(
    const ClusterSetup& c) {
  std::vector<EntityId> keys;
  for (uint32_t i = 0; i < c.keys; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "k%04u", i);
    keys.push_back(EntityId(buf));
  }
  auto partition = store::PartitionMap::uniform(c.servers, keys);
  std::map<EntityId, crypto::PublicKey> server_pubs;
  for (uint32_t i = 0; i < c.servers.size(); ++i)
    server_pubs[c.servers[i]] = derive_keypair("server", c.seed, i).pub;
  Json acl_config;
  acl_config["clients"] = Json::object();
  for (uint32_t i = 0; i < c.clients.size(); ++i) {
    auto pub = derive_keypair("client", c.seed, i).pub;
    acl_config["clients"][c.clients[i].printable()] = to_hex(std::span<const uint8_t>(pub));
  }
  acl_config["allow_unlisted"] = true;

  LocalBackendOptions opt;
  opt.backend = c.backend;
  opt.n = c.n;
  opt.f = c.f;
  opt.kinds = {FrontendKind::Update, FrontendKind::App};
  opt.seed = c.seed;
  opt.allow_unproven_merged = true;
  opt.perms.fallback = [partition, server_pubs](const EntityId& key) {
    return std::set<crypto::PublicKey>{server_pubs.at(partition.owner(key))};
  };
  opt.app = make_app_predicate("store-acl", acl_config).take();
  return {opt, partition};
}

int cmd_store_serve(const std::string& config_path, const std::string& self_name) {
  ClusterSetup c = load_cluster(config_path);
  EntityId self(self_name);
  auto sit = std::find(c.servers.begin(), c.servers.end(), self);
  if (sit == c.servers.end()) {
    std::cerr << "server id " << self_name << " not in cluster config\n";
    return 2;
  }
  size_t index = static_cast<size_t>(sit - c.servers.begin());
  auto [opt, partition] = cluster_backend_options(c);

  std::unique_ptr<ProofService> svc;
  if (!c.nodes.empty()) {
    svc = std::make_unique<net::NetProofClient>(make_deployment(opt), self, c.node_addrs);
  } else {
    svc = make_local_service(opt);  // embedded single-trust-domain demo
  }

  std::map<EntityId, crypto::PublicKey> server_pubs;
  for (uint32_t i = 0; i < c.servers.size(); ++i)
    server_pubs[c.servers[i]] = derive_keypair("server", c.seed, i).pub;
  store::ServerOptions so;
  so.get_cost = 0;
  so.put_cost = 0;
  store::StoreServerProcess server(self, derive_keypair("server", c.seed, index), *svc,
                                   partition, c.servers, server_pubs, so);

  net::RealHost host(self, c.server_addrs.at(self).port, {}, server);
  host.start();
  for (const auto& [id, addr] : c.server_addrs)
    if (!(id == self)) host.add_peer(id, addr);
  std::cout << "store server " << self_name << " listening on port " << host.port() << "\n";
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
}

int cmd_node(const std::string& config_path, const std::string& self_name) {
  ClusterSetup c = load_cluster(config_path);
  EntityId self(self_name);
  auto nit = std::find(c.nodes.begin(), c.nodes.end(), self);
  if (nit == c.nodes.end()) {
    std::cerr << "node id " << self_name << " not in cluster config\n";
    return 2;
  }
  size_t index = static_cast<size_t>(nit - c.nodes.begin());
  auto [opt, partition] = cluster_backend_options(c);
  Deployment dep = make_deployment(opt);

  std::unique_ptr<sim::Process> proc;
  if (c.backend == BackendKind::Quorum) {
    auto node = std::make_unique<QuorumNode>(self, derive_keypair("qnode", c.seed, index),
                                             opt.perms, opt.app);
    proc = std::make_unique<net::QuorumNodeProcess>(std::move(node), dep);
  } else {
    auto signer = std::make_unique<AttestedSigner>(self, derive_keypair("attest", c.seed, index),
                                                   dep.attested.expected_measurement, opt.perms,
                                                   opt.app);
    proc = std::make_unique<net::AttestedNodeProcess>(std::move(signer), dep);
  }
  net::RealHost host(self, c.node_addrs.at(self).port, {}, *proc);
  host.start();
  std::cout << "validator node " << self_name << " listening on port " << host.port() << "\n";
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
}

int cmd_check(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot read " << trace_path << "\n";
    return 2;
  }
  auto [header, trace] = sim::Trace::from_jsonl(in);
  std::string family = header.value("family", "");
  std::set<EntityId> byzantine;
  if (header.contains("byzantine"))
    for (const auto& b : header["byzantine"]) byzantine.insert(sim::id_from_json(b));

  bool all_pass = true;
  for (const auto& [name, result] : check::run_checkers(family, trace, byzantine)) {
    std::cout << "check " << name << ": " << (result.pass ? "pass" : "FAIL") << "\n";
    if (!result.pass) {
      std::cout << "  violation: " << result.violation << "\n";
      all_pass = false;
    }
  }

  // mutex traces carry acquisition proofs; re-validate them offline
  if (family == "mutex" && header.contains("deployment")) {
    Deployment dep = cfg::deployment_from_json(header["deployment"]);
    std::vector<EntityId> roster;
    for (const auto& r : header["roster"]) roster.push_back(sim::id_from_json(r));
    for (const auto& rec : trace.app) {
      if (rec.tag != "grant") continue;
      std::string why;
      bool ok = false;
      try {
        auto proof = mutex::decode_proof(from_hex(rec.detail["proof"].get<std::string>()));
        ok = mutex::check_acquisition(dep, roster, proof, &why);
      } catch (const std::exception& e) {
        why = std::string("proof does not decode: ") + e.what();
      }
      if (!ok) {
        std::cout << "check acquisition-proof: FAIL\n  violation: grant at t=" << rec.time
                  << " q=" << rec.seq << " proc=" << rec.proc.printable() << ": " << why << "\n";
        all_pass = false;
      }
    }
    if (all_pass) std::cout << "check acquisition-proofs: pass\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chrono: verifiable logical clock toolkit"};
  app.require_subcommand(1);

  // keys
  auto* keys = app.add_subcommand("keys", "generate seeded key material and config files");
  std::string keys_out = "chrono-config";
  uint64_t keys_seed = 1;
  std::string keys_backend = "quorum";
  uint32_t keys_nodes = 4, keys_f = 1, keys_processes = 5, keys_servers = 3, keys_keys = 64,
           keys_clients = 2;
  uint16_t keys_port = 7000;
  keys->add_option("--out", keys_out, "output directory");
  keys->add_option("--seed", keys_seed, "derivation seed");
  keys->add_option("--backend", keys_backend, "quorum|attested");
  keys->add_option("--nodes", keys_nodes, "validator node count");
  keys->add_option("--f", keys_f, "max byzantine nodes");
  keys->add_option("--processes", keys_processes, "process identities");
  keys->add_option("--servers", keys_servers, "store servers");
  keys->add_option("--keys", keys_keys, "store key universe");
  keys->add_option("--clients", keys_clients, "store clients");
  keys->add_option("--base-port", keys_port, "first listen port");

  // attack
  auto* attack = app.add_subcommand("attack", "run clock-forging adversary scenarios");
  std::string attack_name = "all", attack_backend = "both", attack_out;
  uint64_t attack_seed = 7;
  attack->add_option("scenario", attack_name,
                     "erroneous-clock|cherry-pick|stale-own-clock|all");
  attack->add_option("--backend", attack_backend, "quorum|attested|both");
  attack->add_option("--seed", attack_seed, "simulation seed");
  attack->add_option("--out", attack_out, "artifact directory");

  // mutex
  auto* mtx = app.add_subcommand("mutex", "mutual exclusion simulation");
  uint32_t mutex_n = 5, mutex_contenders = 5;
  uint64_t mutex_seed = 7;
  std::string mutex_backend = "quorum", mutex_plan, mutex_out;
  mtx->add_option("--n", mutex_n, "process count");
  mtx->add_option("--contenders", mutex_contenders, "contending processes");
  mtx->add_option("--seed", mutex_seed, "simulation seed");
  mtx->add_option("--backend", mutex_backend, "quorum|attested");
  mtx->add_option("--plan", mutex_plan, "fault plan JSON file");
  mtx->add_option("--out", mutex_out, "artifact directory");

  // store
  auto* store_cmd = app.add_subcommand("store", "causally consistent store");
  auto* bench = store_cmd->add_subcommand("bench", "simulated benchmark");
  uint32_t st_servers = 3, st_clients = 2, st_keys = 64;
  double st_ratio = 0.01;
  uint64_t st_ops = 1000, st_seed = 1;
  std::string st_backend = "quorum", st_plan, st_out;
  bool st_byz = false;
  bench->add_option("--servers", st_servers, "server count");
  bench->add_option("--clients", st_clients, "client sessions");
  bench->add_option("--ratio", st_ratio, "write ratio (default 0.01)");
  bench->add_option("--ops", st_ops, "ops per client");
  bench->add_option("--seed", st_seed, "workload + fault seed");
  bench->add_option("--backend", st_backend, "quorum|attested");
  bench->add_option("--keys", st_keys, "key universe size");
  bench->add_option("--plan", st_plan, "fault plan JSON file");
  bench->add_flag("--byzantine", st_byz, "all servers forge replies");
  bench->add_option("--out", st_out, "artifact directory");

  auto* serve = store_cmd->add_subcommand("serve", "real-socket store server");
  std::string serve_config, serve_id = "S0";
  serve->add_option("--config", serve_config, "cluster.json")->required();
  serve->add_option("--id", serve_id, "server id from the config");

  // node
  auto* node = app.add_subcommand("node", "validator node server");
  std::string node_config, node_id = "qn0";
  node->add_option("--config", node_config, "cluster.json")->required();
  node->add_option("--id", node_id, "node id from the config");

  // check
  auto* check_cmd = app.add_subcommand("check", "validate a trace dump");
  std::string check_path;
  check_cmd->add_option("trace", check_path, "trace JSONL file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (keys->parsed())
      return cmd_keys(keys_out, keys_seed, keys_backend, keys_nodes, keys_f, keys_processes,
                      keys_servers, keys_keys, keys_clients, keys_port);
    if (attack->parsed()) return cmd_attack(attack_name, attack_backend, attack_seed, attack_out);
    if (mtx->parsed())
      return cmd_mutex(mutex_n, mutex_contenders, mutex_seed, mutex_backend, mutex_plan,
                       mutex_out);
    if (store_cmd->parsed()) {
      if (bench->parsed())
        return cmd_store_bench(st_servers, st_clients, st_ratio, st_ops, st_seed, st_backend,
                               st_keys, st_plan, st_byz, st_out);
      if (serve->parsed()) return cmd_store_serve(serve_config, serve_id);
      std::cerr << "store requires a subcommand (bench|serve)\n";
      return 2;
    }
    if (node->parsed()) return cmd_node(node_config, node_id);
    if (check_cmd->parsed()) return cmd_check(check_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
