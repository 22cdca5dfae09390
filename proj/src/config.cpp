#include "vlc/config.hpp"

#include <algorithm>
#include <cstdio>

namespace vlc::cfg {

using sim::id_from_json;
using sim::id_to_json;

static std::string hex32(const std::array<uint8_t, 32>& a) {
  return to_hex(std::span<const uint8_t>(a));
}

static std::array<uint8_t, 32> from_hex32(const std::string& s) {
  Bytes b = from_hex(s);
  if (b.size() != 32) throw WireError("expected 32-byte hex value");
  std::array<uint8_t, 32> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

Json deployment_to_json(const Deployment& dep) {
  Json j;
  j["backend"] = to_string(dep.backend);
  Json kinds = Json::array();
  for (FrontendKind k : dep.kinds) kinds.push_back(to_string(k));
  j["kinds"] = kinds;
  j["allow_unproven_merged"] = dep.allow_unproven_merged;
  if (dep.backend == BackendKind::Quorum) {
    j["n"] = dep.quorum.n;
    j["f"] = dep.quorum.f;
    Json reg = Json::object();
    for (const auto& [id, pk] : dep.quorum.registry)
      reg[id_to_json(id).get<std::string>()] = hex32(pk);
    j["registry"] = reg;
  } else {
    j["n"] = dep.attested.n;
    j["measurement"] = hex32(dep.attested.expected_measurement);
    Json roots = Json::object();
    for (const auto& [id, pk] : dep.attested.roots)
      roots[id_to_json(id).get<std::string>()] = hex32(pk);
    j["roots"] = roots;
  }
  return j;
}

static FrontendKind kind_from_string(const std::string& s) {
  if (s == "update") return FrontendKind::Update;
  if (s == "mono") return FrontendKind::Mono;
  if (s == "app") return FrontendKind::App;
  throw WireError("unknown frontend kind: " + s);
}

Deployment deployment_from_json(const Json& j) {
  Deployment dep;
  std::string backend = j.value("backend", "quorum");
  dep.backend = backend == "attested" ? BackendKind::Attested : BackendKind::Quorum;
  dep.kinds.clear();
  for (const auto& k : j["kinds"]) dep.kinds.insert(kind_from_string(k.get<std::string>()));
  dep.allow_unproven_merged = j.value("allow_unproven_merged", false);
  if (dep.backend == BackendKind::Quorum) {
    dep.quorum.n = j["n"].get<uint32_t>();
    dep.quorum.f = j["f"].get<uint32_t>();
    for (auto it = j["registry"].begin(); it != j["registry"].end(); ++it)
      dep.quorum.registry[id_from_json(it.key())] = from_hex32(it.value().get<std::string>());
  } else {
    dep.attested.n = j["n"].get<uint32_t>();
    dep.attested.expected_measurement = from_hex32(j["measurement"].get<std::string>());
    for (auto it = j["roots"].begin(); it != j["roots"].end(); ++it)
      dep.attested.roots[id_from_json(it.key())] = from_hex32(it.value().get<std::string>());
  }
  return dep;
}

Json perms_to_json(const PermissionTable& perms) {
  Json j = Json::object();
  for (const auto& [id, keys] : perms.exact) {
    Json arr = Json::array();
    for (const auto& pk : keys) arr.push_back(hex32(pk));
    j[id_to_json(id).get<std::string>()] = arr;
  }
  return j;
}

PermissionTable perms_from_json(const Json& j) {
  PermissionTable perms;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::set<crypto::PublicKey> keys;
    for (const auto& pk : it.value()) keys.insert(from_hex32(pk.get<std::string>()));
    perms.exact[id_from_json(it.key())] = std::move(keys);
  }
  return perms;
}

Json sign_config(const Json& payload, const crypto::KeyPair& root) {
  std::string canon = payload.dump();
  auto sig = crypto::sign(crypto::sha256(to_bytes(canon)), root.sec);
  Json wrapped;
  wrapped["payload"] = payload;
  wrapped["signer"] = hex32(root.pub);
  wrapped["sig"] = to_hex(std::span<const uint8_t>(sig));
  return wrapped;
}

Result<Json> verify_signed_config(const Json& wrapped, const crypto::PublicKey& root) {
  if (!wrapped.contains("payload") || !wrapped.contains("sig") || !wrapped.contains("signer"))
    return Rejection{Reject::BadSignature, "not a signed config"};
  auto signer = from_hex32(wrapped["signer"].get<std::string>());
  if (signer != root)
    return Rejection{Reject::PermissionDenied, "config signed by an unexpected key"};
  Bytes sig_bytes = from_hex(wrapped["sig"].get<std::string>());
  if (sig_bytes.size() != 64) return Rejection{Reject::BadSignature, "bad signature length"};
  crypto::Signature sig;
  std::copy(sig_bytes.begin(), sig_bytes.end(), sig.begin());
  std::string canon = wrapped["payload"].dump();
  if (!crypto::verify(crypto::sha256(to_bytes(canon)), sig, root))
    return Rejection{Reject::BadSignature, "config signature invalid"};
  return wrapped["payload"];
}

void RunReport::metric(const std::string& name, uint64_t v) {
  metrics.emplace_back(name, std::to_string(v));
}

void RunReport::metric(const std::string& name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  metrics.emplace_back(name, buf);
}

void RunReport::metric(const std::string& name, const std::string& v) {
  metrics.emplace_back(name, v);
}

void RunReport::check(const std::string& name, bool pass) { checks.emplace_back(name, pass); }

bool RunReport::all_checks_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

std::string RunReport::to_csv() const {
  std::string out = "scenario,seed,backend,n,metric,value\n";
  auto row = [&](const std::string& metric, const std::string& value) {
    out += scenario + "," + std::to_string(seed) + "," + backend + "," + std::to_string(n) + "," +
           metric + "," + value + "\n";
  };
  row("config_hash", config_hash);
  for (const auto& [name, value] : metrics) row(name, value);
  for (const auto& [name, pass] : checks) row("check." + name, pass ? "pass" : "fail");
  return out;
}

Json RunReport::to_json() const {
  Json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["backend"] = backend;
  j["n"] = n;
  j["config_hash"] = config_hash;
  Json m = Json::object();
  for (const auto& [name, value] : metrics) m[name] = value;
  j["metrics"] = m;
  Json c = Json::object();
  for (const auto& [name, pass] : checks) c[name] = pass;
  j["checks"] = c;
  return j;
}

uint64_t quantile(std::vector<uint64_t> samples, double q) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  size_t idx = static_cast<size_t>(q * static_cast<double>(samples.size()));
  if (idx >= samples.size()) idx = samples.size() - 1;
  return samples[idx];
}

std::string config_hash(const Json& j) {
  auto digest = crypto::sha256(to_bytes(j.dump()));
  return to_hex(std::span<const uint8_t>(digest)).substr(0, 16);
}

}  // namespace vlc::cfg
