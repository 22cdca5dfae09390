#pragma once

#include <json.hpp>

#include "vlc/deployment.hpp"
#include "vlc/sim.hpp"

namespace vlc::cfg {

using Json = nlohmann::json;

Json deployment_to_json(const Deployment& dep);
Deployment deployment_from_json(const Json& j);

/// Permission table (exact entries) as JSON: id -> list of public key hex.
Json perms_to_json(const PermissionTable& perms);
PermissionTable perms_from_json(const Json& j);

/// Signed config wrapper: {"payload": ..., "signer": hex, "sig": hex};
/// the signature covers the canonical dump of the payload.
Json sign_config(const Json& payload, const crypto::KeyPair& root);
Result<Json> verify_signed_config(const Json& wrapped, const crypto::PublicKey& root);

/// Benchmark/scenario report: one CSV row per metric, plus a JSON form.
/// Every run embeds its seed and a hash of the effective config.
struct RunReport {
  std::string scenario;
  uint64_t seed = 0;
  std::string backend;
  uint32_t n = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<std::pair<std::string, bool>> checks;

  void metric(const std::string& name, uint64_t v);
  void metric(const std::string& name, double v);
  void metric(const std::string& name, const std::string& v);
  void check(const std::string& name, bool pass);
  bool all_checks_pass() const;

  /// Fixed columns: scenario,seed,backend,n,metric,value
  std::string to_csv() const;
  Json to_json() const;
};

/// Latency quantiles over integer tick samples.
uint64_t quantile(std::vector<uint64_t> samples, double q);

std::string config_hash(const Json& j);

}  // namespace vlc::cfg
