#include "vlc/app_registry.hpp"

#include <map>
#include <mutex>

namespace vlc {

namespace {
std::mutex mu;
std::map<std::string, AppPredicateFactory>& table() {
  static std::map<std::string, AppPredicateFactory> t;
  return t;
}
}  // namespace

void register_app_predicate(const std::string& name, AppPredicateFactory factory) {
  std::lock_guard lk(mu);
  table()[name] = std::move(factory);
}

Result<AppPredicate> make_app_predicate(const std::string& name, const nlohmann::json& config) {
  std::lock_guard lk(mu);
  auto it = table().find(name);
  if (it == table().end())
    return Rejection{Reject::AppRuleViolation, "no application predicate named " + name};
  return it->second(config);
}

std::vector<std::string> registered_app_predicates() {
  std::lock_guard lk(mu);
  std::vector<std::string> names;
  for (const auto& [name, _] : table()) names.push_back(name);
  return names;
}

}  // namespace vlc
