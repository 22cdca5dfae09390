#pragma once

#include <json.hpp>

#include "vlc/validator.hpp"

namespace vlc {

/// Application validator predicates are pre-installed under a name and
/// instantiated from deployment config at startup.
using AppPredicateFactory = std::function<AppPredicate(const nlohmann::json& config)>;

void register_app_predicate(const std::string& name, AppPredicateFactory factory);
Result<AppPredicate> make_app_predicate(const std::string& name, const nlohmann::json& config);
std::vector<std::string> registered_app_predicates();

}  // namespace vlc
