#include "vlc/result.hpp"

namespace vlc {

const char* to_string(Reject r) {
  switch (r) {
    case Reject::InvalidInputClock: return "InvalidInputClock";
    case Reject::PermissionDenied: return "PermissionDenied";
    case Reject::BadSignature: return "BadSignature";
    case Reject::StaleBase: return "StaleBase";
    case Reject::AppRuleViolation: return "AppRuleViolation";
    case Reject::InsufficientQuorum: return "InsufficientQuorum";
    case Reject::InvalidProof: return "InvalidProof";
    case Reject::Stale: return "Stale";
    case Reject::Duplicate: return "Duplicate";
    case Reject::NotUpToDate: return "NotUpToDate";
    case Reject::WrongOwner: return "WrongOwner";
    case Reject::StaleRead: return "StaleRead";
    case Reject::CausalityViolated: return "CausalityViolated";
    case Reject::Livelock: return "Livelock";
    case Reject::Unavailable: return "Unavailable";
  }
  return "Unknown";
}

}  // namespace vlc
