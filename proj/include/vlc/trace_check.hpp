#pragma once

#include <set>

#include "vlc/sim.hpp"

namespace vlc::check {

struct CheckResult {
  bool pass = true;
  std::string violation;  // first violation site, human readable

  static CheckResult fail(std::string site) { return {false, std::move(site)}; }
};

/// Causal delivery: no honest process delivers message m after m' when
/// clock(m) is ordered before clock(m'). Reads "deliver" app records
/// (fields: src, payload, clock).
CheckResult causal_delivery(const sim::Trace& trace, const std::set<EntityId>& byzantine = {});

/// Mutual exclusion: holder intervals derived from "grant"/"release" app
/// records are pairwise disjoint among honest processes.
CheckResult mutex_exclusion(const sim::Trace& trace, const std::set<EntityId>& byzantine = {});

/// Ordered access: grants respect the happened-before order of their
/// request clocks ("grant" records carry request_clock).
CheckResult mutex_ordered_access(const sim::Trace& trace,
                                 const std::set<EntityId>& byzantine = {});

/// Causal consistency per client session: replays "op-accepted" records
/// (fields: session, op, key, version, vclock) and re-validates every
/// accept against the session's recomputed dependency clock.
CheckResult store_causal_sessions(const sim::Trace& trace);

/// Convenience: all checkers that apply to a trace, selected by the
/// scenario family named in the header ("causal", "mutex", "store").
std::vector<std::pair<std::string, CheckResult>> run_checkers(
    const std::string& family, const sim::Trace& trace, const std::set<EntityId>& byzantine = {});

}  // namespace vlc::check
