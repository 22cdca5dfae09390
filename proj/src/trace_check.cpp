#include "vlc/trace_check.hpp"

#include <sstream>

namespace vlc::check {

using sim::AppRecord;
using sim::Trace;

static std::string site(const AppRecord& r) {
  std::ostringstream os;
  os << "t=" << r.time << " q=" << r.seq << " proc=" << r.proc.printable() << " tag=" << r.tag;
  return os.str();
}

CheckResult causal_delivery(const Trace& trace, const std::set<EntityId>& byzantine) {
  std::map<EntityId, std::vector<std::pair<ClockValue, const AppRecord*>>> delivered;
  for (const AppRecord& r : trace.app) {
    if (r.tag != "deliver") continue;
    if (byzantine.contains(r.proc)) continue;
    ClockValue clock = deserialize_clock(from_hex(r.detail["clock"].get<std::string>()));
    for (const auto& [earlier, rec] : delivered[r.proc]) {
      if (compare(clock, earlier) == Ordering4::BF) {
        return CheckResult::fail("delivery out of causal order at " + site(r) +
                                 " (clock ordered before one delivered at " + site(*rec) + ")");
      }
    }
    delivered[r.proc].emplace_back(std::move(clock), &r);
  }
  return {};
}

namespace {
struct Interval {
  uint64_t start_seq;
  uint64_t end_seq;  // UINT64_MAX while held
  const AppRecord* grant;
};
}  // namespace

CheckResult mutex_exclusion(const Trace& trace, const std::set<EntityId>& byzantine) {
  std::vector<Interval> closed;
  std::map<EntityId, Interval> held;
  for (const AppRecord& r : trace.app) {
    if (byzantine.contains(r.proc)) continue;
    if (r.tag == "grant") {
      if (held.contains(r.proc))
        return CheckResult::fail("double grant without release at " + site(r));
      held[r.proc] = Interval{r.seq, UINT64_MAX, &r};
    } else if (r.tag == "release") {
      auto it = held.find(r.proc);
      if (it == held.end()) return CheckResult::fail("release without grant at " + site(r));
      it->second.end_seq = r.seq;
      closed.push_back(it->second);
      held.erase(it);
    }
  }
  for (const auto& [proc, iv] : held) closed.push_back(iv);

  for (size_t i = 0; i < closed.size(); ++i) {
    for (size_t j = i + 1; j < closed.size(); ++j) {
      const Interval& a = closed[i];
      const Interval& b = closed[j];
      bool disjoint = a.end_seq < b.start_seq || b.end_seq < a.start_seq;
      if (!disjoint) {
        return CheckResult::fail("overlapping critical sections: " + site(*a.grant) + " and " +
                                 site(*b.grant));
      }
    }
  }
  return {};
}

CheckResult mutex_ordered_access(const Trace& trace, const std::set<EntityId>& byzantine) {
  std::vector<std::pair<ClockValue, const AppRecord*>> grants;
  for (const AppRecord& r : trace.app) {
    if (r.tag != "grant" || byzantine.contains(r.proc)) continue;
    grants.emplace_back(deserialize_clock(from_hex(r.detail["request_clock"].get<std::string>())),
                        &r);
  }
  // grants are in trace order; a later grant's request clock must not
  // precede an earlier grant's request clock
  for (size_t i = 0; i < grants.size(); ++i) {
    for (size_t j = i + 1; j < grants.size(); ++j) {
      if (compare(grants[j].first, grants[i].first) == Ordering4::BF) {
        return CheckResult::fail("grants out of request-clock order: " + site(*grants[i].second) +
                                 " granted before " + site(*grants[j].second));
      }
    }
  }
  return {};
}

CheckResult store_causal_sessions(const Trace& trace) {
  std::map<std::string, ClockValue> dep;  // per session
  for (const AppRecord& r : trace.app) {
    if (r.tag != "op-accepted") continue;
    std::string session = r.detail["session"].get<std::string>();
    std::string op = r.detail["op"].get<std::string>();
    EntityId key = sim::id_from_json(r.detail["key"]);
    uint64_t version = r.detail["version"].get<uint64_t>();
    ClockValue vclock = deserialize_clock(from_hex(r.detail["vclock"].get<std::string>()));
    ClockValue& c = dep[session];
    if (op == "get") {
      if (version < c.get(key)) {
        return CheckResult::fail("read below session dependency at " + site(r) + ": version " +
                                 std::to_string(version) + " < dep " +
                                 std::to_string(c.get(key)));
      }
      if (vclock.get(key) != version)
        return CheckResult::fail("vclock/version mismatch at " + site(r));
    } else if (op == "put") {
      if (compare(vclock, c) != Ordering4::AF) {
        return CheckResult::fail("put reply clock not after dependency clock at " + site(r));
      }
    }
    // accepted replies merge into the session dependency clock; every
    // coordinate is monotone by construction of max-merge
    c.merge_max(vclock);
  }
  return {};
}

std::vector<std::pair<std::string, CheckResult>> run_checkers(
    const std::string& family, const Trace& trace, const std::set<EntityId>& byzantine) {
  std::vector<std::pair<std::string, CheckResult>> out;
  if (family == "causal") {
    out.emplace_back("causal-delivery", causal_delivery(trace, byzantine));
  } else if (family == "mutex") {
    out.emplace_back("mutex-exclusion", mutex_exclusion(trace, byzantine));
    out.emplace_back("mutex-ordered-access", mutex_ordered_access(trace, byzantine));
  } else if (family == "store") {
    out.emplace_back("store-causal-sessions", store_causal_sessions(trace));
  } else {
    out.emplace_back(family, CheckResult::fail("unknown checker family: " + family));
  }
  return out;
}

}  // namespace vlc::check
