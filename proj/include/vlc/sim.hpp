#pragma once

#include <functional>
#include <optional>
#include <queue>

#include <json.hpp>

#include "vlc/clock.hpp"
#include "vlc/result.hpp"
#include "vlc/rng.hpp"

namespace vlc::sim {

using Json = nlohmann::json;

enum class EventKind : uint8_t { Send, Deliver, Drop, Timer };

const char* to_string(EventKind k);

/// One row of the global trace log. Totally ordered by (time, seq);
/// every Deliver/Drop references the Send with the same msg_id.
struct SimEvent {
  uint64_t time = 0;
  uint64_t seq = 0;
  EventKind kind = EventKind::Send;
  EntityId src, dst;
  Bytes payload;
  uint64_t msg_id = 0;  // timer id for Timer events
};

/// Application-level record written by process handlers; checkers read
/// these (delivers, grants, accepted ops) next to the transport events.
struct AppRecord {
  uint64_t time = 0;
  uint64_t seq = 0;
  EntityId proc;
  std::string tag;
  Json detail;
};

struct FaultStats {
  uint64_t messages = 0;
  uint64_t drops = 0;
  uint64_t duplicates = 0;
  uint64_t reorders = 0;
};

struct LinkDelay {
  uint64_t min = 1;
  uint64_t max = 1;
};

/// Seeded fault injection plan. Same seed + plan = bit-identical trace.
struct FaultPlan {
  uint64_t seed = 0;
  uint64_t delay_min = 1;
  uint64_t delay_max = 1;
  double reorder_p = 0.0;
  double drop_p = 0.0;
  double duplicate_p = 0.0;
  /// Extra delay span applied to reordered messages; 0 derives it from
  /// the base delay span.
  uint64_t reorder_extra = 0;
  /// Per-link delay overrides, e.g. to script a specific schedule.
  std::map<std::pair<EntityId, EntityId>, LinkDelay> link_delays;
  /// Byzantine script names per process; interpreted by scenario code.
  std::map<EntityId, std::string> byzantine;

  Json to_json() const;
  static FaultPlan from_json(const Json& j);
};

struct Trace {
  std::vector<SimEvent> events;
  std::vector<AppRecord> app;
  FaultStats stats;
  uint64_t final_time = 0;

  std::string to_jsonl(const Json& header) const;
  /// Returns the parsed header plus the trace.
  static std::pair<Json, Trace> from_jsonl(std::istream& in);
};

Json id_to_json(const EntityId& id);
EntityId id_from_json(const Json& j);

class Simulator;

/// Handler-side view of the hosting transport during one callback. The
/// simulator and the real-socket host both implement it, so protocol
/// code runs unchanged in either mode.
class Context {
 public:
  virtual ~Context() = default;
  virtual uint64_t now() const = 0;
  virtual const EntityId& self() const = 0;
  virtual const std::vector<EntityId>& roster() const = 0;
  virtual void send(const EntityId& dst, Bytes payload) = 0;
  virtual void set_timer(uint64_t delay, uint64_t timer_id) = 0;
  virtual void log(std::string tag, Json detail) = 0;

  void broadcast(const Bytes& payload) {
    for (const EntityId& dst : roster())
      if (!(dst == self())) send(dst, payload);
  }
};

/// Simulator-backed context.
class SimContext final : public Context {
 public:
  uint64_t now() const override;
  const EntityId& self() const override { return proc_; }
  const std::vector<EntityId>& roster() const override;
  void send(const EntityId& dst, Bytes payload) override;
  void set_timer(uint64_t delay, uint64_t timer_id) override;
  void log(std::string tag, Json detail) override;

 private:
  friend class Simulator;
  SimContext(Simulator* sim, EntityId proc) : sim_(sim), proc_(std::move(proc)) {}
  Simulator* sim_;
  EntityId proc_;
};

/// A deterministic message-driven process. Handlers must be pure
/// functions of (state, event); all state lives in the subclass.
class Process {
 public:
  virtual ~Process() = default;
  virtual void on_start(Context&) {}
  virtual void on_message(Context&, const EntityId& src, const Bytes& payload) = 0;
  virtual void on_timer(Context&, uint64_t /*timer_id*/) {}
};

/// Byzantine interception hooks: a script observes a process's outbox or
/// inbox and may substitute, multiply or swallow payloads.
using EgressHook =
    std::function<std::vector<std::pair<EntityId, Bytes>>(const EntityId& dst, const Bytes&)>;
using IngressHook = std::function<std::optional<Bytes>(const EntityId& src, const Bytes&)>;

/// Single-threaded deterministic discrete-event simulator. Virtual time
/// in integer ticks; per-message delays drawn from a PRNG stream keyed
/// by (seed, link, message number).
class Simulator {
 public:
  explicit Simulator(FaultPlan plan);

  void add_process(const EntityId& id, Process* p);
  void set_egress_hook(const EntityId& id, EgressHook hook);
  void set_ingress_hook(const EntityId& id, IngressHook hook);

  /// Executes events in (time, seq) order until `until` is satisfied,
  /// the queue drains, or the event budget runs out. An exhausted budget
  /// or an unmet condition at quiescence is a Livelock.
  Result<Trace> run(uint64_t max_events = 1'000'000, std::function<bool()> until = {});

  uint64_t now() const { return now_; }
  const std::vector<EntityId>& roster() const { return roster_; }
  const FaultPlan& plan() const { return plan_; }

 private:
  friend class SimContext;

  struct Pending {
    uint64_t time;
    uint64_t seq;
    EventKind kind;
    EntityId src, dst;
    Bytes payload;
    uint64_t msg_id;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  void submit_send(const EntityId& src, const EntityId& dst, Bytes payload);
  void schedule(Pending p);
  LinkDelay link_delay(const EntityId& src, const EntityId& dst) const;

  FaultPlan plan_;
  std::map<EntityId, Process*> procs_;
  std::map<EntityId, EgressHook> egress_;
  std::map<EntityId, IngressHook> ingress_;
  std::vector<EntityId> roster_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  Trace trace_;
  uint64_t now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_msg_ = 0;
  bool started_ = false;
};

}  // namespace vlc::sim
