#include "vlc/sim.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <sstream>

namespace vlc::sim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Send: return "send";
    case EventKind::Deliver: return "deliver";
    case EventKind::Drop: return "drop";
    case EventKind::Timer: return "timer";
  }
  return "?";
}

static EventKind kind_from_string(const std::string& s) {
  if (s == "send") return EventKind::Send;
  if (s == "deliver") return EventKind::Deliver;
  if (s == "drop") return EventKind::Drop;
  if (s == "timer") return EventKind::Timer;
  throw WireError("unknown event kind: " + s);
}

Json id_to_json(const EntityId& id) {
  // Readable form when safely ASCII; hex form otherwise. "0x" prefix
  // marks hex, so readable ids must not start with it.
  bool ascii = std::all_of(id.bytes.begin(), id.bytes.end(),
                           [](uint8_t c) { return c >= 0x20 && c < 0x7f; });
  std::string p(id.bytes.begin(), id.bytes.end());
  if (ascii && p.rfind("0x", 0) != 0) return p;
  return "0x" + to_hex(id.bytes);
}

EntityId id_from_json(const Json& j) {
  std::string s = j.get<std::string>();
  if (s.rfind("0x", 0) == 0) return EntityId(from_hex(std::string_view(s).substr(2)));
  return EntityId(s);
}

Json FaultPlan::to_json() const {
  Json j;
  j["seed"] = seed;
  j["delay_min"] = delay_min;
  j["delay_max"] = delay_max;
  j["reorder_p"] = reorder_p;
  j["drop_p"] = drop_p;
  j["duplicate_p"] = duplicate_p;
  j["reorder_extra"] = reorder_extra;
  Json links = Json::array();
  for (const auto& [key, d] : link_delays) {
    links.push_back({{"src", id_to_json(key.first)},
                     {"dst", id_to_json(key.second)},
                     {"min", d.min},
                     {"max", d.max}});
  }
  j["links"] = links;
  Json byz = Json::object();
  for (const auto& [id, script] : byzantine) byz[id_to_json(id).get<std::string>()] = script;
  j["byzantine"] = byz;
  return j;
}

FaultPlan FaultPlan::from_json(const Json& j) {
  FaultPlan p;
  p.seed = j.value("seed", 0ull);
  p.delay_min = j.value("delay_min", 1ull);
  p.delay_max = j.value("delay_max", 1ull);
  p.reorder_p = j.value("reorder_p", 0.0);
  p.drop_p = j.value("drop_p", 0.0);
  p.duplicate_p = j.value("duplicate_p", 0.0);
  p.reorder_extra = j.value("reorder_extra", 0ull);
  if (j.contains("links")) {
    for (const auto& l : j["links"]) {
      p.link_delays[{id_from_json(l["src"]), id_from_json(l["dst"])}] =
          LinkDelay{l["min"].get<uint64_t>(), l["max"].get<uint64_t>()};
    }
  }
  if (j.contains("byzantine")) {
    for (auto it = j["byzantine"].begin(); it != j["byzantine"].end(); ++it)
      p.byzantine[id_from_json(it.key())] = it.value().get<std::string>();
  }
  return p;
}

std::string Trace::to_jsonl(const Json& header) const {
  std::ostringstream out;
  Json h = header;
  h["type"] = "header";
  out << h.dump() << '\n';
  for (const SimEvent& e : events) {
    Json j;
    j["type"] = "event";
    j["t"] = e.time;
    j["q"] = e.seq;
    j["k"] = to_string(e.kind);
    j["src"] = id_to_json(e.src);
    j["dst"] = id_to_json(e.dst);
    j["m"] = e.msg_id;
    j["payload"] = to_hex(e.payload);
    out << j.dump() << '\n';
  }
  for (const AppRecord& a : app) {
    Json j;
    j["type"] = "app";
    j["t"] = a.time;
    j["q"] = a.seq;
    j["proc"] = id_to_json(a.proc);
    j["tag"] = a.tag;
    j["detail"] = a.detail;
    out << j.dump() << '\n';
  }
  Json s;
  s["type"] = "stats";
  s["messages"] = stats.messages;
  s["drops"] = stats.drops;
  s["duplicates"] = stats.duplicates;
  s["reorders"] = stats.reorders;
  s["final_time"] = final_time;
  out << s.dump() << '\n';
  return out.str();
}

std::pair<Json, Trace> Trace::from_jsonl(std::istream& in) {
  Json header;
  Trace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    std::string type = j.value("type", "");
    if (type == "header") {
      header = j;
    } else if (type == "event") {
      SimEvent e;
      e.time = j["t"].get<uint64_t>();
      e.seq = j["q"].get<uint64_t>();
      e.kind = kind_from_string(j["k"].get<std::string>());
      e.src = id_from_json(j["src"]);
      e.dst = id_from_json(j["dst"]);
      e.msg_id = j["m"].get<uint64_t>();
      e.payload = from_hex(j["payload"].get<std::string>());
      trace.events.push_back(std::move(e));
    } else if (type == "app") {
      AppRecord a;
      a.time = j["t"].get<uint64_t>();
      a.seq = j["q"].get<uint64_t>();
      a.proc = id_from_json(j["proc"]);
      a.tag = j["tag"].get<std::string>();
      a.detail = j["detail"];
      trace.app.push_back(std::move(a));
    } else if (type == "stats") {
      trace.stats.messages = j.value("messages", 0ull);
      trace.stats.drops = j.value("drops", 0ull);
      trace.stats.duplicates = j.value("duplicates", 0ull);
      trace.stats.reorders = j.value("reorders", 0ull);
      trace.final_time = j.value("final_time", 0ull);
    } else {
      throw WireError("unknown trace line type: " + type);
    }
  }
  return {header, trace};
}

uint64_t SimContext::now() const { return sim_->now_; }

const std::vector<EntityId>& SimContext::roster() const { return sim_->roster_; }

void SimContext::send(const EntityId& dst, Bytes payload) {
  sim_->submit_send(proc_, dst, std::move(payload));
}

void SimContext::set_timer(uint64_t delay, uint64_t timer_id) {
  Simulator::Pending p;
  p.time = sim_->now_ + delay;
  p.seq = sim_->next_seq_++;
  p.kind = EventKind::Timer;
  p.src = proc_;
  p.dst = proc_;
  p.msg_id = timer_id;
  sim_->schedule(std::move(p));
}

void SimContext::log(std::string tag, Json detail) {
  AppRecord a;
  a.time = sim_->now_;
  a.seq = sim_->next_seq_++;
  a.proc = proc_;
  a.tag = std::move(tag);
  a.detail = std::move(detail);
  sim_->trace_.app.push_back(std::move(a));
}

Simulator::Simulator(FaultPlan plan) : plan_(std::move(plan)) {}

void Simulator::add_process(const EntityId& id, Process* p) {
  if (started_) throw std::logic_error("add_process after run");
  procs_[id] = p;
  roster_.clear();
  for (const auto& [pid, _] : procs_) roster_.push_back(pid);
}

void Simulator::set_egress_hook(const EntityId& id, EgressHook hook) {
  egress_[id] = std::move(hook);
}

void Simulator::set_ingress_hook(const EntityId& id, IngressHook hook) {
  ingress_[id] = std::move(hook);
}

LinkDelay Simulator::link_delay(const EntityId& src, const EntityId& dst) const {
  auto it = plan_.link_delays.find({src, dst});
  if (it != plan_.link_delays.end()) return it->second;
  return LinkDelay{plan_.delay_min, plan_.delay_max};
}

void Simulator::schedule(Pending p) { queue_.push(std::move(p)); }

void Simulator::submit_send(const EntityId& src, const EntityId& dst, Bytes payload) {
  std::vector<std::pair<EntityId, Bytes>> outgoing;
  if (auto it = egress_.find(src); it != egress_.end()) {
    outgoing = it->second(dst, payload);
  } else {
    outgoing.emplace_back(dst, std::move(payload));
  }

  for (auto& [to, bytes] : outgoing) {
    uint64_t msg_id = ++next_msg_;
    trace_.stats.messages++;
    SimEvent sent;
    sent.time = now_;
    sent.seq = next_seq_++;
    sent.kind = EventKind::Send;
    sent.src = src;
    sent.dst = to;
    sent.payload = bytes;
    sent.msg_id = msg_id;
    trace_.events.push_back(sent);

    // Per-message fault stream: draws are keyed, not order-dependent.
    std::array<uint64_t, 3> key{fnv1a(src.bytes), fnv1a(to.bytes), msg_id};
    Rng rng = Rng::derive(plan_.seed, key);
    LinkDelay ld = link_delay(src, to);
    bool dropped = rng.chance(plan_.drop_p);
    uint64_t delay = std::max<uint64_t>(1, rng.range(ld.min, ld.max));
    if (rng.chance(plan_.reorder_p)) {
      uint64_t span = plan_.reorder_extra ? plan_.reorder_extra : (ld.max - ld.min + 2);
      delay += 1 + rng.below(span);
      trace_.stats.reorders++;
    }
    bool duplicated = rng.chance(plan_.duplicate_p);
    uint64_t dup_delay = std::max<uint64_t>(1, rng.range(ld.min, ld.max));

    Pending p;
    p.time = now_ + delay;
    p.seq = next_seq_++;
    p.kind = dropped ? EventKind::Drop : EventKind::Deliver;
    p.src = src;
    p.dst = to;
    p.payload = bytes;
    p.msg_id = msg_id;
    if (dropped) trace_.stats.drops++;
    schedule(std::move(p));

    if (!dropped && duplicated) {
      trace_.stats.duplicates++;
      Pending d;
      d.time = now_ + dup_delay;
      d.seq = next_seq_++;
      d.kind = EventKind::Deliver;
      d.src = src;
      d.dst = to;
      d.payload = std::move(bytes);
      d.msg_id = msg_id;
      schedule(std::move(d));
    }
  }
}

Result<Trace> Simulator::run(uint64_t max_events, std::function<bool()> until) {
  if (!started_) {
    started_ = true;
    for (const EntityId& id : roster_) {
      SimContext ctx(this, id);
      procs_[id]->on_start(ctx);
    }
  }
  if (until && until()) {
    trace_.final_time = now_;
    return trace_;
  }

  uint64_t processed = 0;
  while (!queue_.empty()) {
    if (processed >= max_events) {
      return Rejection{Reject::Livelock,
                       "event budget exhausted after " + std::to_string(processed) + " events"};
    }
    Pending p = queue_.top();
    queue_.pop();
    now_ = p.time;
    ++processed;

    switch (p.kind) {
      case EventKind::Drop: {
        SimEvent e{p.time, next_seq_++, EventKind::Drop, p.src, p.dst, p.payload, p.msg_id};
        trace_.events.push_back(std::move(e));
        break;
      }
      case EventKind::Deliver: {
        Bytes payload = p.payload;
        bool swallowed = false;
        if (auto it = ingress_.find(p.dst); it != ingress_.end()) {
          auto replaced = it->second(p.src, payload);
          if (!replaced.has_value())
            swallowed = true;
          else
            payload = std::move(*replaced);
        }
        SimEvent e{p.time, next_seq_++, swallowed ? EventKind::Drop : EventKind::Deliver, p.src,
                   p.dst, payload, p.msg_id};
        trace_.events.push_back(e);
        if (!swallowed) {
          auto proc = procs_.find(p.dst);
          if (proc != procs_.end()) {
            SimContext ctx(this, p.dst);
            proc->second->on_message(ctx, p.src, payload);
          }
        }
        break;
      }
      case EventKind::Timer: {
        SimEvent e{p.time, next_seq_++, EventKind::Timer, p.src, p.dst, {}, p.msg_id};
        trace_.events.push_back(std::move(e));
        auto proc = procs_.find(p.dst);
        if (proc != procs_.end()) {
          SimContext ctx(this, p.dst);
          proc->second->on_timer(ctx, p.msg_id);
        }
        break;
      }
      case EventKind::Send:
        break;  // sends are recorded synchronously, never queued
    }

    if (until && until()) {
      trace_.final_time = now_;
      return trace_;
    }
  }

  if (until) {
    return Rejection{Reject::Livelock, "event queue drained before the stop condition held"};
  }
  trace_.final_time = now_;
  return trace_;
}

}  // namespace vlc::sim
