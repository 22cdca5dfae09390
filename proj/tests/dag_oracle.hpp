// Independent reachability oracle for clock-law tests: random histories
// of update events with per-id linearity (each id's updates chain through
// the id's previous output, as a sequential process would), checked
// against the transitive closure of the event DAG.
#pragma once

#include <bitset>
#include <vector>

#include "vlc/clock.hpp"
#include "vlc/rng.hpp"

namespace vlc::testing {

struct DagHistory {
  static constexpr size_t kMax = 64;

  std::vector<ClockValue> clocks;                // clock of each event
  std::vector<std::vector<size_t>> inputs;       // event -> input events
  std::vector<std::bitset<kMax>> reach;          // transitive closure

  bool path(size_t a, size_t b) const { return a != b && reach[a][b]; }
};

inline DagHistory random_history(uint64_t seed, size_t max_events, size_t id_pool) {
  Rng rng(seed);
  DagHistory h;
  size_t n = 1 + rng.below(max_events);
  std::vector<EntityId> ids;
  for (size_t i = 0; i < id_pool; ++i) ids.push_back(EntityId("id" + std::to_string(i)));
  // latest update event per id, or -1
  std::vector<ptrdiff_t> latest(id_pool, -1);

  for (size_t e = 0; e < n; ++e) {
    size_t id_idx = rng.below(id_pool);
    std::vector<size_t> in;
    ClockValue base;
    if (latest[id_idx] >= 0) {
      in.push_back(static_cast<size_t>(latest[id_idx]));
      base = h.clocks[in[0]];
    }
    std::vector<ClockValue> merged;
    if (e > 0) {
      size_t extra = rng.below(3);
      for (size_t k = 0; k < extra; ++k) {
        size_t pick = rng.below(e);
        in.push_back(pick);
        merged.push_back(h.clocks[pick]);
      }
    }
    h.clocks.push_back(update_value(ids[id_idx], base, merged));
    h.inputs.push_back(std::move(in));
    latest[id_idx] = static_cast<ptrdiff_t>(e);
  }

  // Transitive closure in topological (index) order: a reaches e iff a
  // is an input of e or a reaches one of e's inputs.
  h.reach.assign(n, {});
  for (size_t e = 0; e < n; ++e) {
    for (size_t a = 0; a < e; ++a) {
      for (size_t from : h.inputs[e]) {
        if (a == from || h.reach[a][from]) {
          h.reach[a][e] = true;
          break;
        }
      }
    }
  }
  return h;
}

}  // namespace vlc::testing
