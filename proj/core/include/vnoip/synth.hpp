#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vnoip/cascade.hpp"
#include "vnoip/graph.hpp"

namespace vnoip {

/// Synthetic corpus settings. All randomness derives from `seed`.
struct GenConfig {
  std::int64_t num_users = 500;
  double attachment_exponent = 1.0;  // preferential-attachment strength
  double base_rate = 2.0;            // cascade arrivals per unit time
  double branching = 0.6;            // mean offspring per event, must stay subcritical
  double decay = 1.0;                // exponential kernel rate
  double horizon = 100.0;            // per-cascade duration; events live in [0, horizon]
  std::uint64_t seed = 42;
};

/// Optional rejection controls layered on top of GenConfig by the CLI.
struct GenOptions {
  std::int64_t cascade_count = 0;   // 0: derive round(base_rate * horizon)
  std::int64_t min_observed = 0;    // keep only cascades with >= this many participants...
  double obs_fraction = 0.3;        // ...by obs_fraction * horizon (when min_observed > 0)
  std::int64_t max_attempts = 0;    // 0: 10000 * count
};

/// Preferential-attachment global graph plus Hawkes-branching cascades:
/// every event spawns children at rate branching * decay * exp(-decay * dt),
/// each child user drawn uniformly from the parent's graph neighbours.
/// Deterministic under seed.
std::pair<GlobalGraph, std::vector<Cascade>> generate_synthetic(const GenConfig& cfg,
                                                                const GenOptions& opt = {});

}  // namespace vnoip
