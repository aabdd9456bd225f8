#include "vnoip/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vnoip/errors.hpp"
#include "vnoip/rng.hpp"

namespace vnoip {

namespace {

GlobalGraph attachment_graph(std::int64_t n, double exponent, Rng& rng) {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  auto link = [&](std::int64_t u, std::int64_t v) {
    edges.emplace_back(u, v);
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  };

  if (n >= 2) link(0, 1);
  if (n >= 3) {
    link(0, 2);
    link(1, 2);
  }
  for (std::int64_t i = 3; i < n; ++i) {
    // Two distinct attachments, probability ~ (deg + 1)^exponent.
    std::int64_t first = -1;
    for (int pick = 0; pick < 2; ++pick) {
      double total = 0.0;
      for (std::int64_t j = 0; j < i; ++j) {
        if (j == first) continue;
        total += std::pow(static_cast<double>(deg[static_cast<std::size_t>(j)]) + 1.0, exponent);
      }
      double target = rng.uniform() * total;
      std::int64_t chosen = first == 0 ? 1 : 0;
      for (std::int64_t j = 0; j < i; ++j) {
        if (j == first) continue;
        target -= std::pow(static_cast<double>(deg[static_cast<std::size_t>(j)]) + 1.0, exponent);
        if (target <= 0.0) {
          chosen = j;
          break;
        }
      }
      link(i, chosen);
      first = chosen;
    }
  }
  return GlobalGraph::from_edges(n, std::move(edges));
}

std::vector<std::vector<std::int64_t>> adjacency_lists(const GlobalGraph& g) {
  std::vector<std::vector<std::int64_t>> adj(static_cast<std::size_t>(g.num_nodes));
  for (auto [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  return adj;
}

Cascade grow_cascade(const std::vector<std::vector<std::int64_t>>& adj, const GenConfig& cfg,
                     Rng rng) {
  Cascade c;
  c.root = rng.uniform_int(static_cast<std::int64_t>(adj.size()));
  c.publish_time = 0.0;

  struct Pending {
    std::int64_t user;
    double time;
  };
  std::vector<Pending> queue{{c.root, 0.0}};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Pending ev = queue[head];
    const double remaining = cfg.horizon - ev.time;
    if (remaining <= 0.0) continue;
    const auto& nbrs = adj[static_cast<std::size_t>(ev.user)];
    if (nbrs.empty()) continue;

    // Kernel mass on (0, remaining]; children beyond the horizon never exist.
    const double tail = -std::expm1(-cfg.decay * remaining);
    const std::int64_t kids = rng.poisson(cfg.branching * tail);
    for (std::int64_t k = 0; k < kids; ++k) {
      const double dt = -std::log1p(-rng.uniform() * tail) / cfg.decay;
      const std::int64_t child = nbrs[static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(nbrs.size())))];
      const double t = ev.time + dt;
      c.events.push_back(CascadeEvent{ev.user, child, t});
      queue.push_back(Pending{child, t});
    }
  }
  std::stable_sort(c.events.begin(), c.events.end(),
                   [](const CascadeEvent& a, const CascadeEvent& b) { return a.time < b.time; });
  return c;
}

}  // namespace

std::pair<GlobalGraph, std::vector<Cascade>> generate_synthetic(const GenConfig& cfg,
                                                                const GenOptions& opt) {
  if (cfg.branching >= 1.0) {
    throw ConfigError("branching factor " + std::to_string(cfg.branching) +
                      " is supercritical; cascades would be infinite");
  }
  if (cfg.branching < 0.0 || cfg.decay <= 0.0 || cfg.horizon <= 0.0 || cfg.num_users < 1) {
    throw ConfigError("invalid generator configuration");
  }

  Rng rng(cfg.seed);
  GlobalGraph graph = attachment_graph(cfg.num_users, cfg.attachment_exponent, rng);
  const auto adj = adjacency_lists(graph);

  std::int64_t want = opt.cascade_count > 0
                          ? opt.cascade_count
                          : std::max<std::int64_t>(1, std::llround(cfg.base_rate * cfg.horizon));
  const std::int64_t max_attempts =
      opt.max_attempts > 0 ? opt.max_attempts : 10000 * want;
  const double t_obs = opt.obs_fraction * cfg.horizon;

  std::vector<Cascade> cascades;
  cascades.reserve(static_cast<std::size_t>(want));
  for (std::int64_t attempt = 0; static_cast<std::int64_t>(cascades.size()) < want; ++attempt) {
    if (attempt >= max_attempts) {
      throw ConfigError("generator exhausted " + std::to_string(max_attempts) +
                        " attempts before producing " + std::to_string(want) +
                        " cascades passing the size filter");
    }
    Cascade c = grow_cascade(adj, cfg, rng.split(static_cast<std::uint64_t>(attempt)));
    if (opt.min_observed > 0 && c.observed_participants(t_obs) < opt.min_observed) continue;
    c.id = static_cast<std::int64_t>(cascades.size());
    cascades.push_back(std::move(c));
  }
  return {std::move(graph), std::move(cascades)};
}

}  // namespace vnoip
