#include "vnoip/sample.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "vnoip/errors.hpp"
#include "vnoip/rng.hpp"

namespace vnoip {

namespace {

constexpr std::int64_t kMaxEvents = 100;

}  // namespace

const std::vector<TrajectoryPoint>& CascadeSample::target_trajectory() const {
  if (inference_) {
    throw LeakError("target trajectory read on an inference sample (cascade " +
                    std::to_string(cascade_id) + ")");
  }
  return target_;
}

std::vector<double> CascadeSample::target_grid_popularity() const {
  const auto& tgt = target_trajectory();
  std::vector<double> out;
  out.reserve(grid_times.size());
  for (std::size_t i = tgt.size() - grid_times.size(); i < tgt.size(); ++i) {
    out.push_back(tgt[i].popularity);
  }
  return out;
}

CascadeSample build_sample(const Cascade& cascade, const EmbeddingTable& global_table,
                           double t_obs, double t_pred, std::int64_t grid_points,
                           const GraphWaveConfig& gw, bool inference) {
  if (t_pred <= t_obs) {
    throw ConfigError("prediction horizon " + std::to_string(t_pred) +
                      " must exceed the observation time " + std::to_string(t_obs));
  }
  if (t_obs < cascade.publish_time) {
    throw ConfigError("observation time precedes the cascade publish time");
  }
  if (grid_points < 1) throw ConfigError("need at least one future grid point");

  const double t0 = cascade.publish_time;
  const double denom = t_pred - t0;
  auto normalize = [&](double t) { return (t - t0) / denom; };

  CascadeSample s;
  s.cascade_id = cascade.id;
  s.inference_ = inference;
  s.observed_time = normalize(t_obs);

  // Observed events, truncated to the first kMaxEvents.
  std::vector<const CascadeEvent*> observed;
  for (const CascadeEvent& e : cascade.events) {
    if (e.time > t_obs) break;
    if (static_cast<std::int64_t>(observed.size()) >= kMaxEvents) break;
    observed.push_back(&e);
  }

  s.users.push_back(cascade.root);
  s.times.push_back(normalize(t0));
  for (const CascadeEvent* e : observed) {
    s.users.push_back(e->child);
    s.times.push_back(normalize(e->time));
  }

  // Context trajectory at event times, endpoint always appended.
  s.observed_popularity = cascade.popularity_at(t_obs);
  s.context.push_back({normalize(t0), 1.0});
  for (std::size_t i = 0; i < observed.size(); ++i) {
    s.context.push_back({normalize(observed[i]->time), static_cast<double>(i + 2)});
  }
  s.context.push_back({s.observed_time, s.observed_popularity});

  // Future grid and target trajectory.
  s.target_ = s.context;
  for (std::int64_t k = 1; k <= grid_points; ++k) {
    const double t_raw =
        t_obs + static_cast<double>(k) * (t_pred - t_obs) / static_cast<double>(grid_points);
    s.grid_times.push_back(normalize(t_raw));
    s.target_.push_back({normalize(t_raw), cascade.popularity_at(t_raw)});
  }
  s.delta_popularity = s.target_.back().popularity - s.observed_popularity;
  if (inference) {
    for (TrajectoryPoint& p : s.target_) p = TrajectoryPoint{};
  }

  // Global-view rows; users outside the table get zeros.
  const std::int64_t n = static_cast<std::int64_t>(s.users.size());
  const std::int64_t d = global_table.dim;
  Tensor global = Tensor::zeros({n, d});
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t u = s.users[static_cast<std::size_t>(i)];
    if (u >= 0 && u < global_table.rows) {
      for (std::int64_t j = 0; j < d; ++j) global(i, j) = global_table.at(u, j);
    }
  }
  s.global_view = std::move(global);

  // Cascade view: GraphWave on the observed repost graph (undirected).
  std::unordered_map<std::int64_t, std::int64_t> local;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  auto local_id = [&](std::int64_t user) {
    auto [it, inserted] = local.emplace(user, static_cast<std::int64_t>(local.size()));
    return it->second;
  };
  local_id(cascade.root);
  for (const CascadeEvent* e : observed) {
    const std::int64_t pu = local_id(e->parent);
    const std::int64_t cu = local_id(e->child);
    edges.emplace_back(pu, cu);
  }
  const GlobalGraph cg =
      GlobalGraph::from_edges(static_cast<std::int64_t>(local.size()), std::move(edges));
  const EmbeddingTable wave = embed_cascade(cg, d, gw);
  Tensor cview = Tensor::zeros({n, d});
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t li = local.at(s.users[static_cast<std::size_t>(i)]);
    for (std::int64_t j = 0; j < d; ++j) cview(i, j) = wave.at(li, j);
  }
  s.cascade_view = std::move(cview);
  return s;
}

DatasetSplit filter_and_split(const std::vector<Cascade>& cascades, double t_obs,
                              std::int64_t min_participants, const SplitRatios& ratios,
                              std::uint64_t seed) {
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  std::vector<const Cascade*> kept;
  for (const Cascade& c : cascades) {
    if (c.observed_participants(t_obs) >= min_participants) kept.push_back(&c);
  }

  Rng rng(seed);
  for (std::size_t i = kept.size(); i > 1; --i) {
    std::swap(kept[i - 1], kept[static_cast<std::size_t>(rng.uniform_int(
                               static_cast<std::int64_t>(i)))]);
  }

  const auto n = static_cast<std::int64_t>(kept.size());
  std::int64_t n_train = std::llround(ratios.train * static_cast<double>(n));
  std::int64_t n_val = std::llround(ratios.val * static_cast<double>(n));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  DatasetSplit split;
  for (std::int64_t i = 0; i < n; ++i) {
    const Cascade& c = *kept[static_cast<std::size_t>(i)];
    if (i < n_train) {
      split.train.push_back(c);
    } else if (i < n_train + n_val) {
      split.val.push_back(c);
    } else {
      split.test.push_back(c);
    }
  }
  return split;
}

}  // namespace vnoip
