#pragma once

#include <cstdint>
#include <vector>

#include "vnoip/cascade.hpp"
#include "vnoip/embeddings.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

/// (normalized time, raw cumulative popularity) pair.
struct TrajectoryPoint {
  double time = 0.0;
  double popularity = 0.0;
};

/// Featurized cascade, ready for the model. Times are normalized by
/// t -> (t - t0) / (t_p - t0) so the whole problem lives in [0, 1].
class CascadeSample {
public:
  std::int64_t cascade_id = 0;
  std::vector<std::int64_t> users;    // observed event users, root first
  std::vector<double> times;          // normalized event times
  Tensor global_view;                 // {n, d} global-graph embedding rows
  Tensor cascade_view;                // {n, d} cascade-graph embedding rows
  std::vector<TrajectoryPoint> context;  // events up to t_o plus the (t_o, P(t_o)) endpoint
  std::vector<double> grid_times;        // T future grid times
  double observed_time = 0.0;            // normalized t_o
  double observed_popularity = 0.0;      // P(t_o)
  double delta_popularity = 0.0;         // label: P(t_p) - P(t_o)

  bool inference() const { return inference_; }

  /// Full target trajectory (context plus the T future grid points). Guarded:
  /// touching it on an inference-featurized sample is an information leak and
  /// throws.
  const std::vector<TrajectoryPoint>& target_trajectory() const;

  /// Ground-truth popularity at the T grid times (the target's future part).
  std::vector<double> target_grid_popularity() const;

private:
  friend CascadeSample build_sample(const Cascade&, const EmbeddingTable&, double, double,
                                    std::int64_t, const GraphWaveConfig&, bool);
  std::vector<TrajectoryPoint> target_;
  bool inference_ = false;
};

/// Featurize one cascade. Events are truncated to t <= t_o and to the first
/// 100 events; users absent from the global table get a zero row; the cascade
/// view is a GraphWave embedding of the observed repost graph. In inference
/// mode the target trajectory is zeroed and guarded.
CascadeSample build_sample(const Cascade& cascade, const EmbeddingTable& global_table,
                           double t_obs, double t_pred, std::int64_t grid_points,
                           const GraphWaveConfig& gw = {}, bool inference = false);

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<Cascade> train;
  std::vector<Cascade> val;
  std::vector<Cascade> test;
};

/// Drop cascades with fewer than `min_participants` observed participants by
/// t_obs, then split by a seeded shuffle.
DatasetSplit filter_and_split(const std::vector<Cascade>& cascades, double t_obs,
                              std::int64_t min_participants, const SplitRatios& ratios,
                              std::uint64_t seed);

}  // namespace vnoip
