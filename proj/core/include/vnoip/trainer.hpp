#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "vnoip/adam.hpp"
#include "vnoip/model.hpp"
#include "vnoip/sample.hpp"

namespace vnoip {

struct TrainConfig {
  HyperParams hp;
  double learning_rate = 2e-3;
  std::int64_t batch_size = 100;
  int patience = 15;        // early stopping, epochs without validation improvement
  int max_epochs = 300;
  std::uint64_t seed = 7;
  int threads = 1;          // evaluation fan-out; training itself is sequential
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_msle = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation snapshot
  int best_epoch = 0;
  double best_val_msle = 0.0;
  std::vector<EpochRecord> history;
};

/// Full optimization loop: seeded shuffle, gradient accumulation over batches,
/// one Adam step per batch, per-epoch validation MSLE through the inference
/// path, early stopping after `patience` epochs without improvement.
/// A NaN loss aborts with diagnostics (epoch, cascade id, loss components).
/// If `log` is given, one JSON record per epoch is written to it.
TrainResult train_model(const std::vector<CascadeSample>& train_set,
                        const std::vector<CascadeSample>& val_set, const TrainConfig& cfg,
                        std::ostream* log = nullptr);

struct EvalRecord {
  std::int64_t cascade_id = 0;
  double truth = 0.0;
  double prediction = 0.0;
};

struct EvalResult {
  double msle = 0.0;
  double mape = 0.0;
  std::vector<EvalRecord> records;
};

/// Metric terms on log2-transformed popularity.
double msle_term(double truth, double prediction);
double mape_term(double truth, double prediction);

/// Predict every sample through the inference path and aggregate MSLE/MAPE.
/// With threads > 1, forward passes fan out and results merge in input order,
/// so the metrics are bit-identical to a sequential run.
EvalResult evaluate(const std::vector<CascadeSample>& samples, const ModelParams& params,
                    int threads = 1);

/// Featurize a list of cascades against a global embedding table.
std::vector<CascadeSample> featurize(const std::vector<Cascade>& cascades,
                                     const EmbeddingTable& global_table, double t_obs,
                                     double t_pred, std::int64_t grid_points,
                                     const GraphWaveConfig& gw = {}, bool inference = false);

}  // namespace vnoip
