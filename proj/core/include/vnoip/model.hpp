#pragma once

#include <cstdint>
#include <string>

#include "vnoip/sample.hpp"
#include "vnoip/sequence.hpp"
#include "vnoip/trend.hpp"

namespace vnoip {

/// Model-shape and loss hyperparameters. Everything a checkpoint's parameter
/// shapes depend on lives here.
struct HyperParams {
  std::int64_t embed_dim = 40;    // global and cascade graph embedding width
  std::int64_t hidden_dim = 64;
  std::int64_t latent_dim = 64;
  std::int64_t grid_points = 8;   // T future points
  double lambda1 = 0.3;
  double lambda2 = 0.6;
  double euler_step = 0.05;
  double dopri_rtol = 1e-5;
  double dopri_atol = 1e-6;
  int max_steps = 10000;
  bool trend_module = true;       // false: sequence-only ablation

  SolveConfig trend_solver() const;
  std::uint64_t hash() const;
};

/// Every trainable tensor in the model; name-addressable through visit().
struct ModelParams {
  HyperParams hp;
  SequenceEncoderParams seq;
  TrendVaeParams trend;

  static ModelParams init(const HyperParams& hp, std::uint64_t seed);

  void visit(const ParamVisitor& f);
  /// Copy whose tensors are differentiable leaves of the given tape.
  ModelParams bound_to(Tape& tape) const;
  std::int64_t parameter_count() const;
};

/// Detached per-term loss values for logging and NaN diagnostics.
struct ForwardStats {
  double main = 0.0;
  double rg = 0.0;
  double kl = 0.0;
  double kd = 0.0;
  double prediction = 0.0;
};

/// Shared encoder path: bidirectional context, jump-ODE sweeps, fusion. {n,h}.
Tensor encode_cascade_states(const ModelParams& params, const CascadeSample& sample);

/// Training loss for one cascade (rank-0, on the params' tape). Uses the
/// posterior trend for the prediction and pairs prior/posterior samples on the
/// given noise draw.
Tensor forward_loss(const ModelParams& params, const CascadeSample& sample, const Tensor& noise,
                    ForwardStats* stats = nullptr);

/// Inference-path prediction: prior mean latent, prior-generated trend, no
/// access to any post-observation popularity.
double predict(const ModelParams& params, const CascadeSample& sample);

/// Prediction plus the prior-generated trend values (for plotting).
struct Prediction {
  double delta_hat = 0.0;
  std::vector<double> trend;  // popularity at the grid times
};
Prediction predict_with_trend(const ModelParams& params, const CascadeSample& sample);

}  // namespace vnoip
