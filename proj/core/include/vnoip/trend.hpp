#pragma once

#include <vector>

#include "vnoip/layers.hpp"
#include "vnoip/ode.hpp"
#include "vnoip/sample.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

/// Mean and per-dimension standard deviation; std lives in (0.1, 1.0) by the
/// 0.1 + 0.9*sigmoid parameterization.
struct DiagonalGaussian {
  Tensor mean;
  Tensor std;
};

/// Parameters of the variational popularity-trend module. The latent drift and
/// increment heads are shared between the prior and posterior trajectories.
struct TrendVaeParams {
  std::int64_t latent_dim = 64;
  std::int64_t hidden_dim = 64;
  std::int64_t grid_points = 8;
  bool full = true;  // false: trend-free ablation, only the decoder exists

  Mlp traj_encoder;                  // [log2(P+1); t] -> z, 2-layer relu
  Tensor pool_query_traj;            // {z}
  Tensor pool_query_hidden;          // {h}
  Mlp prior_mean, prior_std;         // [traj pool; hidden pool] -> z, 2-layer relu
  Mlp post_mean, post_std;
  Mlp latent_drift;                  // z -> z, 3-layer tanh
  Mlp inc_mean, inc_std;             // z -> 1, 3-layer tanh
  Mlp decoder;                       // [H(t0); H(tn); log2(trend+1)] -> 1, 2-layer relu

  void visit(const std::string& prefix, const ParamVisitor& f);
};

TrendVaeParams make_trend_params(std::int64_t latent_dim, std::int64_t hidden_dim,
                                 std::int64_t grid_points, bool full, Rng& rng);

/// Per-point perceptron over [log2(P+1); normalized t]; {n, z}.
Tensor encode_trajectory(const std::vector<TrajectoryPoint>& traj, const Mlp& encoder);

/// Unmasked scaled dot-product attention with a trainable query; keys double
/// as values. {z} x {n, z} -> {z}.
Tensor pool(const Tensor& query, const Tensor& keys);

struct InferredLatents {
  DiagonalGaussian prior;
  DiagonalGaussian post;
  Tensor z0_prior;
  Tensor z0_post;
};

/// Prior heads consume [traj_ctx; hidden], posterior heads [traj_tgt; hidden].
/// Both samples reuse the same noise draw (paired reparameterization).
InferredLatents infer_latents(const Tensor& traj_ctx, const Tensor& traj_tgt,
                              const Tensor& hidden, const TrendVaeParams& p,
                              const Tensor& noise);

/// Prior-only inference (the test-time path; never sees the target trajectory).
DiagonalGaussian infer_prior(const Tensor& traj_ctx, const Tensor& hidden,
                             const TrendVaeParams& p);

struct TrendOutput {
  Tensor popularity;    // {T} generated popularity at the grid times
  Tensor latents;       // {T, z} latent state at the grid times
  Tensor z0;            // initial latent sample
  Tensor final_latent() const;  // z at the horizon (last grid point)
};

/// Mean of a normal(mu, sigma) truncated below at zero, on size-1 tensors:
/// mu + sigma * phi(alpha) / (1 - Phi(alpha)) with alpha = -mu/sigma.
/// Guards: the survival probability is floored at 1e-12 and for alpha > 6 the
/// asymptotic inverse Mills ratio alpha + 1/alpha is used. Always positive.
Tensor truncated_normal_increment(const Tensor& mu, const Tensor& sigma);

/// Integrate the augmented state [z; P] with dopri5 from t_start over the
/// grid. dP/dt is truncated_normal_increment(mu_f(z), sigma_f(z)), so the
/// generated trend is strictly increasing.
TrendOutput generate_trend(const Tensor& z0, double observed_popularity, double t_start,
                           const std::vector<double>& grid_times, const TrendVaeParams& p,
                           const SolveConfig& cfg);

/// Closed-form diagonal-Gaussian KL(q || p), summed over dimensions; rank-0.
Tensor kl_gaussians(const DiagonalGaussian& q, const DiagonalGaussian& p);

/// Symmetric alignment of the horizon latents: 1/2 ||a - b||^2 (each point
/// read as a unit-variance Gaussian center, which makes the two KL directions
/// coincide); rank-0.
Tensor kd_loss(const Tensor& z_prior_tp, const Tensor& z_post_tp);

/// Softplus(decoder([H(t0); H(tn); log2(trend+1)])); {1}.
Tensor decode(const Tensor& h_first, const Tensor& h_last, const Tensor& trend,
              const Mlp& decoder);

/// Trend-free decode for the ablated model; {1}.
Tensor decode_sequence_only(const Tensor& h_first, const Tensor& h_last, const Mlp& decoder);

/// L_main + lambda1 * L_rg + lambda2 * (L_kl + L_kd); all operands rank-0.
Tensor total_loss(const Tensor& main, const Tensor& rg, const Tensor& kl, const Tensor& kd,
                  double lambda1, double lambda2);

}  // namespace vnoip
