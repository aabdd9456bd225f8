#include "vnoip/trend.hpp"

#include <cmath>

#include "vnoip/errors.hpp"
#include "vnoip/ops.hpp"

namespace vnoip {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;

/// sigma = 0.1 + 0.9 * sigmoid(head output), strictly inside (0.1, 1.0).
Tensor bounded_std(const Tensor& raw) { return add(mul(sigmoid(raw), 0.9), 0.1); }

/// Inverse Mills ratio phi(a)/(1 - Phi(a)) on a size-1 tensor. Guarded: the
/// denominator is floored at 1e-12, and for a > 6 the asymptotic a + 1/a
/// replaces the 0/0-prone direct form.
Tensor hazard(const Tensor& alpha) {
  if (alpha.values()[0] > 6.0) {
    return add(alpha, div(Tensor::full({1}, 1.0), alpha));
  }
  Tensor phi = mul(exp_act(mul(square(alpha), -0.5)), kInvSqrt2Pi);
  Tensor cdf = mul(add(erf_act(mul(alpha, kInvSqrt2)), 1.0), 0.5);
  Tensor survival = clamp_min(sub(Tensor::full({1}, 1.0), cdf), 1e-12);
  return div(phi, survival);
}

}  // namespace

Tensor truncated_normal_increment(const Tensor& mu, const Tensor& sigma) {
  if (mu.size() != 1 || sigma.size() != 1) {
    throw ShapeError("truncated_normal_increment expects size-1 tensors");
  }
  Tensor alpha = neg(div(mu, sigma));
  return add(mu, mul(sigma, hazard(alpha)));
}

void TrendVaeParams::visit(const std::string& prefix, const ParamVisitor& f) {
  if (full) {
    traj_encoder.visit(prefix + ".traj_encoder", f);
    f(prefix + ".pool_query_traj", pool_query_traj);
    f(prefix + ".pool_query_hidden", pool_query_hidden);
    prior_mean.visit(prefix + ".prior_mean", f);
    prior_std.visit(prefix + ".prior_std", f);
    post_mean.visit(prefix + ".post_mean", f);
    post_std.visit(prefix + ".post_std", f);
    latent_drift.visit(prefix + ".latent_drift", f);
    inc_mean.visit(prefix + ".inc_mean", f);
    inc_std.visit(prefix + ".inc_std", f);
  }
  decoder.visit(prefix + ".decoder", f);
}

TrendVaeParams make_trend_params(std::int64_t latent_dim, std::int64_t hidden_dim,
                                 std::int64_t grid_points, bool full, Rng& rng) {
  TrendVaeParams p;
  p.latent_dim = latent_dim;
  p.hidden_dim = hidden_dim;
  p.grid_points = grid_points;
  p.full = full;
  if (full) {
    p.traj_encoder = make_mlp(2, latent_dim, latent_dim, 2, Activation::relu, rng);
    p.pool_query_traj = Tensor::zeros({latent_dim});
    for (double& v : p.pool_query_traj.values()) v = 0.1 * rng.normal();
    p.pool_query_hidden = Tensor::zeros({hidden_dim});
    for (double& v : p.pool_query_hidden.values()) v = 0.1 * rng.normal();
    const std::int64_t joint = latent_dim + hidden_dim;
    p.prior_mean = make_mlp(joint, latent_dim, latent_dim, 2, Activation::relu, rng);
    p.prior_std = make_mlp(joint, latent_dim, latent_dim, 2, Activation::relu, rng);
    p.post_mean = make_mlp(joint, latent_dim, latent_dim, 2, Activation::relu, rng);
    p.post_std = make_mlp(joint, latent_dim, latent_dim, 2, Activation::relu, rng);
    p.latent_drift = make_mlp(latent_dim, latent_dim, latent_dim, 3, Activation::tanh, rng);
    p.inc_mean = make_mlp(latent_dim, latent_dim, 1, 3, Activation::tanh, rng);
    p.inc_std = make_mlp(latent_dim, latent_dim, 1, 3, Activation::tanh, rng);
  }
  const std::int64_t dec_in = full ? 2 * hidden_dim + grid_points : 2 * hidden_dim;
  p.decoder = make_mlp(dec_in, hidden_dim, 1, 2, Activation::relu, rng);
  return p;
}

Tensor encode_trajectory(const std::vector<TrajectoryPoint>& traj, const Mlp& encoder) {
  if (traj.empty()) throw ShapeError("encode_trajectory: empty trajectory");
  std::vector<double> features;
  features.reserve(traj.size() * 2);
  for (const TrajectoryPoint& pt : traj) {
    features.push_back(log2p1(pt.popularity));
    features.push_back(pt.time);
  }
  Tensor input({static_cast<std::int64_t>(traj.size()), 2}, std::move(features));
  return encoder.apply(input);
}

Tensor pool(const Tensor& query, const Tensor& keys) {
  if (keys.rank() != 2 || query.rank() != 1 || keys.dim(1) != query.dim(0)) {
    throw ShapeError("pool: query " + query.shape_string() + " vs keys " + keys.shape_string());
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(query.dim(0)));
  Tensor scores = mul(matmul(reshape(query, {1, query.dim(0)}), transpose(keys)), inv_sqrt_d);
  Tensor weights = softmax_rows(scores);
  return reshape(matmul(weights, keys), {keys.dim(1)});
}

InferredLatents infer_latents(const Tensor& traj_ctx, const Tensor& traj_tgt,
                              const Tensor& hidden, const TrendVaeParams& p,
                              const Tensor& noise) {
  InferredLatents out;
  const Tensor prior_in = concat({traj_ctx, hidden});
  const Tensor post_in = concat({traj_tgt, hidden});
  out.prior.mean = p.prior_mean.apply_vec(prior_in);
  out.prior.std = bounded_std(p.prior_std.apply_vec(prior_in));
  out.post.mean = p.post_mean.apply_vec(post_in);
  out.post.std = bounded_std(p.post_std.apply_vec(post_in));
  out.z0_prior = add(out.prior.mean, mul(out.prior.std, noise));
  out.z0_post = add(out.post.mean, mul(out.post.std, noise));
  return out;
}

DiagonalGaussian infer_prior(const Tensor& traj_ctx, const Tensor& hidden,
                             const TrendVaeParams& p) {
  const Tensor prior_in = concat({traj_ctx, hidden});
  return DiagonalGaussian{p.prior_mean.apply_vec(prior_in),
                          bounded_std(p.prior_std.apply_vec(prior_in))};
}

Tensor TrendOutput::final_latent() const { return row(latents, latents.dim(0) - 1); }

TrendOutput generate_trend(const Tensor& z0, double observed_popularity, double t_start,
                           const std::vector<double>& grid_times, const TrendVaeParams& p,
                           const SolveConfig& cfg) {
  if (grid_times.empty()) throw ConfigError("generate_trend: empty grid");
  for (double t : grid_times) {
    if (t <= t_start) throw ConfigError("generate_trend: grid must lie after t_start");
  }
  const std::int64_t zd = z0.dim(0);

  const OdeFunc dynamics = [&p, zd](const Tensor& y) {
    Tensor z = slice(y, 0, zd);
    Tensor inc_mu = p.inc_mean.apply_vec(z);
    Tensor inc_sigma = bounded_std(p.inc_std.apply_vec(z));
    Tensor dp = truncated_normal_increment(inc_mu, inc_sigma);
    return concat({p.latent_drift.apply_vec(z), dp});
  };

  Tensor y0 = concat({z0, Tensor::full({1}, observed_popularity)});
  Tensor states = solve_dopri5(dynamics, y0, t_start, grid_times, cfg);

  TrendOutput out;
  out.z0 = z0;
  out.popularity = col(states, zd);
  std::vector<Tensor> zrows;
  zrows.reserve(grid_times.size());
  for (std::int64_t i = 0; i < states.dim(0); ++i) {
    zrows.push_back(slice(row(states, i), 0, zd));
  }
  out.latents = stack_rows(zrows);
  return out;
}

Tensor kl_gaussians(const DiagonalGaussian& q, const DiagonalGaussian& p) {
  const auto z = static_cast<double>(q.mean.size());
  Tensor diff = sub(q.mean, p.mean);
  Tensor numer = add(square(q.std), square(diff));
  Tensor denom = mul(square(p.std), 2.0);
  Tensor per_dim = add(sub(log_act(p.std), log_act(q.std)), div(numer, denom));
  return add(sum(per_dim), -0.5 * z);
}

Tensor kd_loss(const Tensor& z_prior_tp, const Tensor& z_post_tp) {
  return mul(sum(square(sub(z_prior_tp, z_post_tp))), 0.5);
}

Tensor decode(const Tensor& h_first, const Tensor& h_last, const Tensor& trend,
              const Mlp& decoder) {
  return softplus(decoder.apply_vec(concat({h_first, h_last, log2p1(trend)})));
}

Tensor decode_sequence_only(const Tensor& h_first, const Tensor& h_last, const Mlp& decoder) {
  return softplus(decoder.apply_vec(concat({h_first, h_last})));
}

Tensor total_loss(const Tensor& main, const Tensor& rg, const Tensor& kl, const Tensor& kd,
                  double lambda1, double lambda2) {
  return add(main, add(mul(rg, lambda1), mul(add(kl, kd), lambda2)));
}

}  // namespace vnoip
