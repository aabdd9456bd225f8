#include "vnoip/model.hpp"

#include <cmath>
#include <sstream>

#include "vnoip/errors.hpp"
#include "vnoip/ops.hpp"

namespace vnoip {

SolveConfig HyperParams::trend_solver() const {
  SolveConfig cfg;
  cfg.method = OdeMethod::dopri5;
  cfg.rtol = dopri_rtol;
  cfg.atol = dopri_atol;
  cfg.max_steps = max_steps;
  return cfg;
}

std::uint64_t HyperParams::hash() const {
  std::ostringstream os;
  os << embed_dim << '|' << hidden_dim << '|' << latent_dim << '|' << grid_points << '|'
     << lambda1 << '|' << lambda2 << '|' << euler_step << '|' << dopri_rtol << '|'
     << dopri_atol << '|' << max_steps << '|' << trend_module;
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : os.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

ModelParams ModelParams::init(const HyperParams& hp, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.hp = hp;
  p.seq = make_sequence_params(hp.hidden_dim, 2 * hp.embed_dim, rng);
  p.trend = make_trend_params(hp.latent_dim, hp.hidden_dim, hp.grid_points, hp.trend_module, rng);
  return p;
}

void ModelParams::visit(const ParamVisitor& f) {
  seq.visit("seq", f);
  trend.visit("trend", f);
}

ModelParams ModelParams::bound_to(Tape& tape) const {
  ModelParams bound = *this;
  bound.visit([&tape](const std::string&, Tensor& t) { t = tape.leaf(t); });
  return bound;
}

std::int64_t ModelParams::parameter_count() const {
  std::int64_t n = 0;
  const_cast<ModelParams*>(this)->visit([&n](const std::string&, Tensor& t) { n += t.size(); });
  return n;
}

Tensor encode_cascade_states(const ModelParams& params, const CascadeSample& sample) {
  if (sample.users.empty()) throw ShapeError("cascade sample has no events");
  const Tensor cascade_rows = add_temporal(sample.cascade_view, sample.times);
  const BiContext ctx = bidirectional_context(sample.global_view, cascade_rows);
  const JumpStates states =
      jump_ode_pass(ctx, sample.times, params.seq, params.hp.euler_step, params.hp.max_steps);
  return fuse_states(states, params.seq);
}

namespace {

Tensor main_loss(const Tensor& delta_hat, double delta_true) {
  Tensor diff = add(log2p1(delta_hat), -log2p1(delta_true));
  return sum(square(diff));
}

}  // namespace

Tensor forward_loss(const ModelParams& params, const CascadeSample& sample, const Tensor& noise,
                    ForwardStats* stats) {
  const Tensor hidden = encode_cascade_states(params, sample);
  const Tensor h_first = row(hidden, 0);
  const Tensor h_last = row(hidden, hidden.dim(0) - 1);

  if (!params.hp.trend_module) {
    Tensor delta_hat = decode_sequence_only(h_first, h_last, params.trend.decoder);
    Tensor loss = main_loss(delta_hat, sample.delta_popularity);
    if (stats) {
      stats->main = loss.item();
      stats->prediction = delta_hat.item();
    }
    return loss;
  }

  const Tensor z_ctx = encode_trajectory(sample.context, params.trend.traj_encoder);
  const Tensor z_tgt = encode_trajectory(sample.target_trajectory(), params.trend.traj_encoder);
  const Tensor pooled_ctx = pool(params.trend.pool_query_traj, z_ctx);
  const Tensor pooled_tgt = pool(params.trend.pool_query_traj, z_tgt);
  const Tensor pooled_hidden = pool(params.trend.pool_query_hidden, hidden);

  const InferredLatents latents =
      infer_latents(pooled_ctx, pooled_tgt, pooled_hidden, params.trend, noise);

  const SolveConfig solver = params.hp.trend_solver();
  const TrendOutput prior_trend =
      generate_trend(latents.z0_prior, sample.observed_popularity, sample.observed_time,
                     sample.grid_times, params.trend, solver);
  const TrendOutput post_trend =
      generate_trend(latents.z0_post, sample.observed_popularity, sample.observed_time,
                     sample.grid_times, params.trend, solver);

  Tensor delta_hat = decode(h_first, h_last, post_trend.popularity, params.trend.decoder);
  Tensor loss_main = main_loss(delta_hat, sample.delta_popularity);

  // Regression toward the ground-truth trend, averaged over both generated
  // trajectories and the T grid points.
  std::vector<double> truth = sample.target_grid_popularity();
  std::vector<double> truth_twice = truth;
  truth_twice.insert(truth_twice.end(), truth.begin(), truth.end());
  for (double& v : truth_twice) v = log2p1(v);
  Tensor generated = log2p1(concat({prior_trend.popularity, post_trend.popularity}));
  Tensor loss_rg = mean(square(sub(generated, Tensor::vector(std::move(truth_twice)))));

  Tensor loss_kl = kl_gaussians(latents.post, latents.prior);
  Tensor loss_kd = kd_loss(prior_trend.final_latent(), post_trend.final_latent());

  Tensor loss =
      total_loss(loss_main, loss_rg, loss_kl, loss_kd, params.hp.lambda1, params.hp.lambda2);
  if (stats) {
    stats->main = loss_main.item();
    stats->rg = loss_rg.item();
    stats->kl = loss_kl.item();
    stats->kd = loss_kd.item();
    stats->prediction = delta_hat.item();
  }
  return loss;
}

Prediction predict_with_trend(const ModelParams& params, const CascadeSample& sample) {
  const Tensor hidden = encode_cascade_states(params, sample);
  const Tensor h_first = row(hidden, 0);
  const Tensor h_last = row(hidden, hidden.dim(0) - 1);

  Prediction out;
  if (!params.hp.trend_module) {
    out.delta_hat = decode_sequence_only(h_first, h_last, params.trend.decoder).item();
    return out;
  }

  const Tensor z_ctx = encode_trajectory(sample.context, params.trend.traj_encoder);
  const Tensor pooled_ctx = pool(params.trend.pool_query_traj, z_ctx);
  const Tensor pooled_hidden = pool(params.trend.pool_query_hidden, hidden);
  const DiagonalGaussian prior = infer_prior(pooled_ctx, pooled_hidden, params.trend);

  // Test-time path: prior mean latent, prior-generated trend.
  const TrendOutput trend =
      generate_trend(prior.mean, sample.observed_popularity, sample.observed_time,
                     sample.grid_times, params.trend, params.hp.trend_solver());
  out.delta_hat = decode(h_first, h_last, trend.popularity, params.trend.decoder).item();
  out.trend = trend.popularity.values();
  return out;
}

double predict(const ModelParams& params, const CascadeSample& sample) {
  return predict_with_trend(params, sample).delta_hat;
}

}  // namespace vnoip
