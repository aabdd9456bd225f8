#include "vnoip/sequence.hpp"

#include <cmath>

#include "vnoip/errors.hpp"
#include "vnoip/ops.hpp"

namespace vnoip {

void SequenceEncoderParams::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".init_state", init_state);
  f(prefix + ".gate_fwd.w", gate_fwd_w);
  f(prefix + ".gate_fwd.b", gate_fwd_b);
  f(prefix + ".gate_bwd.w", gate_bwd_w);
  f(prefix + ".gate_bwd.b", gate_bwd_b);
  drift_fwd.visit(prefix + ".drift_fwd", f);
  drift_bwd.visit(prefix + ".drift_bwd", f);
  gru_fwd.visit(prefix + ".gru_fwd", f);
  gru_bwd.visit(prefix + ".gru_bwd", f);
  f(prefix + ".fuse_vec", fuse_vec);
  f(prefix + ".fuse_w", fuse_w);
  f(prefix + ".ln_gain", ln_gain);
  f(prefix + ".ln_bias", ln_bias);
}

SequenceEncoderParams make_sequence_params(std::int64_t hidden_dim, std::int64_t context_dim,
                                           Rng& rng) {
  SequenceEncoderParams p;
  p.hidden_dim = hidden_dim;
  p.context_dim = context_dim;
  p.init_state = Tensor::zeros({hidden_dim});
  for (double& v : p.init_state.values()) v = 0.1 * rng.normal();
  p.gate_fwd_w = glorot(hidden_dim, hidden_dim, rng);
  p.gate_fwd_b = Tensor::zeros({hidden_dim});
  p.gate_bwd_w = glorot(hidden_dim, hidden_dim, rng);
  p.gate_bwd_b = Tensor::zeros({hidden_dim});
  p.drift_fwd = make_mlp(hidden_dim, hidden_dim, hidden_dim, 3, Activation::softplus, rng);
  p.drift_bwd = make_mlp(hidden_dim, hidden_dim, hidden_dim, 3, Activation::softplus, rng);
  p.gru_fwd = make_gru(context_dim, hidden_dim, rng);
  p.gru_bwd = make_gru(context_dim, hidden_dim, rng);
  p.fuse_vec = Tensor::zeros({hidden_dim});
  for (double& v : p.fuse_vec.values()) v = 0.1 * rng.normal();
  p.fuse_w = glorot(hidden_dim, hidden_dim, rng);
  p.ln_gain = Tensor::full({hidden_dim}, 1.0);
  p.ln_bias = Tensor::zeros({hidden_dim});
  return p;
}

Tensor temporal_encoding(double t, std::int64_t d) {
  if (d % 2 != 0) throw ConfigError("temporal encoding dimension must be even");
  const double ts = 100.0 * t;
  Tensor e = Tensor::zeros({d});
  for (std::int64_t j = 1; j <= d; ++j) {
    const double expo = (j % 2 == 1) ? static_cast<double>(j - 1) / static_cast<double>(d)
                                     : static_cast<double>(j) / static_cast<double>(d);
    const double arg = ts / std::pow(10000.0, expo);
    e(j - 1) = (j % 2 == 1) ? std::cos(arg) : std::sin(arg);
  }
  return e;
}

Tensor self_attention(const Tensor& s, const Tensor& mask) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(s.dim(1)));
  Tensor scores = mul(matmul(s, transpose(s)), inv_sqrt_d);
  return matmul(masked_softmax(scores, mask), s);
}

BiContext bidirectional_context(const Tensor& global_rows, const Tensor& cascade_rows) {
  if (global_rows.rank() != 2 || cascade_rows.rank() != 2 ||
      global_rows.dim(0) != cascade_rows.dim(0)) {
    throw ShapeError("bidirectional_context: row counts differ");
  }
  const std::int64_t n = global_rows.dim(0);
  if (n == 0) throw ShapeError("bidirectional_context: empty sequence");
  const Tensor mask_fwd = causal_mask_forward(n);
  const Tensor mask_bwd = causal_mask_backward(n);
  BiContext ctx;
  ctx.fwd = hstack(self_attention(cascade_rows, mask_fwd), self_attention(global_rows, mask_fwd));
  ctx.bwd = hstack(self_attention(cascade_rows, mask_bwd), self_attention(global_rows, mask_bwd));
  return ctx;
}

std::pair<Tensor, Tensor> self_gate_init(const SequenceEncoderParams& p) {
  const std::int64_t h = p.hidden_dim;
  auto gate = [&](const Tensor& w, const Tensor& b) {
    Tensor wh = reshape(matmul(reshape(p.init_state, {1, h}), transpose(w)), {h});
    return mul(p.init_state, sigmoid(add(wh, b)));
  };
  return {gate(p.gate_fwd_w, p.gate_fwd_b), gate(p.gate_bwd_w, p.gate_bwd_b)};
}

JumpStates jump_ode_pass(const BiContext& ctx, const std::vector<double>& times,
                         const SequenceEncoderParams& p, double euler_step, int max_steps) {
  const auto n = static_cast<std::int64_t>(times.size());
  if (n == 0) throw ShapeError("jump_ode_pass: empty sequence");
  if (ctx.fwd.dim(0) != n || ctx.bwd.dim(0) != n) {
    throw ShapeError("jump_ode_pass: context rows do not match event count");
  }
  for (std::int64_t i = 1; i < n; ++i) {
    if (times[static_cast<std::size_t>(i)] < times[static_cast<std::size_t>(i - 1)]) {
      throw ConfigError("jump_ode_pass: times must be sorted ascending");
    }
  }

  auto [state_fwd, state_bwd] = self_gate_init(p);
  const OdeFunc f_fwd = [&p](const Tensor& y) { return p.drift_fwd.apply_vec(y); };
  const OdeFunc f_bwd = [&p](const Tensor& y) { return p.drift_bwd.apply_vec(y); };

  JumpStates out;
  out.fwd.reserve(static_cast<std::size_t>(n));
  out.bwd.assign(static_cast<std::size_t>(n), Tensor());

  Tensor h = state_fwd;
  for (std::int64_t i = 0; i < n; ++i) {
    h = p.gru_fwd.step(h, row(ctx.fwd, i));
    out.fwd.push_back(h);
    if (i + 1 < n) {
      h = solve_euler(f_fwd, h, times[static_cast<std::size_t>(i)],
                      times[static_cast<std::size_t>(i + 1)], euler_step, max_steps);
    }
  }

  h = state_bwd;
  for (std::int64_t i = n - 1; i >= 0; --i) {
    h = p.gru_bwd.step(h, row(ctx.bwd, i));
    out.bwd[static_cast<std::size_t>(i)] = h;
    if (i > 0) {
      const double len = times[static_cast<std::size_t>(i)] - times[static_cast<std::size_t>(i - 1)];
      h = solve_euler(f_bwd, h, 0.0, len, euler_step, max_steps);
    }
  }
  return out;
}

Tensor fuse_states(const JumpStates& states, const SequenceEncoderParams& p) {
  const std::size_t n = states.fwd.size();
  if (n == 0 || states.bwd.size() != n) throw ShapeError("fuse_states: mismatched sweeps");
  const std::int64_t h = p.hidden_dim;

  auto logit = [&](const Tensor& state) {
    Tensor wh = reshape(matmul(reshape(state, {1, h}), transpose(p.fuse_w)), {h});
    return sum(mul(p.fuse_vec, wh));  // rank-0
  };

  std::vector<Tensor> fused;
  fused.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor lf = reshape(logit(states.fwd[i]), {1});
    Tensor lb = reshape(logit(states.bwd[i]), {1});
    Tensor gamma = reshape(softmax_rows(reshape(concat({lf, lb}), {1, 2})), {2});
    fused.push_back(add(scale_by(states.fwd[i], slice(gamma, 0, 1)),
                        scale_by(states.bwd[i], slice(gamma, 1, 1))));
  }
  return layer_norm(stack_rows(fused), p.ln_gain, p.ln_bias);
}

Tensor add_temporal(const Tensor& rows, const std::vector<double>& times) {
  if (rows.rank() != 2 || rows.dim(0) != static_cast<std::int64_t>(times.size())) {
    throw ShapeError("add_temporal: row count does not match times");
  }
  std::vector<Tensor> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.push_back(add(row(rows, static_cast<std::int64_t>(i)),
                      temporal_encoding(times[i], rows.dim(1))));
  }
  return stack_rows(out);
}

}  // namespace vnoip
