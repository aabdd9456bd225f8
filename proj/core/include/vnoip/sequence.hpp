#pragma once

#include <utility>
#include <vector>

#include "vnoip/layers.hpp"
#include "vnoip/ode.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

/// Parameters of the bidirectional jump-ODE cascade encoder.
struct SequenceEncoderParams {
  std::int64_t hidden_dim = 64;
  std::int64_t context_dim = 80;  // 2 * embedding dim: [cascade view; global view]

  Tensor init_state;                    // trainable shared initial state {h}
  Tensor gate_fwd_w, gate_fwd_b;        // forward self-gate {h,h}, {h}
  Tensor gate_bwd_w, gate_bwd_b;        // backward self-gate
  Mlp drift_fwd, drift_bwd;             // inter-event dynamics, 3-layer softplus h->h
  GruCell gru_fwd, gru_bwd;             // event jumps, input = context_dim
  Tensor fuse_vec;                      // {h}
  Tensor fuse_w;                        // {h,h}
  Tensor ln_gain, ln_bias;              // {h}

  void visit(const std::string& prefix, const ParamVisitor& f);
};

SequenceEncoderParams make_sequence_params(std::int64_t hidden_dim, std::int64_t context_dim,
                                           Rng& rng);

/// Attention context per direction: row i of `fwd` depends only on positions
/// <= i, row i of `bwd` only on positions >= i. Each is {n, 2d}, the
/// cascade-view block first.
struct BiContext {
  Tensor fwd;
  Tensor bwd;
};

/// Sinusoidal encoding of a normalized timestamp. Component j (1-based) is
/// cos(ts / 10000^((j-1)/d)) for odd j and sin(ts / 10000^(j/d)) for even j,
/// with ts = 100 * t so that [0,1] inputs exercise several frequency bands.
Tensor temporal_encoding(double t, std::int64_t d);

/// Scaled dot-product attention with the matrix as query, key and value plus
/// an additive mask; no learned projections, single head.
Tensor self_attention(const Tensor& s, const Tensor& mask);

/// Four attention passes (each view x each direction) and per-direction
/// concatenation across views. `cascade_rows` must already include the
/// temporal encoding.
BiContext bidirectional_context(const Tensor& global_rows, const Tensor& cascade_rows);

/// Self-gated forward/backward initial states: H . sig(W H + b).
std::pair<Tensor, Tensor> self_gate_init(const SequenceEncoderParams& p);

/// Post-jump hidden states per event for both sweeps.
struct JumpStates {
  std::vector<Tensor> fwd;  // fwd[i] = state just after the jump at event i
  std::vector<Tensor> bwd;  // bwd[i] = state just after the backward jump at event i
};

/// Forward sweep: GRU jump at each event, then Euler drift to the next event.
/// Backward sweep mirrors from the last event toward the first, integrating
/// the backward drift over the reversed interval lengths.
JumpStates jump_ode_pass(const BiContext& ctx, const std::vector<double>& times,
                         const SequenceEncoderParams& p, double euler_step,
                         int max_steps = 10000);

/// Channel-attention fusion of the two sweeps followed by layer norm; {n, h}.
Tensor fuse_states(const JumpStates& states, const SequenceEncoderParams& p);

/// Cascade rows + temporal encodings (detached input assembly).
Tensor add_temporal(const Tensor& rows, const std::vector<double>& times);

}  // namespace vnoip
