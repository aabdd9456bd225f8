#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vnoip/ops.hpp"
#include "vnoip/rng.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

/// Callback used to enumerate (name, tensor) pairs of a parameter struct.
/// Binding, gradient pulls, Adam updates and checkpoints all walk the same
/// enumeration, so the visit order is part of the format.
using ParamVisitor = std::function<void(const std::string&, Tensor&)>;

struct Linear {
  Tensor weight;  // {in, out}
  Tensor bias;    // {out}

  Tensor apply(const Tensor& x) const;      // {n, in} -> {n, out}
  Tensor apply_vec(const Tensor& x) const;  // {in} -> {out}
  void visit(const std::string& prefix, const ParamVisitor& f);
};

enum class Activation { relu, tanh, softplus };

Tensor activate(const Tensor& x, Activation act);

/// Stack of linear layers with the activation between them (not after the
/// last). "k-layer MLP" means k linear layers.
struct Mlp {
  std::vector<Linear> layers;
  Activation activation = Activation::relu;

  Tensor apply(const Tensor& x) const;
  Tensor apply_vec(const Tensor& x) const;
  void visit(const std::string& prefix, const ParamVisitor& f);
};

/// GRU cell, reset/update/candidate form with sigmoid gates and tanh
/// candidate:
///   r = sig(W_ir x + b_ir + W_hr h + b_hr)
///   u = sig(W_iu x + b_iu + W_hu h + b_hu)
///   c = tanh(W_ic x + b_ic + r . (W_hc h + b_hc))
///   h' = (1 - u) . c + u . h
/// Weights are packed column-blocks [r | u | c].
struct GruCell {
  Tensor w_ih;  // {in, 3h}
  Tensor w_hh;  // {h, 3h}
  Tensor b_ih;  // {3h}
  Tensor b_hh;  // {3h}

  Tensor step(const Tensor& state, const Tensor& input) const;  // {h},{in} -> {h}
  std::int64_t hidden() const { return w_hh.dim(0); }
  void visit(const std::string& prefix, const ParamVisitor& f);
};

Linear make_linear(std::int64_t in, std::int64_t out, Rng& rng);
Mlp make_mlp(std::int64_t in, std::int64_t hidden, std::int64_t out, int n_layers,
             Activation act, Rng& rng);
GruCell make_gru(std::int64_t in, std::int64_t hidden, Rng& rng);

/// Glorot-uniform matrix; biases are initialized to zero elsewhere.
Tensor glorot(std::int64_t in, std::int64_t out, Rng& rng);

}  // namespace vnoip
