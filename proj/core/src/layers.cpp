#include "vnoip/layers.hpp"

#include <cmath>

#include "vnoip/errors.hpp"

namespace vnoip {

Tensor Linear::apply(const Tensor& x) const {
  return add_rowvec(matmul(x, weight), bias);
}

Tensor Linear::apply_vec(const Tensor& x) const {
  Tensor out = apply(reshape(x, {1, x.size()}));
  return reshape(out, {out.dim(1)});
}

void Linear::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".w", weight);
  f(prefix + ".b", bias);
}

Tensor activate(const Tensor& x, Activation act) {
  switch (act) {
    case Activation::relu: return relu(x);
    case Activation::tanh: return tanh_act(x);
    case Activation::softplus: return softplus(x);
  }
  throw ConfigError("unknown activation");
}

Tensor Mlp::apply(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].apply(h);
    if (i + 1 < layers.size()) h = activate(h, activation);
  }
  return h;
}

Tensor Mlp::apply_vec(const Tensor& x) const {
  Tensor out = apply(reshape(x, {1, x.size()}));
  return reshape(out, {out.dim(1)});
}

void Mlp::visit(const std::string& prefix, const ParamVisitor& f) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].visit(prefix + ".l" + std::to_string(i), f);
  }
}

Tensor GruCell::step(const Tensor& state, const Tensor& input) const {
  const std::int64_t h = hidden();
  Tensor gi = reshape(add_rowvec(matmul(reshape(input, {1, input.size()}), w_ih), b_ih), {3 * h});
  Tensor gh = reshape(add_rowvec(matmul(reshape(state, {1, state.size()}), w_hh), b_hh), {3 * h});

  Tensor r = sigmoid(add(slice(gi, 0, h), slice(gh, 0, h)));
  Tensor u = sigmoid(add(slice(gi, h, h), slice(gh, h, h)));
  Tensor c = tanh_act(add(slice(gi, 2 * h, h), mul(r, slice(gh, 2 * h, h))));
  // h' = (1-u).c + u.h  ==  c + u.(h - c)
  return add(c, mul(u, sub(state, c)));
}

void GruCell::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".w_ih", w_ih);
  f(prefix + ".w_hh", w_hh);
  f(prefix + ".b_ih", b_ih);
  f(prefix + ".b_hh", b_hh);
}

Tensor glorot(std::int64_t in, std::int64_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor w = Tensor::zeros({in, out});
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

Linear make_linear(std::int64_t in, std::int64_t out, Rng& rng) {
  return Linear{glorot(in, out, rng), Tensor::zeros({out})};
}

Mlp make_mlp(std::int64_t in, std::int64_t hidden, std::int64_t out, int n_layers,
             Activation act, Rng& rng) {
  if (n_layers < 1) throw ConfigError("mlp needs at least one layer");
  Mlp mlp;
  mlp.activation = act;
  for (int i = 0; i < n_layers; ++i) {
    const std::int64_t fan_in = i == 0 ? in : hidden;
    const std::int64_t fan_out = i == n_layers - 1 ? out : hidden;
    mlp.layers.push_back(make_linear(fan_in, fan_out, rng));
  }
  return mlp;
}

GruCell make_gru(std::int64_t in, std::int64_t hidden, Rng& rng) {
  return GruCell{glorot(in, 3 * hidden, rng), glorot(hidden, 3 * hidden, rng),
                 Tensor::zeros({3 * hidden}), Tensor::zeros({3 * hidden})};
}

}  // namespace vnoip
