#include "vnoip/adam.hpp"

#include <cmath>

#include "vnoip/errors.hpp"

namespace vnoip {

void adam_step(std::span<double> values, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::int64_t t, const AdamConfig& cfg) {
  if (values.size() != grad.size() || values.size() != m.size() || values.size() != v.size()) {
    throw ShapeError("adam_step: buffer sizes differ");
  }
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void AdamOptimizer::step(ModelParams& params,
                         const std::map<std::string, std::vector<double>>& grads) {
  ++t_;
  static const std::vector<double> kEmpty;
  params.visit([&](const std::string& name, Tensor& tensor) {
    auto it = grads.find(name);
    const std::vector<double>* g = it == grads.end() ? nullptr : &it->second;
    auto& mom = state_[name];
    if (mom.m.empty()) {
      mom.m.assign(static_cast<std::size_t>(tensor.size()), 0.0);
      mom.v.assign(static_cast<std::size_t>(tensor.size()), 0.0);
    }
    std::vector<double> zeros;
    if (!g) {
      zeros.assign(static_cast<std::size_t>(tensor.size()), 0.0);
      g = &zeros;
    }
    adam_step(tensor.values(), *g, mom.m, mom.v, t_, cfg_);
  });
}

}  // namespace vnoip
