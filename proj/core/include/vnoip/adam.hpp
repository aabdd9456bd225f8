#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vnoip/model.hpp"

namespace vnoip {

struct AdamConfig {
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update on a flat parameter buffer. `t` is the
/// 1-based step index; `m` and `v` are the moment buffers.
void adam_step(std::span<double> values, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::int64_t t, const AdamConfig& cfg);

/// Named-tensor Adam over a whole model. Gradients are keyed by the names
/// ModelParams::visit produces; a missing entry means a zero gradient.
class AdamOptimizer {
public:
  explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(ModelParams& params, const std::map<std::string, std::vector<double>>& grads);
  std::int64_t steps() const { return t_; }

private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace vnoip
