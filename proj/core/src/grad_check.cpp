#include "vnoip/grad_check.hpp"

#include <cmath>

namespace vnoip {

double grad_check_many(const MultiScalarFn& f, const std::vector<Tensor>& xs, double step) {
  // Analytic gradients in one taped pass.
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(xs.size());
    for (const Tensor& x : xs) leaves.push_back(tape.leaf(x));
    Tensor loss = f(tape, leaves);
    GradientMap grads = tape.backward(loss);
    for (const Tensor& leaf : leaves) {
      analytic.push_back(grads.contains(leaf) ? grads.at(leaf) : Tensor::zeros(leaf.shape()));
    }
  }

  auto eval_at = [&](const std::vector<Tensor>& point) {
    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(point.size());
    for (const Tensor& x : point) leaves.push_back(tape.leaf(x));
    return f(tape, leaves).item();
  };

  double worst = 0.0;
  std::vector<Tensor> point = xs;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    for (std::int64_t i = 0; i < xs[t].size(); ++i) {
      const double saved = point[t].values()[static_cast<std::size_t>(i)];
      point[t].values()[static_cast<std::size_t>(i)] = saved + step;
      const double up = eval_at(point);
      point[t].values()[static_cast<std::size_t>(i)] = saved - step;
      const double down = eval_at(point);
      point[t].values()[static_cast<std::size_t>(i)] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t].values()[static_cast<std::size_t>(i)];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (err > worst) worst = err;
    }
  }
  return worst;
}

double grad_check(const ScalarFn& f, const Tensor& x, double step) {
  return grad_check_many(
      [&f](Tape& tape, const std::vector<Tensor>& leaves) { return f(tape, leaves[0]); },
      {x}, step);
}

}  // namespace vnoip
