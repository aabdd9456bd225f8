#pragma once

#include <functional>
#include <vector>

#include "vnoip/tensor.hpp"

namespace vnoip {

/// Autonomous vector field: maps a rank-1 state to its derivative of the same
/// shape. Time enters only through interval lengths.
using OdeFunc = std::function<Tensor(const Tensor&)>;

enum class OdeMethod { euler, dopri5 };

struct SolveConfig {
  OdeMethod method = OdeMethod::dopri5;
  double step = 0.05;      // fixed euler step, normalized time units
  double rtol = 1e-5;
  double atol = 1e-6;
  int max_steps = 10000;   // bounds both methods
};

/// Fixed-step explicit Euler from t0 to t1; the last step is shortened to land
/// exactly on t1. Identity when t1 == t0. Differentiable: every step is built
/// from taped primitives (discretize-then-optimize).
Tensor solve_euler(const OdeFunc& f, const Tensor& y0, double t0, double t1, double step,
                   int max_steps = 10000);

/// Adaptive Dormand-Prince 5(4) with PI step control. Integrates from t0 and
/// emits the state at every requested output time (strictly increasing, first
/// >= t0), hitting each one exactly by clamping step endpoints onto it.
/// Returns a {T, d} tensor of states. Step-size decisions are made on detached
/// values; accepted steps stay on the tape.
Tensor solve_dopri5(const OdeFunc& f, const Tensor& y0, double t0,
                    const std::vector<double>& output_times, const SolveConfig& cfg);

}  // namespace vnoip
