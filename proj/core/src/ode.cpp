#include "vnoip/ode.hpp"

#include <cmath>
#include <limits>

#include "vnoip/errors.hpp"
#include "vnoip/ops.hpp"

namespace vnoip {

namespace {

void check_deriv_shape(const Tensor& y, const Tensor& dy) {
  if (dy.shape() != y.shape()) {
    throw ShapeError("ode function returned shape " + dy.shape_string() +
                     " for state of shape " + y.shape_string());
  }
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Lund-stabilized controller constants.
constexpr double kSafe = 0.9;
constexpr double kFacL = 0.2;
constexpr double kFacR = 10.0;
constexpr double kBeta = 0.04;

Tensor combine(const Tensor& y, double h, std::initializer_list<std::pair<double, const Tensor*>> ks) {
  Tensor acc = y;
  for (const auto& [coeff, k] : ks) {
    acc = add(acc, mul(*k, h * coeff));
  }
  return acc;
}

}  // namespace

Tensor solve_euler(const OdeFunc& f, const Tensor& y0, double t0, double t1, double step,
                   int max_steps) {
  if (t1 < t0) throw ConfigError("solve_euler: t1 < t0");
  if (step <= 0.0) throw ConfigError("solve_euler: step must be positive");
  if (t1 == t0) return y0;

  const double span = t1 - t0;
  auto n_steps = static_cast<long>(std::ceil(span / step - 1e-12));
  if (n_steps < 1) n_steps = 1;
  if (n_steps > max_steps) {
    throw NumericError("solve_euler: " + std::to_string(n_steps) +
                       " steps exceed the budget of " + std::to_string(max_steps));
  }

  // Step sizes are functions of the interval length only, so identical
  // intervals integrate bit-identically regardless of their absolute offset.
  Tensor y = y0;
  for (long i = 0; i < n_steps; ++i) {
    const double dt =
        (i + 1 == n_steps) ? span - step * static_cast<double>(n_steps - 1) : step;
    Tensor dy = f(y);
    check_deriv_shape(y, dy);
    y = add(y, mul(dy, dt));
  }
  return y;
}

Tensor solve_dopri5(const OdeFunc& f, const Tensor& y0, double t0,
                    const std::vector<double>& output_times, const SolveConfig& cfg) {
  if (output_times.empty()) throw ConfigError("solve_dopri5: no output times requested");
  double prev = t0;
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < prev || (i > 0 && output_times[i] == prev)) {
      throw ConfigError("solve_dopri5: output times must be strictly increasing and >= t0");
    }
    prev = output_times[i];
  }

  const std::int64_t dim = y0.size();
  const double span = output_times.back() - t0;

  Tensor y = y0;
  double t = t0;
  Tensor k1 = f(y);
  check_deriv_shape(y, k1);
  double h = span > 0.0 ? 0.01 * span : 1e-6;
  double facold = 1e-4;
  int steps_used = 0;

  std::vector<Tensor> outputs;
  outputs.reserve(output_times.size());

  for (double t_out : output_times) {
    while (t < t_out) {
      if (++steps_used > cfg.max_steps) {
        throw NumericError("solve_dopri5: step budget " + std::to_string(cfg.max_steps) +
                           " exceeded (stiff problem?)");
      }
      if (0.1 * std::abs(h) <= std::abs(t) * std::numeric_limits<double>::epsilon()) {
        throw NumericError("solve_dopri5: step-size underflow at t = " + std::to_string(t));
      }
      // Land exactly on the requested output time, remembering the free-running
      // step so a clamped final step does not throttle the next segment.
      const double h_free = h;
      bool last = false;
      if (t + 1.01 * h - t_out > 0.0) {
        h = t_out - t;
        last = true;
      }

      Tensor k2 = f(combine(y, h, {{a21, &k1}}));
      Tensor k3 = f(combine(y, h, {{a31, &k1}, {a32, &k2}}));
      Tensor k4 = f(combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      Tensor k5 = f(combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      Tensor k6 = f(combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      Tensor y_new =
          combine(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
      Tensor k7 = f(y_new);
      check_deriv_shape(y, k7);

      // Scaled RMS error on detached values; controller decisions are data,
      // not differentiated.
      double err = 0.0;
      for (std::int64_t d = 0; d < dim; ++d) {
        const double ee = h * (e1 * k1(d) + e3 * k3(d) + e4 * k4(d) + e5 * k5(d) +
                               e6 * k6(d) + e7 * k7(d));
        const double sk =
            cfg.atol + cfg.rtol * std::max(std::abs(y(d)), std::abs(y_new(d)));
        err += (ee / sk) * (ee / sk);
      }
      err = std::sqrt(err / static_cast<double>(dim));

      const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
      if (err > 1.0) {
        h /= std::min(1.0 / kFacL, fac11 / kSafe);
        continue;
      }
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(1.0 / kFacR, std::min(1.0 / kFacL, fac / kSafe));
      facold = std::max(err, 1e-4);
      t = last ? t_out : t + h;
      h = last ? h_free : h / fac;
      y = y_new;
      k1 = k7;  // FSAL
    }
    outputs.push_back(y.rank() == 1 ? y : reshape(y, {y.size()}));
  }
  return stack_rows(outputs);
}

}  // namespace vnoip
