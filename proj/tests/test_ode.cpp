#include <cmath>

#include "doctest.h"
#include "vnoip/errors.hpp"
#include "vnoip/grad_check.hpp"
#include "vnoip/ode.hpp"
#include "vnoip/ops.hpp"

using namespace vnoip;

namespace {

const OdeFunc decay = [](const Tensor& y) { return mul(y, -1.0); };
const OdeFunc growth = [](const Tensor& y) { return y; };
const OdeFunc still = [](const Tensor& y) { return mul(y, 0.0); };

SolveConfig tight() {
  SolveConfig cfg;
  cfg.rtol = 1e-8;
  cfg.atol = 1e-8;
  return cfg;
}

}  // namespace

TEST_CASE("euler hand recursion on dy/dt = -y") {
  Tensor y0 = Tensor::vector({1.0});
  Tensor y = solve_euler(decay, y0, 0.0, 1.0, 0.5);
  CHECK(y(0) == doctest::Approx(0.25).epsilon(1e-15));  // (1 - h)^2
}

TEST_CASE("euler identity and constant dynamics") {
  Tensor y0 = Tensor::vector({3.0, -2.0});
  Tensor same = solve_euler(decay, y0, 0.7, 0.7, 0.05);
  CHECK(same.values() == y0.values());

  Tensor frozen = solve_euler(still, y0, 0.0, 2.0, 0.3);
  CHECK(frozen.values() == y0.values());
}

TEST_CASE("euler step budget") {
  Tensor y0 = Tensor::vector({1.0});
  CHECK_THROWS_AS(solve_euler(decay, y0, 0.0, 1.0, 1e-6, 100), NumericError);
}

TEST_CASE("euler is first order: halving h halves the global error") {
  Tensor y0 = Tensor::vector({1.0});
  const double truth = std::exp(-1.0);
  const double e1 = std::abs(solve_euler(decay, y0, 0.0, 1.0, 0.02)(0) - truth);
  const double e2 = std::abs(solve_euler(decay, y0, 0.0, 1.0, 0.01)(0) - truth);
  const double ratio = e1 / e2;
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
}

TEST_CASE("dopri5 reproduces the exponential") {
  Tensor y0 = Tensor::vector({1.0});
  Tensor out = solve_dopri5(growth, y0, 0.0, {1.0}, tight());
  CHECK(out.shape() == std::vector<std::int64_t>{1, 1});
  CHECK(std::abs(out(0, 0) - std::exp(1.0)) < 1e-6);
}

TEST_CASE("dopri5 constant dynamics hits every output time") {
  Tensor y0 = Tensor::vector({2.0, 3.0});
  Tensor out = solve_dopri5(still, y0, 0.0, {0.5, 1.0}, tight());
  CHECK(out.shape() == std::vector<std::int64_t>{2, 2});
  for (std::int64_t i = 0; i < 2; ++i) {
    CHECK(out(i, 0) == 2.0);
    CHECK(out(i, 1) == 3.0);
  }
}

TEST_CASE("dopri5 closed-form rotation") {
  const OdeFunc rotate = [](const Tensor& y) {
    return Tensor::vector({-y(1), y(0)});
  };
  Tensor y0 = Tensor::vector({1.0, 0.0});
  Tensor out = solve_dopri5(rotate, y0, 0.0, {M_PI / 2.0}, tight());
  CHECK(std::abs(out(0, 0) - 0.0) < 1e-5);
  CHECK(std::abs(out(0, 1) - 1.0) < 1e-5);
}

TEST_CASE("dopri5 tracks the exponential at many output times") {
  SolveConfig cfg;  // default tolerances
  Tensor y0 = Tensor::vector({1.0});
  std::vector<double> times;
  for (int k = 1; k <= 8; ++k) times.push_back(0.25 * k);
  Tensor out = solve_dopri5(growth, y0, 0.0, times, cfg);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double truth = std::exp(times[i]);
    const double tol = 100.0 * std::max(cfg.rtol * std::abs(truth), cfg.atol);
    CHECK(std::abs(out(static_cast<std::int64_t>(i), 0) - truth) < tol);
  }
}

TEST_CASE("dopri5 validates output times and budget") {
  Tensor y0 = Tensor::vector({1.0});
  CHECK_THROWS_AS(solve_dopri5(growth, y0, 0.0, {}, tight()), ConfigError);
  CHECK_THROWS_AS(solve_dopri5(growth, y0, 0.0, {0.5, 0.5}, tight()), ConfigError);
  CHECK_THROWS_AS(solve_dopri5(growth, y0, 0.5, {0.2}, tight()), ConfigError);

  SolveConfig starved = tight();
  starved.max_steps = 2;
  starved.rtol = 1e-13;
  starved.atol = 1e-14;
  CHECK_THROWS_AS(solve_dopri5(growth, y0, 0.0, {5.0}, starved), NumericError);
}

TEST_CASE("grad check through solve_euler with a trainable matrix") {
  Tensor a({2, 2}, {-0.4, 0.3, -0.2, -0.5});
  const Tensor y0 = Tensor::vector({1.0, -1.0});
  const double err = grad_check(
      [&y0](Tape&, const Tensor& m) {
        const OdeFunc linear = [&m](const Tensor& y) {
          return reshape(matmul(reshape(y, {1, 2}), transpose(m)), {2});
        };
        return sum(square(solve_euler(linear, y0, 0.0, 0.3, 0.1)));
      },
      a, 1e-5);
  CHECK(err < 1e-5);
}

TEST_CASE("dopri5 stays on the tape") {
  Tape tape;
  Tensor y0 = tape.leaf(Tensor::vector({1.0}));
  const OdeFunc f = [](const Tensor& y) { return mul(y, -0.5); };
  Tensor out = solve_dopri5(f, y0, 0.0, {1.0}, tight());
  GradientMap grads = tape.backward(sum(out));
  // d/dy0 of y0*exp(-0.5) = exp(-0.5)
  CHECK(grads.at(y0)(0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
}
