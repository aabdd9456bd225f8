#include <cmath>

#include "doctest.h"
#include "vnoip/errors.hpp"
#include "vnoip/grad_check.hpp"
#include "vnoip/ops.hpp"
#include "vnoip/rng.hpp"

using namespace vnoip;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

}  // namespace

TEST_CASE("matmul identity and hand-evaluated product") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor b({2, 2}, {3, 4, 5, 6});
  Tensor out = matmul(eye, b);
  CHECK(out.values() == b.values());

  Tensor a({1, 2}, {1, 2});
  Tensor c({2, 1}, {3, 4});
  CHECK(matmul(a, c).item() == doctest::Approx(11.0).epsilon(1e-15));

  CHECK_THROWS_AS(matmul(Tensor({1, 3}, {1, 2, 3}), b), ShapeError);
}

TEST_CASE("matmul gradient of sum equals ones times b transpose") {
  Tensor a = random_tensor({2, 3}, 11);
  Tensor b = random_tensor({3, 4}, 12);
  Tape tape;
  Tensor al = tape.leaf(a);
  Tensor loss = sum(matmul(al, b));
  GradientMap grads = tape.backward(loss);
  Tensor expected = matmul(Tensor::full({2, 4}, 1.0), transpose(b));
  const Tensor& got = grads.at(al);
  for (std::int64_t i = 0; i < got.size(); ++i) {
    CHECK(got.values()[i] == doctest::Approx(expected.values()[i]).epsilon(1e-14));
  }
}

TEST_CASE("masked softmax examples") {
  // Single allowed position takes all the mass.
  Tensor scores({1, 3}, {5.0, -2.0, 1.0});
  Tensor mask({1, 3}, {kMaskBlocked, 0.0, kMaskBlocked});
  Tensor w = masked_softmax(scores, mask);
  CHECK(w(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w(0, 0) < 1e-12);

  // All-zero scores, all allowed, n = 4: uniform.
  Tensor z = Tensor::zeros({4, 4});
  Tensor open = Tensor::zeros({4, 4});
  Tensor u = masked_softmax(z, open);
  for (std::int64_t i = 0; i < 4; ++i)
    for (std::int64_t j = 0; j < 4; ++j) CHECK(u(i, j) == doctest::Approx(0.25).epsilon(1e-15));

  // scores [1,2], mask [0,-1e9]: weights [1,0] up to 1e-30.
  Tensor s2({1, 2}, {1.0, 2.0});
  Tensor m2({1, 2}, {0.0, kMaskBlocked});
  Tensor w2 = masked_softmax(s2, m2);
  CHECK(w2(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w2(0, 1) <= 1e-30);

  // Fully blocked row is a contract violation.
  Tensor bad({1, 2}, {0.0, 0.0});
  Tensor blocked({1, 2}, {kMaskBlocked, kMaskBlocked});
  CHECK_THROWS_AS(masked_softmax(bad, blocked), NumericError);
}

TEST_CASE("masked softmax rows are probability vectors") {
  Tensor scores = random_tensor({6, 6}, 21, 3.0);
  Tensor mask = causal_mask_forward(6);
  Tensor w = masked_softmax(scores, mask);
  for (std::int64_t i = 0; i < 6; ++i) {
    double total = 0.0;
    for (std::int64_t j = 0; j < 6; ++j) {
      total += w(i, j);
      if (j > i) CHECK(w(i, j) < 1e-12);  // blocked mass
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("layer norm examples") {
  Tensor gain = Tensor::full({3}, 1.0);
  Tensor bias = Tensor::zeros({3});

  Tensor constant({3}, {4.0, 4.0, 4.0});
  for (double v : layer_norm(constant, gain, bias).values()) CHECK(std::abs(v) < 1e-12);

  Tensor pm({2}, {1.0, -1.0});
  Tensor out = layer_norm(pm, Tensor::full({2}, 1.0), Tensor::zeros({2}));
  CHECK(out(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(out(1) == doctest::Approx(-1.0).epsilon(1e-4));

  Tensor anyrow = random_tensor({3}, 5);
  Tensor b2({3}, {7.0, -1.0, 2.5});
  Tensor out2 = layer_norm(anyrow, Tensor::zeros({3}), b2);
  CHECK(out2.values() == b2.values());
}

TEST_CASE("activation values and gradients") {
  CHECK(erf_act(Tensor::scalar(0.0)).item() == 0.0);
  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  CHECK(softplus(Tensor::scalar(0.0)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  Tape tape;
  Tensor x = tape.leaf(Tensor::scalar(0.0));
  GradientMap grads = tape.backward(sum(sigmoid(x)));
  CHECK(grads.at(x).item() == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS(log1p_act(Tensor::scalar(-1.0)), NumericError);
  CHECK_THROWS_AS(log_act(Tensor::scalar(0.0)), NumericError);
}

TEST_CASE("backward basics") {
  // loss = sum(x): gradient is all-ones.
  {
    Tape tape;
    Tensor x = tape.leaf(random_tensor({3}, 7));
    GradientMap grads = tape.backward(sum(x));
    for (double v : grads.at(x).values()) CHECK(v == 1.0);
  }
  // loss = sum(x . x), x = [1, 2]: gradient [2, 4].
  {
    Tape tape;
    Tensor x = tape.leaf(Tensor({2}, {1.0, 2.0}));
    GradientMap grads = tape.backward(sum(mul(x, x)));
    CHECK(grads.at(x)(0) == 2.0);
    CHECK(grads.at(x)(1) == 4.0);
  }
  // Second backward on the same tape is an error.
  {
    Tape tape;
    Tensor x = tape.leaf(Tensor({2}, {1.0, 2.0}));
    Tensor loss = sum(x);
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), NumericError);
  }
  // Non-scalar loss is a shape error.
  {
    Tape tape;
    Tensor x = tape.leaf(Tensor({2}, {1.0, 2.0}));
    CHECK_THROWS_AS(tape.backward(mul(x, 2.0)), ShapeError);
  }
}

TEST_CASE("non-participating tensors have no gradient") {
  Tape tape;
  Tensor used = tape.leaf(Tensor({2}, {1.0, 2.0}));
  Tensor unused = tape.leaf(Tensor({2}, {3.0, 4.0}));
  GradientMap grads = tape.backward(sum(used));
  CHECK(grads.contains(used));
  CHECK(!grads.contains(unused));
  CHECK_THROWS_AS(grads.at(unused), NumericError);

  Tensor detached = Tensor::scalar(1.0);
  CHECK(!grads.contains(detached));
}

TEST_CASE("operands from two tapes are rejected") {
  Tape t1, t2;
  Tensor a = t1.leaf(Tensor({2}, {1.0, 2.0}));
  Tensor b = t2.leaf(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(add(a, b), NumericError);
}

TEST_CASE("grad_check oracle agreement") {
  Tensor x = random_tensor({5}, 42);
  const double sig_err =
      grad_check([](Tape&, const Tensor& t) { return sum(sigmoid(t)); }, x, 1e-5);
  CHECK(sig_err < 1e-6);

  const double lin_err = grad_check([](Tape&, const Tensor& t) { return sum(t); }, x, 1e-5);
  CHECK(lin_err < 1e-10);
}

TEST_CASE("forward pass is deterministic") {
  Tensor a = random_tensor({4, 4}, 101, 2.0);
  Tensor b = random_tensor({4, 4}, 102, 2.0);
  auto run = [&]() {
    Tensor c = matmul(sigmoid(a), tanh_act(b));
    return layer_norm(c, Tensor::full({4}, 1.0), Tensor::zeros({4})).values();
  };
  CHECK(run() == run());
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
  CHECK_THROWS_AS(Tensor({0}, {}), ShapeError);
  Tensor s = Tensor::scalar(3.5);
  CHECK(s.rank() == 0);
  CHECK(s.size() == 1);
  CHECK(s.item() == 3.5);
}
