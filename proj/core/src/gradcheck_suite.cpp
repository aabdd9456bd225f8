#include "vnoip/gradcheck_suite.hpp"

#include <ostream>

#include "vnoip/grad_check.hpp"
#include "vnoip/model.hpp"
#include "vnoip/ops.hpp"
#include "vnoip/rng.hpp"
#include "vnoip/trainer.hpp"

namespace vnoip {

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

struct ToyFixture {
  CascadeSample sample;
  ModelParams params;
  Tensor noise;
};

/// 3-event toy cascade with small dimensions; solver tolerances are tightened
/// so central differences stay smooth through the adaptive stepper.
ToyFixture toy_fixture() {
  constexpr std::int64_t d = 8;
  Rng rng(1234);

  EmbeddingTable table = EmbeddingTable::zeros(8, d);
  for (double& v : table.values) v = 0.5 * rng.normal();

  Cascade cascade;
  cascade.id = 7;
  cascade.root = 0;
  cascade.publish_time = 0.0;
  cascade.events = {{0, 1, 2.0}, {1, 2, 5.0}};

  ToyFixture fx;
  fx.sample = build_sample(cascade, table, 6.0, 10.0, 2);

  HyperParams hp;
  hp.embed_dim = d;
  hp.hidden_dim = 6;
  hp.latent_dim = 4;
  hp.grid_points = 2;
  hp.dopri_rtol = 1e-10;
  hp.dopri_atol = 1e-12;
  fx.params = ModelParams::init(hp, 99);
  fx.noise = random_tensor({hp.latent_dim}, rng, 1.0);
  return fx;
}

/// Flatten a parameter struct, run f on a rebuilt copy, and grad-check every
/// coordinate.
template <class Rebuild>
double check_params(ModelParams params, const Rebuild& loss_of, double step) {
  std::vector<Tensor> flat;
  params.visit([&flat](const std::string&, Tensor& t) { flat.push_back(t.detached()); });

  MultiScalarFn f = [&params, &loss_of](Tape&, const std::vector<Tensor>& leaves) {
    ModelParams rebuilt = params;
    std::size_t i = 0;
    rebuilt.visit([&](const std::string&, Tensor& t) { t = leaves[i++]; });
    return loss_of(rebuilt);
  };
  return grad_check_many(f, flat, step);
}

}  // namespace

std::vector<GradCheckReport> run_gradcheck_suite() {
  std::vector<GradCheckReport> reports;
  Rng rng(31337);
  constexpr double kStep = 1e-5;
  constexpr double kPrimitiveTol = 1e-6;
  constexpr double kModelTol = 1e-4;

  auto check1 = [&](const std::string& name, const ScalarFn& f, const Tensor& x) {
    const double err = grad_check(f, x, kStep);
    reports.push_back({name, err, kPrimitiveTol, err < kPrimitiveTol});
  };

  const Tensor m34 = random_tensor({3, 4}, rng);
  const Tensor m43 = random_tensor({4, 3}, rng);
  const Tensor m33 = random_tensor({3, 3}, rng);
  const Tensor v4 = random_tensor({4}, rng);
  const Tensor v4b = random_tensor({4}, rng, 0.5);

  check1("matmul.lhs", [&](Tape& t, const Tensor& x) { return sum(matmul(x, t.leaf(m43))); }, m34);
  check1("matmul.rhs", [&](Tape& t, const Tensor& x) { return sum(matmul(t.leaf(m34), x)); }, m43);
  check1("transpose", [&](Tape&, const Tensor& x) { return sum(mul(transpose(x), transpose(x))); },
         m34);
  check1("add", [&](Tape& t, const Tensor& x) { return sum(square(add(x, t.leaf(v4b)))); }, v4);
  check1("add_rowvec.m", [&](Tape& t, const Tensor& x) { return sum(square(add_rowvec(x, t.leaf(v4)))); },
         m34);
  check1("add_rowvec.v", [&](Tape& t, const Tensor& x) { return sum(square(add_rowvec(t.leaf(m34), x))); },
         v4);
  check1("sub", [&](Tape& t, const Tensor& x) { return sum(square(sub(x, t.leaf(v4b)))); }, v4);
  check1("mul", [&](Tape& t, const Tensor& x) { return sum(mul(x, mul(x, t.leaf(v4b)))); }, v4);
  check1("div", [&](Tape& t, const Tensor& x) { return sum(div(t.leaf(v4b), add(square(x), 1.0))); },
         v4);
  check1("scale_by", [&](Tape&, const Tensor& x) {
    return sum(scale_by(slice(x, 0, 3), slice(x, 3, 1)));
  }, v4);
  check1("mean", [&](Tape&, const Tensor& x) { return mean(square(x)); }, m34);
  check1("reshape", [&](Tape&, const Tensor& x) { return sum(square(reshape(x, {4, 3}))); }, m34);
  check1("row_col_slice", [&](Tape&, const Tensor& x) {
    return sum(mul(row(x, 1), slice(col(transpose(x), 2), 0, 4)));
  }, m34);
  check1("stack_concat_hstack", [&](Tape&, const Tensor& x) {
    Tensor stacked = stack_rows({row(x, 0), mul(row(x, 2), 2.0)});
    Tensor joined = concat({row(x, 0), row(x, 1)});
    return add(sum(square(hstack(stacked, stacked))), sum(square(joined)));
  }, m34);
  check1("sigmoid", [&](Tape&, const Tensor& x) { return sum(sigmoid(x)); }, v4);
  check1("tanh", [&](Tape&, const Tensor& x) { return sum(tanh_act(x)); }, v4);
  check1("softplus", [&](Tape&, const Tensor& x) { return sum(softplus(x)); }, v4);
  check1("relu", [&](Tape&, const Tensor& x) { return sum(square(relu(x))); }, v4);
  check1("erf", [&](Tape&, const Tensor& x) { return sum(erf_act(x)); }, v4);
  check1("exp", [&](Tape&, const Tensor& x) { return sum(exp_act(x)); }, v4);
  check1("log", [&](Tape&, const Tensor& x) { return sum(log_act(add(square(x), 0.5))); }, v4);
  check1("log1p", [&](Tape&, const Tensor& x) { return sum(log1p_act(square(x))); }, v4);
  check1("clamp_min", [&](Tape&, const Tensor& x) { return sum(square(clamp_min(x, -0.123))); },
         v4);
  check1("masked_softmax", [&](Tape&, const Tensor& x) {
    Tensor mask = causal_mask_forward(3);
    return sum(square(masked_softmax(x, mask)));
  }, m33);
  check1("softmax_rows", [&](Tape&, const Tensor& x) { return sum(square(softmax_rows(x))); },
         m33);
  check1("layer_norm.x", [&](Tape& t, const Tensor& x) {
    return sum(square(layer_norm(x, t.leaf(v4), t.leaf(v4b))));
  }, m34);
  check1("layer_norm.affine", [&](Tape& t, const Tensor& x) {
    return sum(square(layer_norm(t.leaf(m34), slice(x, 0, 4), slice(x, 0, 4))));
  }, v4);

  // Jump-ODE pass + fusion over a 3-event cascade, every encoder parameter.
  {
    ToyFixture fx = toy_fixture();
    const Tensor cascade_rows = add_temporal(fx.sample.cascade_view, fx.sample.times);
    const BiContext ctx = bidirectional_context(fx.sample.global_view, cascade_rows);
    const std::vector<double> times = fx.sample.times;
    const double euler_step = fx.params.hp.euler_step;

    const double err = check_params(
        fx.params,
        [&](const ModelParams& p) {
          JumpStates states = jump_ode_pass(ctx, times, p.seq, euler_step);
          return sum(square(fuse_states(states, p.seq)));
        },
        kStep);
    reports.push_back({"jump_ode_pass+fuse (3 events)", err, kModelTol, err < kModelTol});
  }

  // Full training loss on the toy cascade, every parameter in the model.
  {
    ToyFixture fx = toy_fixture();
    const double err = check_params(
        fx.params,
        [&](const ModelParams& p) { return forward_loss(p, fx.sample, fx.noise); }, kStep);
    reports.push_back({"full loss (toy cascade, all params)", err, kModelTol, err < kModelTol});
  }

  return reports;
}

bool print_gradcheck_report(const std::vector<GradCheckReport>& reports, std::ostream& out) {
  bool all_pass = true;
  for (const GradCheckReport& r : reports) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  max_rel_err=" << r.error
        << "  tol=" << r.tolerance << "\n";
    all_pass &= r.pass;
  }
  return all_pass;
}

}  // namespace vnoip
