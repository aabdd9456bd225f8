#pragma once

#include <functional>
#include <vector>

#include "vnoip/tape.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

/// Scalar-valued function of one leaf tensor, evaluated on a caller-supplied tape.
using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;

/// Scalar-valued function of several leaf tensors.
using MultiScalarFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

/// Compare the taped gradient of f at x against central finite differences
/// with the given step. Returns max over coordinates of
/// |analytic - numeric| / max(1, |analytic|).
double grad_check(const ScalarFn& f, const Tensor& x, double step = 1e-5);

/// Same over a list of tensors (e.g. every parameter of a model).
double grad_check_many(const MultiScalarFn& f, const std::vector<Tensor>& xs,
                       double step = 1e-5);

}  // namespace vnoip
