#pragma once

#include <cmath>
#include <vector>

#include "vnoip/tape.hpp"
#include "vnoip/tensor.hpp"

namespace vnoip {

// Every op is a pure function: it computes a fresh value and, when any
// differentiable operand is bound to a tape, records itself there. Ops on
// detached tensors stay detached.

// -- shape ------------------------------------------------------------------
Tensor reshape(const Tensor& x, std::vector<std::int64_t> shape);
Tensor transpose(const Tensor& x);                      // {r,c} -> {c,r}
Tensor row(const Tensor& x, std::int64_t i);            // {r,c} -> {c}
Tensor col(const Tensor& x, std::int64_t j);            // {r,c} -> {r}
Tensor slice(const Tensor& x, std::int64_t start, std::int64_t len);  // rank 1
Tensor stack_rows(const std::vector<Tensor>& rows);     // n x {c} -> {n,c}
Tensor concat(const std::vector<Tensor>& parts);        // rank-1 concat
Tensor hstack(const Tensor& a, const Tensor& b);        // {n,p},{n,q} -> {n,p+q}

// -- arithmetic -------------------------------------------------------------
Tensor add(const Tensor& a, const Tensor& b);           // same shape
Tensor add(const Tensor& a, double c);
Tensor add_rowvec(const Tensor& m, const Tensor& v);    // {n,d} + {d} per row
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);           // elementwise
Tensor mul(const Tensor& a, double c);
Tensor div(const Tensor& a, const Tensor& b);           // elementwise
Tensor neg(const Tensor& a);

// -- reductions / matrix ----------------------------------------------------
Tensor sum(const Tensor& x);                            // -> scalar
Tensor mean(const Tensor& x);                           // -> scalar
Tensor matmul(const Tensor& a, const Tensor& b);        // {m,k}x{k,n}

// -- elementwise nonlinearities ---------------------------------------------
Tensor sigmoid(const Tensor& x);
Tensor tanh_act(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor erf_act(const Tensor& x);
Tensor exp_act(const Tensor& x);
Tensor log_act(const Tensor& x);                        // domain x > 0
Tensor log1p_act(const Tensor& x);                      // domain x > -1
Tensor clamp_min(const Tensor& x, double floor);        // gradient passes where x > floor

/// Multiply a tensor by a size-1 tensor; gradients flow to both.
Tensor scale_by(const Tensor& x, const Tensor& s);

// -- softmax / normalization --------------------------------------------------
/// Row softmax of (scores + mask). Mask entries are 0 (allowed) or a large
/// negative additive constant (blocked); a fully blocked row is an error.
Tensor masked_softmax(const Tensor& scores, const Tensor& mask);
Tensor softmax_rows(const Tensor& scores);

/// Per-row standardization over the last extent, then affine. Accepts {d} or
/// {n,d}. Variance is epsilon-guarded (1e-5 inside the square root).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

// -- compositions -----------------------------------------------------------
inline Tensor square(const Tensor& x) { return mul(x, x); }
/// log2(x + 1), the popularity transform used throughout the losses.
Tensor log2p1(const Tensor& x);
inline double log2p1(double x) { return std::log1p(x) * 1.4426950408889634074; }

/// Additive mask constant for blocked attention positions.
inline constexpr double kMaskBlocked = -1e9;

/// Lower-triangular (past-to-future) additive mask including self.
Tensor causal_mask_forward(std::int64_t n);
/// Upper-triangular (future-to-past) additive mask including self.
Tensor causal_mask_backward(std::int64_t n);

}  // namespace vnoip
