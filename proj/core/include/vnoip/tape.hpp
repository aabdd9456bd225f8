#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "vnoip/tensor.hpp"

namespace vnoip {

/// Gradients produced by one Tape::backward call, keyed by tape node.
/// Tensors that did not participate in the loss have no entry.
class GradientMap {
public:
  bool contains(const Tensor& t) const;
  const Tensor& at(const Tensor& t) const;

private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::unordered_map<std::int64_t, Tensor> grads_;
};

/// Reverse-mode differentiation tape. Single-threaded; records every primitive
/// applied to tensors bound to it and replays them backward once.
class Tape {
public:
  /// Backward callback: accumulate into the parents' gradient buffers.
  /// parent_grads[i] is empty for detached (non-differentiable) parents.
  using BackwardFn = std::function<void(const std::vector<double>& out_grad,
                                        const std::vector<std::span<double>>& parent_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Bind a value to the tape as a differentiable leaf.
  Tensor leaf(const Tensor& value);

  /// Record one primitive. Called by the op library, not by model code.
  Tensor record(std::vector<std::int64_t> shape, std::vector<double> values,
                const std::vector<const Tensor*>& parents, BackwardFn backward);

  /// Replay the tape backward from a scalar loss. Single-shot: a second call
  /// on the same tape is an error, preventing silent gradient accumulation.
  GradientMap backward(const Tensor& loss);

  std::size_t node_count() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

private:
  struct Node {
    std::vector<std::int64_t> parent_ids;    // -1 marks a detached parent
    std::vector<std::int64_t> parent_sizes;
    std::vector<std::int64_t> shape;
    BackwardFn backward;                     // empty for leaves
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// The tape shared by the given operands, nullptr if all are detached.
/// Mixing tensors from two different tapes is a contract violation.
Tape* common_tape(std::initializer_list<const Tensor*> operands);

}  // namespace vnoip
