#include "vnoip/tape.hpp"

#include <optional>

#include "vnoip/errors.hpp"

namespace vnoip {

bool GradientMap::contains(const Tensor& t) const {
  return t.tape() == tape_ && grads_.count(t.node()) > 0;
}

const Tensor& GradientMap::at(const Tensor& t) const {
  if (t.tape() != tape_) {
    throw NumericError("gradient lookup for a tensor from a different tape");
  }
  auto it = grads_.find(t.node());
  if (it == grads_.end()) {
    throw NumericError("tensor did not participate in the loss; no gradient");
  }
  return it->second;
}

Tensor Tape::leaf(const Tensor& value) {
  Tensor bound = value.detached();
  nodes_.push_back(Node{{}, {}, bound.shape(), nullptr});
  bound.tape_ = this;
  bound.node_ = static_cast<std::int64_t>(nodes_.size()) - 1;
  return bound;
}

Tensor Tape::record(std::vector<std::int64_t> shape, std::vector<double> values,
                    const std::vector<const Tensor*>& parents, BackwardFn backward) {
  Node node;
  node.shape = shape;
  node.backward = std::move(backward);
  for (const Tensor* p : parents) {
    if (p->on_tape() && p->tape() != this) {
      throw NumericError("operands recorded on two different tapes");
    }
    node.parent_ids.push_back(p->on_tape() ? p->node() : -1);
    node.parent_sizes.push_back(p->size());
  }
  nodes_.push_back(std::move(node));
  Tensor out(std::move(shape), std::move(values));
  out.tape_ = this;
  out.node_ = static_cast<std::int64_t>(nodes_.size()) - 1;
  return out;
}

GradientMap Tape::backward(const Tensor& loss) {
  if (loss.tape() != this) throw NumericError("loss is not recorded on this tape");
  if (loss.size() != 1 || loss.rank() != 0) {
    throw ShapeError("backward requires a scalar loss, got shape " + loss.shape_string());
  }
  if (consumed_) {
    throw NumericError("backward already ran on this tape; build a fresh tape per step");
  }
  consumed_ = true;

  std::vector<std::optional<std::vector<double>>> grads(nodes_.size());
  grads[static_cast<std::size_t>(loss.node())] = std::vector<double>{1.0};

  for (std::int64_t i = loss.node(); i >= 0; --i) {
    auto& g = grads[static_cast<std::size_t>(i)];
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (!g.has_value() || !node.backward) continue;

    std::vector<std::span<double>> parent_grads;
    parent_grads.reserve(node.parent_ids.size());
    for (std::size_t p = 0; p < node.parent_ids.size(); ++p) {
      std::int64_t pid = node.parent_ids[p];
      if (pid < 0) {
        parent_grads.emplace_back();
        continue;
      }
      auto& pg = grads[static_cast<std::size_t>(pid)];
      if (!pg.has_value()) {
        pg = std::vector<double>(static_cast<std::size_t>(node.parent_sizes[p]), 0.0);
      }
      parent_grads.emplace_back(pg->data(), pg->size());
    }
    node.backward(*g, parent_grads);
  }

  GradientMap out;
  out.tape_ = this;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (grads[i].has_value()) {
      out.grads_.emplace(static_cast<std::int64_t>(i),
                         Tensor(nodes_[i].shape, std::move(*grads[i])));
    }
  }
  return out;
}

Tape* common_tape(std::initializer_list<const Tensor*> operands) {
  Tape* tape = nullptr;
  for (const Tensor* t : operands) {
    if (!t->on_tape()) continue;
    if (tape == nullptr) {
      tape = t->tape();
    } else if (tape != t->tape()) {
      throw NumericError("operands recorded on two different tapes");
    }
  }
  return tape;
}

}  // namespace vnoip
