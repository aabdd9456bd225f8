#include "vnoip/tensor.hpp"

#include <cmath>
#include <sstream>

#include "vnoip/errors.hpp"

namespace vnoip {

std::int64_t shape_size(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (std::int64_t e : shape_) {
    if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_string());
  }
  if (shape_size(shape_) != static_cast<std::int64_t>(values_.size())) {
    throw ShapeError("tensor data length " + std::to_string(values_.size()) +
                     " does not match shape " + shape_string());
  }
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
  std::vector<double> v(static_cast<std::size_t>(shape_size(shape)), 0.0);
  return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
  std::vector<double> v(static_cast<std::size_t>(shape_size(shape)), value);
  return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  auto n = static_cast<std::int64_t>(values.size());
  return Tensor({n}, std::move(values));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() requires a size-1 tensor, shape " + shape_string());
  return values_[0];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace vnoip
