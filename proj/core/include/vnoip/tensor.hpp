#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vnoip {

class Tape;

/// Dense row-major double tensor. Plain value type: copying copies the data,
/// no operation mutates its inputs. A tensor is either detached (an immutable
/// value, safe to share read-only across threads) or bound to the tape that
/// recorded it, in which case gradients can be pulled back to it.
class Tensor {
public:
  Tensor() = default;
  Tensor(std::vector<std::int64_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::int64_t> shape);
  static Tensor full(std::vector<std::int64_t> shape, double value);
  static Tensor scalar(double value);                 // rank 0
  static Tensor vector(std::vector<double> values);   // rank 1

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t dim(std::int64_t i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  /// Scalar extraction; requires size() == 1.
  double item() const;

  double operator()(std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
  double operator()(std::int64_t i, std::int64_t j) const {
    return values_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double& operator()(std::int64_t i) { return values_[static_cast<std::size_t>(i)]; }
  double& operator()(std::int64_t i, std::int64_t j) {
    return values_[static_cast<std::size_t>(i * shape_[1] + j)];
  }

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::int64_t node() const { return node_; }

  /// Value-only copy, detached from any tape.
  Tensor detached() const { return Tensor(shape_, values_); }

  bool all_finite() const;
  std::string shape_string() const;

private:
  friend class Tape;

  std::vector<std::int64_t> shape_;
  std::vector<double> values_;
  Tape* tape_ = nullptr;
  std::int64_t node_ = -1;
};

std::int64_t shape_size(const std::vector<std::int64_t>& shape);

}  // namespace vnoip
