#include "vnoip/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <utility>

#include "vnoip/errors.hpp"

namespace vnoip {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatrixRM>;
using MapCM = Eigen::Map<const MatrixRM>;

Tensor finish(Tape* tape, std::vector<std::int64_t> shape, std::vector<double> values,
              const std::vector<const Tensor*>& parents, Tape::BackwardFn backward) {
  if (!tape) return Tensor(std::move(shape), std::move(values));
  return tape->record(std::move(shape), std::move(values), parents, std::move(backward));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
}

// Elementwise unary with gradient expressed in terms of input and output.
template <class Fwd, class Grad>
Tensor unary(const Tensor& x, Fwd f, Grad dfdx) {
  std::vector<double> y(x.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x.values()[i]);
  Tape* tape = common_tape({&x});
  if (!tape) return Tensor(x.shape(), std::move(y));
  std::vector<double> xv = x.values();
  std::vector<double> yv = y;
  return tape->record(
      x.shape(), std::move(y), {&x},
      [xv = std::move(xv), yv = std::move(yv), dfdx](const std::vector<double>& g,
                                                     const std::vector<std::span<double>>& pg) {
        if (pg[0].empty()) return;
        for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * dfdx(xv[i], yv[i]);
      });
}

}  // namespace

// -- shape --------------------------------------------------------------------

Tensor reshape(const Tensor& x, std::vector<std::int64_t> shape) {
  if (shape_size(shape) != x.size()) {
    throw ShapeError("reshape: size mismatch from " + x.shape_string());
  }
  Tape* tape = common_tape({&x});
  return finish(tape, std::move(shape), x.values(), {&x},
                [](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
                });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose requires rank 2, got " + x.shape_string());
  const std::int64_t r = x.dim(0), c = x.dim(1);
  std::vector<double> y(static_cast<std::size_t>(r * c));
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j)
      y[static_cast<std::size_t>(j * r + i)] = x(i, j);
  Tape* tape = common_tape({&x});
  return finish(tape, {c, r}, std::move(y), {&x},
                [r, c](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (std::int64_t j = 0; j < c; ++j)
                    for (std::int64_t i = 0; i < r; ++i)
                      pg[0][static_cast<std::size_t>(i * c + j)] +=
                          g[static_cast<std::size_t>(j * r + i)];
                });
}

Tensor row(const Tensor& x, std::int64_t i) {
  if (x.rank() != 2) throw ShapeError("row requires rank 2, got " + x.shape_string());
  if (i < 0 || i >= x.dim(0)) throw ShapeError("row index out of range");
  const std::int64_t c = x.dim(1);
  std::vector<double> y(x.values().begin() + i * c, x.values().begin() + (i + 1) * c);
  Tape* tape = common_tape({&x});
  return finish(tape, {c}, std::move(y), {&x},
                [i, c](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (std::int64_t j = 0; j < c; ++j)
                    pg[0][static_cast<std::size_t>(i * c + j)] += g[static_cast<std::size_t>(j)];
                });
}

Tensor col(const Tensor& x, std::int64_t j) {
  if (x.rank() != 2) throw ShapeError("col requires rank 2, got " + x.shape_string());
  if (j < 0 || j >= x.dim(1)) throw ShapeError("col index out of range");
  const std::int64_t r = x.dim(0), c = x.dim(1);
  std::vector<double> y(static_cast<std::size_t>(r));
  for (std::int64_t i = 0; i < r; ++i) y[static_cast<std::size_t>(i)] = x(i, j);
  Tape* tape = common_tape({&x});
  return finish(tape, {r}, std::move(y), {&x},
                [j, c, r](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (std::int64_t i = 0; i < r; ++i)
                    pg[0][static_cast<std::size_t>(i * c + j)] += g[static_cast<std::size_t>(i)];
                });
}

Tensor slice(const Tensor& x, std::int64_t start, std::int64_t len) {
  if (x.rank() != 1) throw ShapeError("slice requires rank 1, got " + x.shape_string());
  if (start < 0 || len <= 0 || start + len > x.dim(0)) throw ShapeError("slice out of range");
  std::vector<double> y(x.values().begin() + start, x.values().begin() + start + len);
  Tape* tape = common_tape({&x});
  return finish(tape, {len}, std::move(y), {&x},
                [start](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (std::size_t i = 0; i < g.size(); ++i)
                    pg[0][static_cast<std::size_t>(start) + i] += g[i];
                });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: empty input");
  const std::int64_t c = rows[0].size();
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(c) * rows.size());
  std::vector<const Tensor*> parents;
  parents.reserve(rows.size());
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.size() != c) {
      throw ShapeError("stack_rows: rows must be rank 1 of equal length");
    }
    y.insert(y.end(), r.values().begin(), r.values().end());
    parents.push_back(&r);
  }
  Tape* tape = nullptr;
  for (const Tensor& r : rows) {
    Tape* t = common_tape({&r});
    if (t) {
      if (tape && tape != t) throw NumericError("operands recorded on two different tapes");
      tape = t;
    }
  }
  const auto n = static_cast<std::int64_t>(rows.size());
  return finish(tape, {n, c}, std::move(y), parents,
                [c](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  for (std::size_t i = 0; i < pg.size(); ++i) {
                    if (pg[i].empty()) continue;
                    for (std::int64_t j = 0; j < c; ++j)
                      pg[i][static_cast<std::size_t>(j)] +=
                          g[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)];
                  }
                });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat: empty input");
  std::vector<double> y;
  std::vector<const Tensor*> parents;
  std::vector<std::int64_t> lens;
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (p.rank() != 1) throw ShapeError("concat requires rank-1 parts");
    y.insert(y.end(), p.values().begin(), p.values().end());
    parents.push_back(&p);
    lens.push_back(p.size());
    Tape* t = common_tape({&p});
    if (t) {
      if (tape && tape != t) throw NumericError("operands recorded on two different tapes");
      tape = t;
    }
  }
  const auto total = static_cast<std::int64_t>(y.size());
  return finish(tape, {total}, std::move(y), parents,
                [lens](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  std::size_t off = 0;
                  for (std::size_t i = 0; i < pg.size(); ++i) {
                    if (!pg[i].empty()) {
                      for (std::int64_t j = 0; j < lens[i]; ++j)
                        pg[i][static_cast<std::size_t>(j)] += g[off + static_cast<std::size_t>(j)];
                    }
                    off += static_cast<std::size_t>(lens[i]);
                  }
                });
}

Tensor hstack(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
    throw ShapeError("hstack: need matching row counts, got " + a.shape_string() + " and " +
                     b.shape_string());
  }
  const std::int64_t n = a.dim(0), p = a.dim(1), q = b.dim(1);
  std::vector<double> y(static_cast<std::size_t>(n * (p + q)));
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < p; ++j) y[static_cast<std::size_t>(i * (p + q) + j)] = a(i, j);
    for (std::int64_t j = 0; j < q; ++j)
      y[static_cast<std::size_t>(i * (p + q) + p + j)] = b(i, j);
  }
  Tape* tape = common_tape({&a, &b});
  return finish(tape, {n, p + q}, std::move(y), {&a, &b},
                [n, p, q](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  for (std::int64_t i = 0; i < n; ++i) {
                    if (!pg[0].empty())
                      for (std::int64_t j = 0; j < p; ++j)
                        pg[0][static_cast<std::size_t>(i * p + j)] +=
                            g[static_cast<std::size_t>(i * (p + q) + j)];
                    if (!pg[1].empty())
                      for (std::int64_t j = 0; j < q; ++j)
                        pg[1][static_cast<std::size_t>(i * q + j)] +=
                            g[static_cast<std::size_t>(i * (p + q) + p + j)];
                  }
                });
}

// -- arithmetic -----------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> y(a.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + b.values()[i];
  Tape* tape = common_tape({&a, &b});
  return finish(tape, a.shape(), std::move(y), {&a, &b},
                [](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  for (int p = 0; p < 2; ++p) {
                    if (pg[p].empty()) continue;
                    for (std::size_t i = 0; i < g.size(); ++i) pg[p][i] += g[i];
                  }
                });
}

Tensor add(const Tensor& a, double c) {
  return unary(a, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.dim(0)) {
    throw ShapeError("add_rowvec: " + m.shape_string() + " + " + v.shape_string());
  }
  const std::int64_t n = m.dim(0), d = m.dim(1);
  std::vector<double> y(m.values().size());
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      y[static_cast<std::size_t>(i * d + j)] = m(i, j) + v(j);
  Tape* tape = common_tape({&m, &v});
  return finish(tape, m.shape(), std::move(y), {&m, &v},
                [n, d](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (!pg[0].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
                  if (!pg[1].empty())
                    for (std::int64_t i = 0; i < n; ++i)
                      for (std::int64_t j = 0; j < d; ++j)
                        pg[1][static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i * d + j)];
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> y(a.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] - b.values()[i];
  Tape* tape = common_tape({&a, &b});
  return finish(tape, a.shape(), std::move(y), {&a, &b},
                [](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (!pg[0].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
                  if (!pg[1].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) pg[1][i] -= g[i];
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> y(a.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(y));
  std::vector<double> av = a.values(), bv = b.values();
  return tape->record(a.shape(), std::move(y), {&a, &b},
                      [av = std::move(av), bv = std::move(bv)](
                          const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                        if (!pg[0].empty())
                          for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * bv[i];
                        if (!pg[1].empty())
                          for (std::size_t i = 0; i < g.size(); ++i) pg[1][i] += g[i] * av[i];
                      });
}

Tensor mul(const Tensor& a, double c) {
  return unary(a, [c](double v) { return v * c; }, [c](double, double) { return c; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  std::vector<double> y(a.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] / b.values()[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(y));
  std::vector<double> bv = b.values(), yv = y;
  return tape->record(a.shape(), std::move(y), {&a, &b},
                      [bv = std::move(bv), yv = std::move(yv)](
                          const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                        if (!pg[0].empty())
                          for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] / bv[i];
                        if (!pg[1].empty())
                          for (std::size_t i = 0; i < g.size(); ++i)
                            pg[1][i] -= g[i] * yv[i] / bv[i];
                      });
}

Tensor neg(const Tensor& a) { return mul(a, -1.0); }

// -- reductions / matrix ----------------------------------------------------

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tape* tape = common_tape({&x});
  return finish(tape, {}, {s}, {&x},
                [](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (double& v : pg[0]) v += g[0];
                });
}

Tensor mean(const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tape* tape = common_tape({&x});
  return finish(tape, {}, {s * inv}, {&x},
                [inv](const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
                  if (pg[0].empty()) return;
                  for (double& v : pg[0]) v += g[0] * inv;
                });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul requires rank-2 operands, got " + a.shape_string() + " and " +
                     b.shape_string());
  }
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner extents differ, " + a.shape_string() + " x " +
                     b.shape_string());
  }
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> y(static_cast<std::size_t>(m * n));
  MapM(y.data(), m, n).noalias() = MapCM(a.data(), m, k) * MapCM(b.data(), k, n);
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor({m, n}, std::move(y));
  std::vector<double> av = a.values(), bv = b.values();
  return tape->record(
      {m, n}, std::move(y), {&a, &b},
      [av = std::move(av), bv = std::move(bv), m, k, n](
          const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
        MapCM G(g.data(), m, n);
        if (!pg[0].empty())
          MapM(pg[0].data(), m, k).noalias() += G * MapCM(bv.data(), k, n).transpose();
        if (!pg[1].empty())
          MapM(pg[1].data(), k, n).noalias() += MapCM(av.data(), m, k).transpose() * G;
      });
}

// -- elementwise nonlinearities -----------------------------------------------

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_act(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& x) {
  // Overflow-safe form: softplus(v) = max(v, 0) + log1p(exp(-|v|)).
  return unary(
      x,
      [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) { return 1.0 / (1.0 + std::exp(-v)); });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor erf_act(const Tensor& x) {
  constexpr double two_over_sqrt_pi = 1.1283791670955125739;
  return unary(x, [](double v) { return std::erf(v); },
               [](double v, double) { return two_over_sqrt_pi * std::exp(-v * v); });
}

Tensor exp_act(const Tensor& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log_act(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v > 0.0)) {
      throw NumericError("log domain violation: input " + std::to_string(v) + " <= 0");
    }
  }
  return unary(x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Tensor log1p_act(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v > -1.0)) {
      throw NumericError("log1p domain violation: input " + std::to_string(v) + " <= -1");
    }
  }
  return unary(x, [](double v) { return std::log1p(v); },
               [](double v, double) { return 1.0 / (1.0 + v); });
}

Tensor clamp_min(const Tensor& x, double floor) {
  return unary(x, [floor](double v) { return v < floor ? floor : v; },
               [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

Tensor scale_by(const Tensor& x, const Tensor& s) {
  if (s.size() != 1) throw ShapeError("scale_by: scale must have size 1");
  const double sv = s.values()[0];
  std::vector<double> y(x.values().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.values()[i] * sv;
  Tape* tape = common_tape({&x, &s});
  if (!tape) return Tensor(x.shape(), std::move(y));
  std::vector<double> xv = x.values();
  return tape->record(x.shape(), std::move(y), {&x, &s},
                      [xv = std::move(xv), sv](const std::vector<double>& g,
                                               const std::vector<std::span<double>>& pg) {
                        if (!pg[0].empty())
                          for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * sv;
                        if (!pg[1].empty())
                          for (std::size_t i = 0; i < g.size(); ++i) pg[1][0] += g[i] * xv[i];
                      });
}

// -- softmax / normalization ----------------------------------------------------

namespace {

Tensor softmax_impl(const Tensor& scores, const Tensor* mask) {
  if (scores.rank() != 2) {
    throw ShapeError("softmax requires rank 2, got " + scores.shape_string());
  }
  if (mask) check_same_shape(scores, *mask, "masked_softmax");
  const std::int64_t r = scores.dim(0), c = scores.dim(1);

  if (mask) {
    for (std::int64_t i = 0; i < r; ++i) {
      bool any_allowed = false;
      for (std::int64_t j = 0; j < c; ++j) {
        if ((*mask)(i, j) > kMaskBlocked / 2) { any_allowed = true; break; }
      }
      if (!any_allowed) {
        throw NumericError("masked_softmax: row " + std::to_string(i) +
                           " has every position blocked");
      }
    }
  }

  std::vector<double> y(static_cast<std::size_t>(r * c));
  for (std::int64_t i = 0; i < r; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j < c; ++j) {
      double z = scores(i, j) + (mask ? (*mask)(i, j) : 0.0);
      if (z > hi) hi = z;
    }
    double total = 0.0;
    for (std::int64_t j = 0; j < c; ++j) {
      double z = scores(i, j) + (mask ? (*mask)(i, j) : 0.0);
      double e = std::exp(z - hi);
      y[static_cast<std::size_t>(i * c + j)] = e;
      total += e;
    }
    for (std::int64_t j = 0; j < c; ++j) y[static_cast<std::size_t>(i * c + j)] /= total;
  }

  // Mask is an additive constant, never differentiated.
  Tape* tape = common_tape({&scores});
  if (!tape) return Tensor({r, c}, std::move(y));
  std::vector<double> yv = y;
  return tape->record({r, c}, std::move(y), {&scores},
                      [yv = std::move(yv), r, c](const std::vector<double>& g,
                                                 const std::vector<std::span<double>>& pg) {
                        if (pg[0].empty()) return;
                        for (std::int64_t i = 0; i < r; ++i) {
                          double gy = 0.0;
                          for (std::int64_t j = 0; j < c; ++j) {
                            auto k = static_cast<std::size_t>(i * c + j);
                            gy += g[k] * yv[k];
                          }
                          for (std::int64_t j = 0; j < c; ++j) {
                            auto k = static_cast<std::size_t>(i * c + j);
                            pg[0][k] += yv[k] * (g[k] - gy);
                          }
                        }
                      });
}

}  // namespace

Tensor masked_softmax(const Tensor& scores, const Tensor& mask) {
  return softmax_impl(scores, &mask);
}

Tensor softmax_rows(const Tensor& scores) { return softmax_impl(scores, nullptr); }

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  const bool vec = x.rank() == 1;
  if (!vec && x.rank() != 2) {
    throw ShapeError("layer_norm requires rank 1 or 2, got " + x.shape_string());
  }
  const std::int64_t n = vec ? 1 : x.dim(0);
  const std::int64_t d = vec ? x.dim(0) : x.dim(1);
  if (gain.rank() != 1 || gain.dim(0) != d || bias.rank() != 1 || bias.dim(0) != d) {
    throw ShapeError("layer_norm: gain/bias must be rank-1 of the last extent");
  }
  constexpr double eps = 1e-5;

  std::vector<double> y(x.values().size());
  std::vector<double> xhat(x.values().size());
  std::vector<double> inv_std(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::int64_t j = 0; j < d; ++j) mu += x.values()[static_cast<std::size_t>(i * d + j)];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      double c = x.values()[static_cast<std::size_t>(i * d + j)] - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = istd;
    for (std::int64_t j = 0; j < d; ++j) {
      auto k = static_cast<std::size_t>(i * d + j);
      xhat[k] = (x.values()[k] - mu) * istd;
      y[k] = gain(j) * xhat[k] + bias(j);
    }
  }

  Tape* tape = common_tape({&x, &gain, &bias});
  if (!tape) return Tensor(x.shape(), std::move(y));
  std::vector<double> gv = gain.values();
  return tape->record(
      x.shape(), std::move(y), {&x, &gain, &bias},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), gv = std::move(gv), n, d](
          const std::vector<double>& g, const std::vector<std::span<double>>& pg) {
        for (std::int64_t i = 0; i < n; ++i) {
          const double istd = inv_std[static_cast<std::size_t>(i)];
          double mean_gy = 0.0, mean_gyx = 0.0;
          for (std::int64_t j = 0; j < d; ++j) {
            auto k = static_cast<std::size_t>(i * d + j);
            const double gy = g[k] * gv[static_cast<std::size_t>(j)];
            mean_gy += gy;
            mean_gyx += gy * xhat[k];
          }
          mean_gy /= static_cast<double>(d);
          mean_gyx /= static_cast<double>(d);
          for (std::int64_t j = 0; j < d; ++j) {
            auto k = static_cast<std::size_t>(i * d + j);
            const double gy = g[k] * gv[static_cast<std::size_t>(j)];
            if (!pg[0].empty()) pg[0][k] += istd * (gy - mean_gy - xhat[k] * mean_gyx);
            if (!pg[1].empty()) pg[1][static_cast<std::size_t>(j)] += g[k] * xhat[k];
            if (!pg[2].empty()) pg[2][static_cast<std::size_t>(j)] += g[k];
          }
        }
      });
}

// -- compositions ---------------------------------------------------------------

Tensor log2p1(const Tensor& x) { return mul(log1p_act(x), 1.4426950408889634074); }

Tensor causal_mask_forward(std::int64_t n) {
  Tensor m = Tensor::zeros({n, n});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j) m(i, j) = kMaskBlocked;
  return m;
}

Tensor causal_mask_backward(std::int64_t n) {
  Tensor m = Tensor::zeros({n, n});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < i; ++j) m(i, j) = kMaskBlocked;
  return m;
}

}  // namespace vnoip
