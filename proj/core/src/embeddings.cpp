#include "vnoip/embeddings.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "binio.hpp"
#include "vnoip/errors.hpp"

namespace vnoip {

using namespace binio;

namespace {

constexpr char kCacheMagic[4] = {'V', 'N', 'E', 'B'};
constexpr std::uint32_t kCacheVersion = 1;

/// Canonical sign: the entry of largest magnitude (lowest index on ties) is
/// made positive, so automorphic inputs map to identical embeddings.
void fix_column_sign(Eigen::MatrixXd& u, Eigen::Index col) {
  Eigen::Index arg = 0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (std::abs(u(i, col)) > best + 1e-12) {
      best = std::abs(u(i, col));
      arg = i;
    }
  }
  if (u(arg, col) < 0.0) u.col(col) = -u.col(col);
}

}  // namespace

EmbeddingTable EmbeddingTable::zeros(std::int64_t rows, std::int64_t dim) {
  EmbeddingTable t;
  t.rows = rows;
  t.dim = dim;
  t.values.assign(static_cast<std::size_t>(rows * dim), 0.0);
  return t;
}

std::vector<double> shifted_ppmi_matrix(const GlobalGraph& g, int window, int neg) {
  const std::int64_t n = g.num_nodes;
  if (n == 0) throw ConfigError("shifted_ppmi_matrix: empty graph");
  if (window < 1 || neg < 1) throw ConfigError("window and neg must be >= 1");

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges) {
    adj(u, v) = 1.0;
    adj(v, u) = 1.0;
  }
  Eigen::VectorXd deg = adj.rowwise().sum();
  const double vol = deg.sum();
  std::vector<double> out(static_cast<std::size_t>(n * n), 0.0);
  if (vol == 0.0) return out;  // edgeless: nothing co-occurs

  // Exact transition powers averaged over walk lengths 1..window.
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t i = 0; i < n; ++i) {
    if (deg(i) > 0.0) trans.row(i) = adj.row(i) / deg(i);
  }
  Eigen::MatrixXd walk_avg = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int r = 0; r < window; ++r) {
    power = power * trans;
    walk_avg += power;
  }
  walk_avg /= static_cast<double>(window);

  // Shifted PPMI of stationary-weighted co-occurrence counts deg_i * walk_avg.
  for (std::int64_t i = 0; i < n; ++i) {
    if (deg(i) == 0.0) continue;
    for (std::int64_t j = 0; j < n; ++j) {
      if (deg(j) == 0.0) continue;
      const double ratio = vol * deg(i) * walk_avg(i, j) / (neg * deg(i) * deg(j));
      if (ratio > 1.0) out[static_cast<std::size_t>(i * n + j)] = std::log(ratio);
    }
  }
  return out;
}

EmbeddingTable embed_global(const GlobalGraph& g, std::int64_t dim, int window, int neg) {
  const std::int64_t n = g.num_nodes;
  if (n == 0) throw ConfigError("embed_global: empty graph");
  if (dim > n) {
    throw ConfigError("embed_global: dimension " + std::to_string(dim) +
                      " exceeds node count " + std::to_string(n));
  }
  const std::vector<double> flat = shifted_ppmi_matrix(g, window, neg);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      ppmi(flat.data(), n, n);

  // Symmetric by construction; the truncated SVD is the eigendecomposition
  // sorted by |eigenvalue| (stable, so ties keep ascending-order positions).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ppmi);
  if (eig.info() != Eigen::Success) throw NumericError("embed_global: eigensolver failed");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(eig.eigenvalues()(a)) > std::abs(eig.eigenvalues()(b));
  });

  Eigen::MatrixXd u(n, dim);
  Eigen::VectorXd sigma(dim);
  for (std::int64_t k = 0; k < dim; ++k) {
    u.col(k) = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    sigma(k) = std::abs(eig.eigenvalues()(order[static_cast<std::size_t>(k)]));
    fix_column_sign(u, k);
  }

  EmbeddingTable table = EmbeddingTable::zeros(n, dim);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t k = 0; k < dim; ++k)
      table.at(i, k) = u(i, k) * std::sqrt(sigma(k));
  return table;
}

EmbeddingTable embed_cascade(const GlobalGraph& g, std::int64_t dim,
                             const GraphWaveConfig& cfg) {
  const std::int64_t n = g.num_nodes;
  if (n == 0) throw ConfigError("embed_cascade: empty graph");
  const auto n_scales = static_cast<std::int64_t>(cfg.scales.size());
  if (n_scales == 0) throw ConfigError("embed_cascade: need at least one scale");
  if (dim % (2 * n_scales) != 0) {
    throw ConfigError("embed_cascade: dimension " + std::to_string(dim) +
                      " not divisible by 2 * " + std::to_string(n_scales) + " scales");
  }
  const std::int64_t samples = dim / (2 * n_scales);

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  if (eig.info() != Eigen::Success) throw NumericError("embed_cascade: eigensolver failed");

  EmbeddingTable table = EmbeddingTable::zeros(n, dim);
  for (std::int64_t si = 0; si < n_scales; ++si) {
    Eigen::VectorXd damp = (-cfg.scales[static_cast<std::size_t>(si)] *
                            eig.eigenvalues().array()).exp();
    Eigen::MatrixXd heat =
        eig.eigenvectors() * damp.asDiagonal() * eig.eigenvectors().transpose();
    for (std::int64_t a = 0; a < n; ++a) {
      // Wavelet centred at node a: column of the heat kernel.
      for (std::int64_t k = 1; k <= samples; ++k) {
        const double t = cfg.t_max * static_cast<double>(k) / static_cast<double>(samples);
        double re = 0.0, im = 0.0;
        for (std::int64_t m = 0; m < n; ++m) {
          re += std::cos(t * heat(m, a));
          im += std::sin(t * heat(m, a));
        }
        const std::int64_t base = si * 2 * samples + 2 * (k - 1);
        table.at(a, base) = re / static_cast<double>(n);
        table.at(a, base + 1) = im / static_cast<double>(n);
      }
    }
  }
  return table;
}

void save_embedding_cache(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write embedding cache " + path);
  out.write(kCacheMagic, 4);
  write_u32(out, kCacheVersion);
  write_u64(out, static_cast<std::uint64_t>(table.rows));
  write_u64(out, static_cast<std::uint64_t>(table.dim));
  for (double v : table.values) write_f64(out, v);
  if (!out) throw ConfigError("short write to embedding cache " + path);
}

EmbeddingTable load_embedding_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open embedding cache " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw ParseError("bad magic in embedding cache " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCacheVersion) {
    throw ParseError("unsupported embedding cache version " + std::to_string(version));
  }
  EmbeddingTable table;
  table.rows = static_cast<std::int64_t>(read_u64(in));
  table.dim = static_cast<std::int64_t>(read_u64(in));
  if (table.rows < 0 || table.dim < 0) throw ParseError("corrupt embedding cache header");
  table.values.resize(static_cast<std::size_t>(table.rows * table.dim));
  for (double& v : table.values) v = read_f64(in);
  if (!in) throw ParseError("truncated embedding cache " + path);
  return table;
}

}  // namespace vnoip
