#pragma once

#include <span>
#include <string>
#include <vector>

#include "vnoip/graph.hpp"

namespace vnoip {

/// Dense N x d table of node embeddings, row per node.
struct EmbeddingTable {
  std::int64_t rows = 0;
  std::int64_t dim = 0;
  std::vector<double> values;  // row-major

  static EmbeddingTable zeros(std::int64_t rows, std::int64_t dim);

  double at(std::int64_t i, std::int64_t j) const {
    return values[static_cast<std::size_t>(i * dim + j)];
  }
  double& at(std::int64_t i, std::int64_t j) {
    return values[static_cast<std::size_t>(i * dim + j)];
  }
  std::span<const double> row(std::int64_t i) const {
    return {values.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

/// Shifted PPMI of random-walk co-occurrence, dense row-major n x n:
/// log(max(1, vol * C_ij / (neg * deg_i * deg_j))) where C is the
/// stationary-weighted average of the exact transition powers 1..window.
/// Symmetric for any undirected graph.
std::vector<double> shifted_ppmi_matrix(const GlobalGraph& g, int window, int neg);

/// Global-graph structural embeddings: the shifted PPMI above factorized by a
/// deterministic truncated eigendecomposition; rows are U * sqrt(sigma) with
/// canonical column order and signs. Fully deterministic, no sketching.
EmbeddingTable embed_global(const GlobalGraph& g, std::int64_t dim, int window = 5,
                            int neg = 5);

struct GraphWaveConfig {
  std::vector<double> scales = {0.5, 1.0};
  double t_max = 10.0;
};

/// Cascade-graph structural embeddings: spectral heat-kernel wavelets via
/// exact Laplacian eigendecomposition; per node the embedding is the real and
/// imaginary parts of the wavelet's empirical characteristic function sampled
/// at dim / (2 * |scales|) evenly spaced points in (0, t_max]. Layout: scales
/// vary slowest, then sample points, each contributing (re, im).
EmbeddingTable embed_cascade(const GlobalGraph& g, std::int64_t dim,
                             const GraphWaveConfig& cfg = {});

/// Binary table cache: magic, version, N, d, row-major doubles, little-endian.
void save_embedding_cache(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embedding_cache(const std::string& path);

}  // namespace vnoip
