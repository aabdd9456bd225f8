#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "vnoip/embeddings.hpp"
#include "vnoip/errors.hpp"

using namespace vnoip;

namespace {

GlobalGraph path5() {
  return GlobalGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
}

GlobalGraph star6() {
  return GlobalGraph::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
}

GlobalGraph two_triangles() {
  return GlobalGraph::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
}

double row_distance(const EmbeddingTable& t, std::int64_t a, std::int64_t b) {
  double worst = 0.0;
  for (std::int64_t j = 0; j < t.dim; ++j) {
    worst = std::max(worst, std::abs(t.at(a, j) - t.at(b, j)));
  }
  return worst;
}

/// Independent PPMI oracle: expected co-occurrence counts from explicit
/// enumeration of every random walk of length 1..window, weighted by the
/// walk's probability and the start node's degree.
std::vector<double> brute_force_ppmi(const GlobalGraph& g, int window, int neg) {
  const std::int64_t n = g.num_nodes;
  std::vector<std::vector<std::int64_t>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  double vol = 0.0;
  for (const auto& nb : adj) vol += static_cast<double>(nb.size());

  std::vector<double> cooc(static_cast<std::size_t>(n * n), 0.0);
  for (std::int64_t start = 0; start < n; ++start) {
    const double deg_start = static_cast<double>(adj[static_cast<std::size_t>(start)].size());
    if (deg_start == 0.0) continue;
    // Depth-first enumeration of all walks up to `window` steps.
    struct Frame {
      std::int64_t node;
      double prob;
      int depth;
    };
    std::vector<Frame> stack{{start, 1.0, 0}};
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      if (f.depth == window) continue;
      const auto& nb = adj[static_cast<std::size_t>(f.node)];
      for (std::int64_t next : nb) {
        const double p = f.prob / static_cast<double>(nb.size());
        cooc[static_cast<std::size_t>(start * n + next)] +=
            deg_start * p / static_cast<double>(window);
        stack.push_back({next, p, f.depth + 1});
      }
    }
  }

  std::vector<double> ppmi(static_cast<std::size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(adj[static_cast<std::size_t>(i)].size());
    for (std::int64_t j = 0; j < n; ++j) {
      const double dj = static_cast<double>(adj[static_cast<std::size_t>(j)].size());
      if (di == 0.0 || dj == 0.0) continue;
      const double ratio = vol * cooc[static_cast<std::size_t>(i * n + j)] / (neg * di * dj);
      if (ratio > 1.0) ppmi[static_cast<std::size_t>(i * n + j)] = std::log(ratio);
    }
  }
  return ppmi;
}

}  // namespace

TEST_CASE("shifted PPMI matches the walk-enumeration oracle") {
  for (const GlobalGraph& g : {path5(), star6(), two_triangles()}) {
    const auto fast = shifted_ppmi_matrix(g, 4, 2);
    const auto slow = brute_force_ppmi(g, 4, 2);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("PPMI is symmetric and equivariant under the path automorphism") {
  const GlobalGraph g = path5();
  const auto m = shifted_ppmi_matrix(g, 5, 5);
  const std::int64_t n = 5;
  auto at = [&](std::int64_t i, std::int64_t j) { return m[static_cast<std::size_t>(i * n + j)]; };
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      CHECK(at(i, j) == doctest::Approx(at(j, i)).epsilon(1e-13));
      CHECK(at(i, j) == doctest::Approx(at(n - 1 - i, n - 1 - j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("path graph mirror nodes share an embedding row") {
  const EmbeddingTable t = embed_global(path5(), 2);
  CHECK(row_distance(t, 0, 4) < 1e-8);
  CHECK(row_distance(t, 1, 3) < 1e-8);
}

TEST_CASE("star leaves are pairwise equal") {
  const EmbeddingTable t = embed_global(star6(), 2);
  for (std::int64_t a = 1; a < 6; ++a) {
    for (std::int64_t b = a + 1; b < 6; ++b) {
      CHECK(row_distance(t, a, b) < 1e-8);
    }
  }
}

TEST_CASE("isomorphic components give rows that permute coordinates") {
  const EmbeddingTable t = embed_global(two_triangles(), 2);
  // Every node of a triangle is in the same orbit; across components the rows
  // agree up to the deterministic column order/sign conventions, so their
  // sorted absolute entries coincide.
  auto sorted_abs = [&](std::int64_t i) {
    std::vector<double> v;
    for (std::int64_t j = 0; j < t.dim; ++j) v.push_back(std::abs(t.at(i, j)));
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto ref = sorted_abs(0);
  for (std::int64_t i = 1; i < 6; ++i) {
    const auto got = sorted_abs(i);
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK(got[j] == doctest::Approx(ref[j]).epsilon(1e-8));
    }
  }
}

TEST_CASE("embed_global is deterministic and error-checked") {
  const EmbeddingTable a = embed_global(two_triangles(), 3);
  const EmbeddingTable b = embed_global(two_triangles(), 3);
  CHECK(a.values == b.values);

  CHECK_THROWS_AS(embed_global(GlobalGraph{}, 2), ConfigError);           // empty graph
  CHECK_THROWS_AS(embed_global(path5(), 6), ConfigError);                 // rank error
}

TEST_CASE("embeddings stay finite on disconnected graphs with isolated nodes") {
  // Node 3 is isolated, nodes 4-5 form a component.
  const GlobalGraph g = GlobalGraph::from_edges(6, {{0, 1}, {1, 2}, {4, 5}});
  const EmbeddingTable t = embed_global(g, 3);
  for (double v : t.values) CHECK(std::isfinite(v));
  // Isolated node has no co-occurrences at all.
  for (std::int64_t j = 0; j < t.dim; ++j) CHECK(t.at(3, j) == 0.0);

  const EmbeddingTable w = embed_cascade(g, 4);
  for (double v : w.values) CHECK(std::isfinite(v));
}

TEST_CASE("graphwave: structurally equivalent star leaves coincide") {
  const EmbeddingTable t = embed_cascade(star6(), 8);
  for (std::int64_t a = 1; a < 6; ++a) {
    for (std::int64_t b = a + 1; b < 6; ++b) {
      CHECK(row_distance(t, a, b) < 1e-8);
    }
  }
  // Hub differs from the leaves.
  CHECK(row_distance(t, 0, 1) > 1e-4);
}

TEST_CASE("graphwave single-node closed form is (cos t, sin t)") {
  GlobalGraph one;
  one.num_nodes = 1;
  GraphWaveConfig cfg;
  cfg.scales = {0.7};
  cfg.t_max = 10.0;
  const std::int64_t dim = 6;  // 3 sample points
  const EmbeddingTable t = embed_cascade(one, dim, cfg);
  for (std::int64_t k = 1; k <= 3; ++k) {
    const double tk = 10.0 * static_cast<double>(k) / 3.0;
    CHECK(t.at(0, 2 * (k - 1)) == doctest::Approx(std::cos(tk)).epsilon(1e-12));
    CHECK(t.at(0, 2 * (k - 1) + 1) == doctest::Approx(std::sin(tk)).epsilon(1e-12));
  }
}

TEST_CASE("graphwave scale zero reduces to the indicator's characteristic function") {
  // 4-node graph; at s = 0 the wavelet is the delta at the node, so the
  // characteristic function mixes n-1 zeros and one 1.
  const GlobalGraph g = GlobalGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  GraphWaveConfig cfg;
  cfg.scales = {0.0};
  cfg.t_max = 10.0;
  const std::int64_t dim = 4;  // 2 sample points
  const EmbeddingTable t = embed_cascade(g, dim, cfg);
  const double n = 4.0;
  for (std::int64_t a = 0; a < 4; ++a) {
    for (std::int64_t k = 1; k <= 2; ++k) {
      const double tk = 10.0 * static_cast<double>(k) / 2.0;
      CHECK(t.at(a, 2 * (k - 1)) == doctest::Approx(((n - 1.0) + std::cos(tk)) / n).epsilon(1e-12));
      CHECK(t.at(a, 2 * (k - 1) + 1) == doctest::Approx(std::sin(tk) / n).epsilon(1e-12));
    }
  }
}

TEST_CASE("graphwave validates the dimension split") {
  CHECK_THROWS_AS(embed_cascade(star6(), 6), ConfigError);  // 6 % (2*2 scales) != 0
}

TEST_CASE("embedding cache round-trips bit-exactly") {
  const EmbeddingTable t = embed_global(two_triangles(), 3);
  const auto path = std::filesystem::temp_directory_path() / "vnoip_cache_test.bin";
  save_embedding_cache(t, path.string());
  const EmbeddingTable back = load_embedding_cache(path.string());
  CHECK(back.rows == t.rows);
  CHECK(back.dim == t.dim);
  CHECK(back.values == t.values);

  // Corrupt magic is rejected.
  {
    FILE* f = std::fopen(path.string().c_str(), "r+b");
    REQUIRE(f);
    std::fputc('X', f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_embedding_cache(path.string()), ParseError);
  std::filesystem::remove(path);
}
