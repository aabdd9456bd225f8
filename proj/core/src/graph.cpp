#include "vnoip/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vnoip/errors.hpp"

namespace vnoip {

GlobalGraph GlobalGraph::from_edges(
    std::int64_t num_nodes, std::vector<std::pair<std::int64_t, std::int64_t>> raw_edges) {
  GlobalGraph g;
  g.num_nodes = num_nodes;
  g.edges.reserve(raw_edges.size());
  for (auto [u, v] : raw_edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw ConfigError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") outside node range [0, " + std::to_string(num_nodes) + ")");
    }
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

std::vector<std::int64_t> GlobalGraph::degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(num_nodes), 0);
  for (auto [u, v] : edges) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  return deg;
}

GlobalGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  std::int64_t max_id = -1;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::int64_t u, v;
    if (!(ls >> u >> v)) {
      throw ParseError("expected `u<TAB>v` in " + path, line_no);
    }
    if (u < 0 || v < 0) throw ParseError("negative node id in " + path, line_no);
    edges.emplace_back(u, v);
    max_id = std::max({max_id, u, v});
  }
  return GlobalGraph::from_edges(max_id + 1, std::move(edges));
}

void save_edge_list(const GlobalGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file " + path);
  for (auto [u, v] : g.edges) out << u << '\t' << v << '\n';
}

}  // namespace vnoip
