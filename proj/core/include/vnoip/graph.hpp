#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vnoip {

/// Undirected graph over integer node ids [0, num_nodes). Used both for the
/// global user network and for per-cascade repost graphs. Normalization drops
/// self-loops and duplicate edges.
struct GlobalGraph {
  std::int64_t num_nodes = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;  // u < v after normalization

  static GlobalGraph from_edges(std::int64_t num_nodes,
                                std::vector<std::pair<std::int64_t, std::int64_t>> raw_edges);

  std::vector<std::int64_t> degrees() const;
};

/// Text edge list, one `u<TAB>v` pair per line.
GlobalGraph load_edge_list(const std::string& path);
void save_edge_list(const GlobalGraph& g, const std::string& path);

}  // namespace vnoip
