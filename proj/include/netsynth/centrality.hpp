#pragma once

#include <map>
#include <vector>

#include "netsynth/core_model.hpp"

namespace netsynth {

using Adjacency = std::vector<std::vector<NodeId>>;

struct BetweennessResult {
  std::vector<double> node;
  // Keyed by (min, max) endpoint pair.
  std::map<Edge, double> edge;
};

// Brandes accumulation on an undirected, unweighted graph. Values are
// unnormalized and count each unordered pair once.
BetweennessResult betweenness(const Adjacency& adj);

// Dominant eigenvector of the adjacency matrix (power iteration on A + I,
// unit L2 norm, non-negative).
std::vector<double> eigenvector_centrality(const Adjacency& adj, double tolerance = 1e-8,
                                           std::size_t max_iterations = 1000);

// Relative drop in Laplacian energy (sum d^2 + 2|E|) when a node is removed.
std::vector<double> laplacian_centrality(const Adjacency& adj);

// All-pairs BFS hop distances from `source`; -1 for unreachable.
std::vector<int> bfs_distances(const Adjacency& adj, NodeId source);

}  // namespace netsynth
