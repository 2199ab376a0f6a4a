#include "netsynth/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace netsynth {

BetweennessResult betweenness(const Adjacency& adj) {
  const std::size_t n = adj.size();
  BetweennessResult out;
  out.node.assign(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : adj[u]) {
      if (u < v) out.edge[{static_cast<NodeId>(u), v}] = 0.0;
    }
  }

  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<std::vector<NodeId>> preds(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();

    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<NodeId> queue{static_cast<NodeId>(s)};
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (NodeId w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : preds[w]) {
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        out.edge[{std::min(v, w), std::max(v, w)}] += c;
        delta[v] += c;
      }
      if (w != s) out.node[w] += delta[w];
    }
  }
  // Every unordered pair was counted from both endpoints.
  for (auto& v : out.node) v /= 2.0;
  for (auto& [_, v] : out.edge) v /= 2.0;
  return out;
}

std::vector<double> eigenvector_centrality(const Adjacency& adj, double tolerance,
                                           std::size_t max_iterations) {
  const std::size_t n = adj.size();
  if (n == 0) return {};
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> next(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t v = 0; v < n; ++v) {
      double s = x[v];
      for (NodeId w : adj[v]) s += x[w];
      next[v] = s;
    }
    double norm = 0.0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= norm;
      change += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    if (change < tolerance * static_cast<double>(n)) break;
  }
  return x;
}

std::vector<double> laplacian_centrality(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<double> deg(n);
  double energy = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    deg[v] = static_cast<double>(adj[v].size());
    energy += deg[v] * deg[v] + deg[v];  // d^2 plus this node's share of 2|E|
  }
  std::vector<double> out(n, 0.0);
  if (energy <= 0.0) return out;
  for (std::size_t v = 0; v < n; ++v) {
    double neighbor_sum = 0.0;
    for (NodeId w : adj[v]) neighbor_sum += deg[w];
    out[v] = (deg[v] * deg[v] + deg[v] + 2.0 * neighbor_sum) / energy;
  }
  return out;
}

std::vector<int> bfs_distances(const Adjacency& adj, NodeId source) {
  std::vector<int> dist(adj.size(), -1);
  dist[source] = 0;
  std::deque<NodeId> queue{source};
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : adj[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace netsynth
