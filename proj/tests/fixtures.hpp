#pragma once

// Synthetic reference datasets drawn from a known generating model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "netsynth/core_model.hpp"
#include "netsynth/kronecker.hpp"
#include "netsynth/random.hpp"

namespace netsynth::testing {

struct PlantedComponent {
  double weight;
  double start_mean, start_sd;
  double duration_mean, duration_sd;
};

inline const std::vector<std::string>& planted_labels() {
  static const std::vector<std::string> labels{"22/tcp", "443/tcp", "53/udp", "80/tcp"};
  return labels;
}

inline const std::vector<double>& planted_label_weights() {
  static const std::vector<double> w{0.1, 0.4, 0.3, 0.2};
  return w;
}

// Per-label (start_time, duration) mixtures over roughly three days.
inline const std::vector<std::vector<PlantedComponent>>& planted_mixtures() {
  static const std::vector<std::vector<PlantedComponent>> m{
      {{0.5, 43200, 3600, 600, 100}, {0.5, 120960, 7200, 900, 200}},
      {{0.7, 51840, 10800, 30, 5}, {0.3, 138240, 10800, 60, 10}},
      {{1.0, 86400, 30000, 0.5, 0.1}},
      {{0.6, 34560, 5000, 12, 3}, {0.4, 190080, 5000, 20, 4}}};
  return m;
}

// Structure from the initiator [[0.9, 0.6], [0.6, 0.2]]; every edge carries at
// least one flow and the rest pick edges uniformly. Labels follow the planted
// marginal and (start, duration) the planted per-label mixture, clamped at 0.
inline DynamicMultigraph planted_reference(std::uint64_t seed, std::size_t flows = 1000,
                                           std::size_t nodes = 128, std::size_t edges = 300) {
  const InitiatorMatrix a(2, {0.9, 0.6, 0.6, 0.2});
  const StaticGraph g = sample_graph(a, {nodes, edges, 0, seed});
  Rng rng(seed * 7919 + 17);
  std::vector<double> label_cumulative;
  double acc = 0.0;
  for (double w : planted_label_weights()) label_cumulative.push_back(acc += w);

  std::vector<NetflowRecord> out;
  out.reserve(flows);
  for (std::size_t i = 0; i < flows; ++i) {
    const std::size_t e = i < g.edge_count() ? i : rng.index(g.edge_count());
    const std::size_t c = rng.categorical(label_cumulative);
    const auto& mix = planted_mixtures()[c];
    double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < mix.size() && u > mix[k].weight) u -= mix[k++].weight;
    const auto& m = mix[k];
    out.push_back({g.edges()[e].src, g.edges()[e].dst, std::max(0.0, m.start_mean + m.start_sd * rng.normal()),
                   std::max(0.0, m.duration_mean + m.duration_sd * rng.normal()), static_cast<CategoryId>(c)});
  }
  std::vector<std::string> ips;
  for (std::size_t v = 0; v < nodes; ++v) {
    ips.push_back("10.0." + std::to_string(v / 256) + "." + std::to_string(v % 256));
  }
  return DynamicMultigraph(nodes, std::move(out), planted_labels(), std::move(ips), 1.6e9);
}

}  // namespace netsynth::testing
