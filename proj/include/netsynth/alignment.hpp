#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "netsynth/boosted_trees.hpp"
#include "netsynth/core_model.hpp"
#include "netsynth/feature_synth.hpp"
#include "netsynth/random.hpp"

namespace netsynth {

// Structural description of one directed edge (u, v).
struct StructuralDescriptor {
  static constexpr std::size_t kWidth = 9;

  double degree_src = 0.0;
  double degree_dst = 0.0;
  double betweenness_src = 0.0;
  double betweenness_dst = 0.0;
  double eigenvector_src = 0.0;
  double eigenvector_dst = 0.0;
  double laplacian_src = 0.0;
  double laplacian_dst = 0.0;
  double edge_betweenness = 0.0;

  std::array<double, kWidth> as_array() const {
    return {degree_src,      degree_dst,    betweenness_src, betweenness_dst, eigenvector_src,
            eigenvector_dst, laplacian_src, laplacian_dst,   edge_betweenness};
  }
};

using DescriptorMap = std::map<Edge, StructuralDescriptor>;

// Degree is the directed in + out degree; the centralities use the
// undirected view. Empty map for a graph without edges.
DescriptorMap structural_features(const StaticGraph& g);

// Cosine-similarity training set over (reference edge, reference flow) pairs.
struct AlignmentTargets {
  struct Pair {
    std::size_t edge = 0;     // index into edges
    std::size_t feature = 0;  // index into features
    double target = 0.0;
  };

  std::vector<Edge> edges;
  // Flow indices (into features) carried by each edge.
  std::vector<std::vector<std::size_t>> edge_flows;
  // Sum over the edge's flows of f / |f|.
  std::vector<std::vector<double>> normalized_sums;
  std::vector<EncodedFeature> features;
  std::vector<Pair> pairs;
  std::size_t excluded_features = 0;  // zero-norm rows dropped
};

// For every kept (edge, flow) pair: target = f . (sum_k f_k/|f_k|) / (|f| |k|),
// i.e. the mean cosine similarity of the flow to the edge's flows. Each pair
// is kept with probability sample_fraction (seeded), at least one overall.
AlignmentTargets build_targets(const DynamicMultigraph& ref, const FeatureEncoder& encoder,
                               double sample_fraction, std::uint64_t seed);

// Scorer input row: the encoded feature followed by the edge descriptor.
std::vector<double> scorer_input(const EncodedFeature& f, const StructuralDescriptor& d);

BoostedScorer train_scorer(const AlignmentTargets& targets, const DescriptorMap& descriptors,
                           const BoostingParams& params, std::vector<double>* mse_trace = nullptr);

// Picks an index proportional to max(score, 0), with scores below threshold
// zeroed. Uniform over all indices when nothing survives.
std::size_t sample_edge(std::span<const double> scores, double threshold, Rng& rng);

struct AssignOptions {
  double threshold = 0.0;
  double edge_fraction = 1.0;  // share of syn edges scored per feature row
  std::uint64_t seed = 0;
};

// Places each sampled feature row on one edge of syn_graph. The result keeps
// syn_graph's node count, the encoder's vocabulary and the given ip map/epoch.
DynamicMultigraph assign_edges(const BoostedScorer& scorer, const StaticGraph& syn_graph,
                               const SampledFeatures& features, const FeatureEncoder& encoder,
                               const AssignOptions& options,
                               std::vector<std::string> ip_map = {}, double epoch = 0.0);

}  // namespace netsynth
