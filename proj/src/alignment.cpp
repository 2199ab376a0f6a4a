#include "netsynth/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netsynth/centrality.hpp"
#include "netsynth/errors.hpp"

namespace netsynth {

DescriptorMap structural_features(const StaticGraph& g) {
  DescriptorMap out;
  if (g.edge_count() == 0) return out;
  const auto adj = undirected_neighbors(g);
  const auto degree = g.degrees();
  const auto between = betweenness(adj);
  const auto eigen = eigenvector_centrality(adj);
  const auto laplace = laplacian_centrality(adj);
  for (const auto& e : g.edges()) {
    StructuralDescriptor d;
    d.degree_src = static_cast<double>(degree[e.src]);
    d.degree_dst = static_cast<double>(degree[e.dst]);
    d.betweenness_src = between.node[e.src];
    d.betweenness_dst = between.node[e.dst];
    d.eigenvector_src = eigen[e.src];
    d.eigenvector_dst = eigen[e.dst];
    d.laplacian_src = laplace[e.src];
    d.laplacian_dst = laplace[e.dst];
    if (e.src != e.dst) {
      d.edge_betweenness = between.edge.at({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    }
    out.emplace(e, d);
  }
  return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

AlignmentTargets build_targets(const DynamicMultigraph& ref, const FeatureEncoder& encoder,
                               double sample_fraction, std::uint64_t seed) {
  if (ref.flow_count() == 0) throw PreconditionError("alignment targets need a nonempty reference");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw PreconditionError("sample_fraction must be in (0, 1]");
  }
  Rng rng(seed);
  AlignmentTargets out;
  const std::size_t m = ref.flow_count();
  out.features.reserve(m);
  std::vector<double> norms(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& f = ref.flows()[j];
    out.features.push_back(encoder.encode({f.start_time, f.duration, ref.label(f)}, rng));
    norms[j] = std::sqrt(dot(out.features[j].values, out.features[j].values));
    if (!(norms[j] > 0.0)) ++out.excluded_features;
  }

  std::map<Edge, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < m; ++j) {
    if (norms[j] > 0.0) groups[{ref.flows()[j].src, ref.flows()[j].dst}].push_back(j);
  }
  const std::size_t width = encoder.width();
  for (auto& [edge, flows] : groups) {
    std::vector<double> acc(width, 0.0);
    for (std::size_t j : flows) {
      for (std::size_t c = 0; c < width; ++c) acc[c] += out.features[j].values[c] / norms[j];
    }
    out.edges.push_back(edge);
    out.edge_flows.push_back(std::move(flows));
    out.normalized_sums.push_back(std::move(acc));
  }

  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    const double k = static_cast<double>(out.edge_flows[i].size());
    for (std::size_t j = 0; j < m; ++j) {
      if (!(norms[j] > 0.0)) continue;
      if (sample_fraction < 1.0 && !rng.bernoulli(sample_fraction)) continue;
      const double target = dot(out.features[j].values, out.normalized_sums[i]) / (norms[j] * k);
      out.pairs.push_back({i, j, target});
    }
  }
  if (out.pairs.empty() && !out.edges.empty()) {
    // Subsampling dropped everything; keep one pair so training can proceed.
    const std::size_t i = rng.index(out.edges.size());
    const std::size_t j = out.edge_flows[i].front();
    const double k = static_cast<double>(out.edge_flows[i].size());
    out.pairs.push_back({i, j, dot(out.features[j].values, out.normalized_sums[i]) / (norms[j] * k)});
  }
  return out;
}

std::vector<double> scorer_input(const EncodedFeature& f, const StructuralDescriptor& d) {
  std::vector<double> row(f.values);
  const auto arr = d.as_array();
  row.insert(row.end(), arr.begin(), arr.end());
  return row;
}

BoostedScorer train_scorer(const AlignmentTargets& targets, const DescriptorMap& descriptors,
                           const BoostingParams& params, std::vector<double>* mse_trace) {
  if (targets.pairs.empty()) throw PreconditionError("scorer training needs at least one pair");
  const std::size_t width = targets.features.front().values.size() + StructuralDescriptor::kWidth;
  FeatureMatrix x(targets.pairs.size(), width);
  std::vector<double> y(targets.pairs.size());
  std::vector<std::array<double, StructuralDescriptor::kWidth>> edge_desc;
  edge_desc.reserve(targets.edges.size());
  for (const auto& e : targets.edges) {
    const auto it = descriptors.find(e);
    if (it == descriptors.end()) throw PreconditionError("no structural descriptor for a reference edge");
    edge_desc.push_back(it->second.as_array());
  }
  for (std::size_t r = 0; r < targets.pairs.size(); ++r) {
    const auto& p = targets.pairs[r];
    auto row = x.row(r);
    const auto& fv = targets.features[p.feature].values;
    std::copy(fv.begin(), fv.end(), row.begin());
    std::copy(edge_desc[p.edge].begin(), edge_desc[p.edge].end(), row.begin() + fv.size());
    y[r] = p.target;
  }
  return train_boosted(x, y, params, mse_trace);
}

std::size_t sample_edge(std::span<const double> scores, double threshold, Rng& rng) {
  if (scores.empty()) throw PreconditionError("cannot sample from an empty edge set");
  std::vector<double> cumulative(scores.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double w = std::max(scores[i], 0.0);
    if (w < threshold) w = 0.0;
    cumulative[i] = acc += w;
  }
  if (!(acc > 0.0)) return rng.index(scores.size());
  return rng.categorical(cumulative);
}

DynamicMultigraph assign_edges(const BoostedScorer& scorer, const StaticGraph& syn_graph,
                               const SampledFeatures& features, const FeatureEncoder& encoder,
                               const AssignOptions& options, std::vector<std::string> ip_map,
                               double epoch) {
  if (options.threshold < 0.0) throw PreconditionError("alignment threshold must be >= 0");
  if (!(options.edge_fraction > 0.0 && options.edge_fraction <= 1.0)) {
    throw PreconditionError("edge_fraction must be in (0, 1]");
  }
  if (features.rows.size() != features.encoded.size()) {
    throw PreconditionError("feature rows and encodings differ in length");
  }
  const auto& vocab = encoder.vocabulary();
  if (features.rows.empty()) {
    return DynamicMultigraph(syn_graph.node_count(), {}, vocab, std::move(ip_map), epoch);
  }
  if (syn_graph.edge_count() == 0) throw PreconditionError("cannot assign flows to an empty graph");

  const auto descriptors = structural_features(syn_graph);
  const auto& edges = syn_graph.edges();
  const std::size_t feature_width = encoder.width();
  const std::size_t width = feature_width + StructuralDescriptor::kWidth;
  if (scorer.feature_count() != width) {
    throw PreconditionError("scorer input width does not match encoder + descriptor width");
  }
  std::vector<std::array<double, StructuralDescriptor::kWidth>> edge_desc;
  edge_desc.reserve(edges.size());
  for (const auto& e : edges) edge_desc.push_back(descriptors.at(e).as_array());

  const std::size_t subset =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(options.edge_fraction * edges.size())));
  Rng rng(options.seed);
  std::vector<std::size_t> candidates(edges.size());
  std::iota(candidates.begin(), candidates.end(), 0);
  std::vector<double> scores;
  std::vector<double> row(width);
  std::vector<NetflowRecord> flows;
  flows.reserve(features.rows.size());
  for (std::size_t j = 0; j < features.rows.size(); ++j) {
    const auto& fv = features.encoded[j].values;
    if (fv.size() != feature_width) throw PreconditionError("encoded feature width mismatch");
    std::copy(fv.begin(), fv.end(), row.begin());
    std::size_t count = edges.size();
    if (subset < edges.size()) {
      for (std::size_t i = 0; i < subset; ++i) std::swap(candidates[i], candidates[i + rng.index(edges.size() - i)]);
      count = subset;
    }
    scores.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
      const auto& d = edge_desc[candidates[c]];
      std::copy(d.begin(), d.end(), row.begin() + feature_width);
      scores[c] = scorer.predict(row);
    }
    const std::size_t pick = candidates[sample_edge(scores, options.threshold, rng)];
    const auto& f = features.rows[j];
    NetflowRecord rec;
    rec.src = edges[pick].src;
    rec.dst = edges[pick].dst;
    rec.start_time = std::max(0.0, f.start_time);
    rec.duration = std::max(0.0, f.duration);
    rec.category = static_cast<CategoryId>(encoder.category_index(f.port_protocol));
    flows.push_back(rec);
  }
  return DynamicMultigraph(syn_graph.node_count(), std::move(flows), vocab, std::move(ip_map), epoch);
}

}  // namespace netsynth
