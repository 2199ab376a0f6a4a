#include "netsynth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "netsynth/errors.hpp"
#include "netsynth/random.hpp"

namespace netsynth {

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random") return BaselineKind::random;
  if (name == "scale_free" || name == "scale-free") return BaselineKind::scale_free;
  if (name == "rmat2" || name == "rmat") return BaselineKind::rmat2;
  throw PreconditionError("unknown baseline kind '" + std::string(name) + "'");
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::random: return "random";
    case BaselineKind::scale_free: return "scale_free";
    case BaselineKind::rmat2: return "rmat2";
  }
  return "unknown";
}

namespace {

void check_feasible(std::size_t nodes, std::size_t edges) {
  if (nodes == 0) throw PreconditionError("baseline needs at least one node");
  if (static_cast<long double>(edges) > static_cast<long double>(nodes) * nodes) {
    throw InfeasibleError("target edge count exceeds N^2");
  }
}

std::uint64_t key(NodeId a, NodeId b, std::size_t n) { return static_cast<std::uint64_t>(a) * n + b; }

// Adds uniform random pairs until `edges` holds `target` distinct pairs.
void top_up(std::unordered_set<std::uint64_t>& edges, std::size_t nodes, std::size_t target, Rng& rng) {
  const std::uint64_t cells = static_cast<std::uint64_t>(nodes) * nodes;
  if (target * 2 > cells) {
    // Dense: shuffle the complement instead of rejection sampling.
    std::vector<std::uint64_t> free;
    for (std::uint64_t c = 0; c < cells; ++c) {
      if (!edges.contains(c)) free.push_back(c);
    }
    for (std::size_t i = 0; edges.size() < target; ++i) {
      std::swap(free[i], free[i + rng.index(free.size() - i)]);
      edges.insert(free[i]);
    }
    return;
  }
  while (edges.size() < target) edges.insert(rng.index(cells));
}

StaticGraph from_keys(const std::unordered_set<std::uint64_t>& keys, std::size_t nodes) {
  std::vector<Edge> out;
  out.reserve(keys.size());
  for (std::uint64_t k : keys) out.push_back({static_cast<NodeId>(k / nodes), static_cast<NodeId>(k % nodes)});
  return StaticGraph(nodes, std::move(out), true);
}

}  // namespace

StaticGraph random_structure(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  check_feasible(nodes, edges);
  Rng rng(seed);
  std::unordered_set<std::uint64_t> keys;
  top_up(keys, nodes, edges, rng);
  return from_keys(keys, nodes);
}

StaticGraph scale_free_structure(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  check_feasible(nodes, edges);
  Rng rng(seed);
  const std::size_t m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(edges) / static_cast<double>(nodes))));
  std::unordered_set<std::uint64_t> keys;
  // Each endpoint occurrence is one ticket; drawing a ticket is degree-proportional.
  std::vector<NodeId> tickets;
  const std::size_t seed_nodes = std::min(nodes, m + 1);
  for (std::size_t u = 0; u < seed_nodes; ++u) {
    for (std::size_t v = 0; v < seed_nodes; ++v) {
      if (u == v) continue;
      if (keys.insert(key(static_cast<NodeId>(u), static_cast<NodeId>(v), nodes)).second && u < v) {
        tickets.push_back(static_cast<NodeId>(u));
        tickets.push_back(static_cast<NodeId>(v));
      }
    }
  }
  if (tickets.empty()) tickets.push_back(0);
  for (std::size_t u = seed_nodes; u < nodes; ++u) {
    std::vector<NodeId> targets;
    for (std::size_t attempt = 0; targets.size() < std::min(m, u) && attempt < 20 * m; ++attempt) {
      const NodeId t = tickets[rng.index(tickets.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      const bool outgoing = rng.bernoulli(0.5);
      const NodeId a = outgoing ? static_cast<NodeId>(u) : t;
      const NodeId b = outgoing ? t : static_cast<NodeId>(u);
      keys.insert(key(a, b, nodes));
      tickets.push_back(t);
      tickets.push_back(static_cast<NodeId>(u));
    }
  }
  if (keys.size() > edges) {
    std::vector<std::uint64_t> list(keys.begin(), keys.end());
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < edges; ++i) std::swap(list[i], list[i + rng.index(list.size() - i)]);
    list.resize(edges);
    keys = std::unordered_set<std::uint64_t>(list.begin(), list.end());
  } else {
    top_up(keys, nodes, edges, rng);
  }
  return from_keys(keys, nodes);
}

InitiatorMatrix rmat2_initiator(const DynamicMultigraph& ref, std::uint64_t seed, std::size_t iterations) {
  KronFitParams params;
  params.n1 = 2;
  params.seed = seed;
  params.iterations = iterations;
  return kronfit(to_static(ref), params);
}

DynamicMultigraph generate_baseline(const BaselineSpec& spec, const DynamicMultigraph& ref) {
  if (spec.kind == BaselineKind::rmat2) {
    return generate_baseline(spec, ref, rmat2_initiator(ref, spec.seed));
  }
  return generate_baseline(spec, ref, InitiatorMatrix());
}

DynamicMultigraph generate_baseline(const BaselineSpec& spec, const DynamicMultigraph& ref,
                                    const InitiatorMatrix& rmat_initiator) {
  if (ref.flow_count() == 0) throw PreconditionError("baselines resample a nonempty reference");
  check_feasible(spec.target_nodes, spec.target_edges);
  StaticGraph structure;
  switch (spec.kind) {
    case BaselineKind::random:
      structure = random_structure(spec.target_nodes, spec.target_edges, spec.seed);
      break;
    case BaselineKind::scale_free:
      structure = scale_free_structure(spec.target_nodes, spec.target_edges, spec.seed);
      break;
    case BaselineKind::rmat2:
      structure = sample_graph(rmat_initiator, {spec.target_nodes, spec.target_edges, 0, spec.seed});
      break;
  }

  std::vector<NetflowRecord> flows;
  if (spec.flow_count > 0) {
    if (structure.edge_count() == 0) throw InfeasibleError("cannot place flows on a graph without edges");
    Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    flows.reserve(spec.flow_count);
    for (std::size_t i = 0; i < spec.flow_count; ++i) {
      NetflowRecord rec = ref.flows()[rng.index(ref.flow_count())];
      const Edge& e = structure.edges()[rng.index(structure.edge_count())];
      rec.src = e.src;
      rec.dst = e.dst;
      flows.push_back(rec);
    }
  }
  std::vector<std::string> ip_map;
  if (!ref.ip_map().empty()) {
    ip_map = ref.ip_map();
    ip_map.resize(spec.target_nodes);
    for (std::size_t v = ref.node_count(); v < spec.target_nodes; ++v) ip_map[v] = "syn-" + std::to_string(v);
  }
  return DynamicMultigraph(spec.target_nodes, std::move(flows), ref.vocabulary(), std::move(ip_map),
                           ref.epoch());
}

}  // namespace netsynth
