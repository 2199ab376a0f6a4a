#include "netsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "netsynth/centrality.hpp"
#include "netsynth/errors.hpp"

namespace netsynth {

double edit_distance_sum(const DailyTensor& g, const DailyTensor& h) {
  const std::size_t days = std::max(g.size(), h.size());
  double total = 0.0;
  for (std::size_t t = 0; t < days; ++t) {
    const CountMatrix* a = t < g.size() ? &g[t] : nullptr;
    const CountMatrix* b = t < h.size() ? &h[t] : nullptr;
    if (a && b && a->node_count() != b->node_count()) {
      throw DataError("edit distance needs node-aligned graphs (node counts differ)");
    }
    if (!a || !b) {
      total += (a ? a : b)->total();
      continue;
    }
    // Merge the two sorted sparse maps.
    auto ia = a->entries().begin(), ea = a->entries().end();
    auto ib = b->entries().begin(), eb = b->entries().end();
    while (ia != ea || ib != eb) {
      if (ib == eb || (ia != ea && ia->first < ib->first)) {
        total += std::abs(ia->second);
        ++ia;
      } else if (ia == ea || ib->first < ia->first) {
        total += std::abs(ib->second);
        ++ib;
      } else {
        total += std::abs(ia->second - ib->second);
        ++ia;
        ++ib;
      }
    }
  }
  return total;
}

double edit_distance_sum(const DynamicMultigraph& g, const DynamicMultigraph& h, double day_length) {
  if (g.node_count() != h.node_count()) {
    throw DataError("edit distance needs node-aligned graphs: node counts " +
                    std::to_string(g.node_count()) + " and " + std::to_string(h.node_count()));
  }
  return edit_distance_sum(daily_tensor(g, day_length), daily_tensor(h, day_length));
}

EnsembleReport evaluate_ensemble(const DynamicMultigraph& ref, const Ensemble& ensemble) {
  const auto& members = ensemble.members;
  if (members.empty()) throw PreconditionError("ensemble must have at least one member");
  for (const auto& g : members) {
    if (g.node_count() != ref.node_count()) {
      throw DataError("ensemble member has " + std::to_string(g.node_count()) +
                      " nodes, reference has " + std::to_string(ref.node_count()) +
                      "; the metrics require node correspondence");
    }
  }
  const auto ref_tensor = daily_tensor(ref, ensemble.day_length);
  EnsembleReport out;
  DailyTensor mean;
  const double inv = 1.0 / static_cast<double>(members.size());
  for (const auto& g : members) {
    const auto tensor = daily_tensor(g, ensemble.day_length);
    out.member_distances.push_back(edit_distance_sum(ref_tensor, tensor));
    if (mean.size() < tensor.size()) mean.resize(tensor.size(), CountMatrix(ref.node_count()));
    for (std::size_t t = 0; t < tensor.size(); ++t) {
      for (const auto& [e, v] : tensor[t].entries()) mean[t].add(e.src, e.dst, v * inv);
    }
  }
  out.accuracy = edit_distance_sum(ref_tensor, mean);
  const std::size_t n = members.size();
  if (n < 2) return out;

  double sum = 0.0, sum_sq = 0.0;
  for (double d : out.member_distances) {
    sum += d;
    sum_sq += d * d;
  }
  const double avg = sum / static_cast<double>(n);
  double centered = 0.0;
  for (double d : out.member_distances) centered += (d - avg) * (d - avg);
  out.diversity = std::sqrt(centered / static_cast<double>(n - 1));
  out.radius = std::sqrt(sum_sq / static_cast<double>(n - 1));
  if (*out.radius > 0.0) {
    out.bias = *out.accuracy / *out.radius;
    out.variability = *out.diversity / *out.radius;
    out.error = *out.bias * *out.bias + *out.variability;
  }
  return out;
}

namespace {

nlohmann::json optional_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const EnsembleReport& r) {
  return nlohmann::json{{"A", optional_value(r.accuracy)},
                        {"D", optional_value(r.diversity)},
                        {"R", optional_value(r.radius)},
                        {"bias", optional_value(r.bias)},
                        {"variability", optional_value(r.variability)},
                        {"E", optional_value(r.error)},
                        {"members", r.member_distances}};
}

nlohmann::json to_json(const StructuralReport& r) {
  return nlohmann::json{{"degree_similarity", r.degree_similarity},
                        {"avg_path_length", r.avg_path_length},
                        {"effective_diameter", r.effective_diameter},
                        {"distinct_edges", r.distinct_edges},
                        {"density", r.density},
                        {"clustering", r.clustering}};
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StructuralReport structural_report(const StaticGraph& g, const StaticGraph& ref) {
  StructuralReport out;
  const double n = static_cast<double>(g.node_count());

  auto sorted_degrees = [](const StaticGraph& s) {
    const auto d = s.degrees();
    std::vector<double> v(d.begin(), d.end());
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
  };
  const auto dg = sorted_degrees(g);
  const auto dr = sorted_degrees(ref);
  double dot = 0.0, ng = 0.0, nr = 0.0;
  for (std::size_t i = 0; i < std::max(dg.size(), dr.size()); ++i) {
    const double a = i < dg.size() ? dg[i] : 0.0;
    const double b = i < dr.size() ? dr[i] : 0.0;
    dot += a * b;
    ng += a * a;
    nr += b * b;
  }
  if (ng > 0.0 && nr > 0.0) {
    out.degree_similarity = std::clamp(dot / std::sqrt(ng * nr), 0.0, 1.0);
  } else {
    out.degree_similarity = (ng == 0.0 && nr == 0.0) ? 1.0 : 0.0;
  }

  const auto adj = undirected_neighbors(g);
  std::vector<double> lengths;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    const auto dist = bfs_distances(adj, static_cast<NodeId>(s));
    for (std::size_t t = s + 1; t < adj.size(); ++t) {
      if (dist[t] > 0) lengths.push_back(dist[t]);
    }
  }
  if (!lengths.empty()) {
    double sum = 0.0;
    for (double l : lengths) sum += l;
    out.avg_path_length = sum / static_cast<double>(lengths.size());
    std::sort(lengths.begin(), lengths.end());
    out.effective_diameter = percentile_sorted(lengths, 0.9);
  }

  out.distinct_edges = static_cast<double>(g.edge_count());
  out.density = n > 0.0 ? static_cast<double>(g.edge_count()) / (n * n) : 0.0;

  double clustering = 0.0;
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const auto& nb = adj[v];
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        if (std::binary_search(adj[nb[a]].begin(), adj[nb[a]].end(), nb[b])) ++links;
      }
    }
    const double k = static_cast<double>(nb.size());
    clustering += 2.0 * static_cast<double>(links) / (k * (k - 1.0));
  }
  out.clustering = n > 0.0 ? clustering / n : 0.0;
  return out;
}

double EmpiricalCdf::at(double x) const {
  const auto it = std::upper_bound(points.begin(), points.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
  return it == points.begin() ? 0.0 : std::prev(it)->second;
}

EmpiricalCdf empirical_cdf(std::vector<double> values) {
  EmpiricalCdf out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.points.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  out.points.back().second = 1.0;
  return out;
}

double ks_distance(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  // Both are step functions that only change at their own points.
  double d = 0.0;
  for (const auto& [x, fa] : a.points) d = std::max(d, std::abs(fa - b.at(x)));
  for (const auto& [x, fb] : b.points) d = std::max(d, std::abs(a.at(x) - fb));
  return d;
}

std::vector<std::string> category_frequency_order(const DynamicMultigraph& g) {
  std::map<std::string, std::size_t> freq;
  for (const auto& f : g.flows()) ++freq[g.label(f)];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> out;
  for (auto& [label, _] : items) out.push_back(label);
  return out;
}

FeatureCdfs feature_cdfs(const DynamicMultigraph& g, std::vector<std::string> category_order) {
  FeatureCdfs out;
  if (category_order.empty()) category_order = category_frequency_order(g);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < category_order.size(); ++i) index.emplace(category_order[i], i);
  std::set<std::string> extra;
  for (const auto& f : g.flows()) {
    if (!index.contains(g.label(f))) extra.insert(g.label(f));
  }
  for (const auto& label : extra) {
    index.emplace(label, category_order.size());
    category_order.push_back(label);
  }
  std::vector<double> starts, durations, cats;
  for (const auto& f : g.flows()) {
    starts.push_back(f.start_time);
    durations.push_back(f.duration);
    cats.push_back(static_cast<double>(index.at(g.label(f))));
  }
  out.start_time = empirical_cdf(std::move(starts));
  out.duration = empirical_cdf(std::move(durations));
  out.port_protocol = empirical_cdf(std::move(cats));
  out.category_order = std::move(category_order);
  return out;
}

}  // namespace netsynth
