#include "netsynth/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

#include "netsynth/csv.hpp"
#include "netsynth/errors.hpp"

namespace netsynth {

DynamicMultigraph::DynamicMultigraph(std::size_t node_count, std::vector<NetflowRecord> flows,
                                     std::vector<std::string> vocabulary,
                                     std::vector<std::string> ip_map, double epoch)
    : node_count_(node_count),
      flows_(std::move(flows)),
      vocabulary_(std::move(vocabulary)),
      ip_map_(std::move(ip_map)),
      epoch_(epoch) {
  if (!ip_map_.empty() && ip_map_.size() != node_count_) {
    throw DataError("ip map has " + std::to_string(ip_map_.size()) + " entries for " +
                    std::to_string(node_count_) + " nodes");
  }
  for (const auto& f : flows_) {
    if (f.src >= node_count_ || f.dst >= node_count_) {
      throw DataError("flow endpoint out of range for node count " + std::to_string(node_count_));
    }
    if (f.category >= vocabulary_.size()) {
      throw DataError("flow category index outside vocabulary");
    }
    if (!(f.duration >= 0.0) || !(f.start_time >= 0.0) || !std::isfinite(f.end_time())) {
      throw DataError("flow has negative or non-finite time fields");
    }
  }
}

std::string DynamicMultigraph::node_name(NodeId id) const {
  return ip_map_.empty() ? std::to_string(id) : ip_map_[id];
}

double DynamicMultigraph::max_end_time() const {
  double out = 0.0;
  for (const auto& f : flows_) out = std::max(out, f.end_time());
  return out;
}

StaticGraph::StaticGraph(std::size_t node_count, std::vector<Edge> edges, bool directed)
    : node_count_(node_count), edges_(std::move(edges)), directed_(directed) {
  for (auto& e : edges_) {
    if (e.src >= node_count_ || e.dst >= node_count_) {
      throw DataError("edge endpoint out of range for node count " + std::to_string(node_count_));
    }
    if (!directed_ && e.src > e.dst) std::swap(e.src, e.dst);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool StaticGraph::contains(NodeId src, NodeId dst) const {
  if (!directed_ && src > dst) std::swap(src, dst);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{src, dst});
}

std::vector<std::size_t> StaticGraph::degrees() const {
  std::vector<std::size_t> deg(node_count_, 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  return deg;
}

std::vector<std::vector<NodeId>> undirected_neighbors(const StaticGraph& g) {
  std::vector<std::vector<NodeId>> adj(g.node_count());
  for (const auto& e : g.edges()) {
    if (e.src == e.dst) continue;
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

namespace {

std::size_t resolve_column(const csv::Row& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (name.empty() || it == header.end()) {
    throw SchemaError("missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

DynamicMultigraph ingest_csv(std::istream& in, const IngestOptions& options, IngestStats* stats) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw DataError("empty CSV input (no header)");

  const CsvSchema& schema = options.schema;
  const csv::Row& header = rows.front();
  const std::size_t c_src = resolve_column(header, schema.src);
  const std::size_t c_dst = resolve_column(header, schema.dst);
  const std::size_t c_start = resolve_column(header, schema.start);
  const bool has_end = !schema.end.empty();
  const std::size_t c_time = has_end ? resolve_column(header, schema.end)
                                     : resolve_column(header, schema.duration);
  const bool has_label = !schema.port_protocol.empty() &&
                         std::find(header.begin(), header.end(), schema.port_protocol) != header.end();
  std::size_t c_label = 0, c_port = 0, c_proto = 0;
  if (has_label) {
    c_label = resolve_column(header, schema.port_protocol);
  } else if (schema.port.empty() && schema.protocol.empty()) {
    throw SchemaError("missing column '" + schema.port_protocol + "'");
  } else {
    c_port = resolve_column(header, schema.port);
    c_proto = resolve_column(header, schema.protocol);
  }

  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  st = IngestStats{};

  struct RawFlow {
    std::string src, dst, label;
    double start, duration;
  };
  std::vector<RawFlow> raw;
  raw.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    ++st.rows_read;
    const std::size_t needed =
        std::max({c_src, c_dst, c_start, c_time, c_label, c_port, c_proto}) + 1;
    if (row.size() < needed) {
      ++st.rows_rejected;
      st.warnings.push_back("line " + std::to_string(r + 1) + ": too few fields");
      continue;
    }
    const double start = csv::parse_double(row[c_start], schema.start);
    const double t = csv::parse_double(row[c_time], has_end ? schema.end : schema.duration);
    const double duration = has_end ? t - start : t;
    if (!(duration >= 0.0) || !std::isfinite(start)) {
      ++st.rows_rejected;
      st.warnings.push_back("line " + std::to_string(r + 1) + ": negative duration, row rejected");
      continue;
    }
    std::string label = has_label ? row[c_label] : row[c_port] + "/" + row[c_proto];
    raw.push_back({row[c_src], row[c_dst], std::move(label), start, duration});
  }

  double epoch = 0.0;
  if (options.epoch) {
    epoch = *options.epoch;
  } else if (!raw.empty()) {
    epoch = std::numeric_limits<double>::infinity();
    for (const auto& f : raw) epoch = std::min(epoch, f.start);
  }

  std::vector<std::string> ip_map;
  std::unordered_map<std::string, NodeId> ip_index;
  if (options.known_ips) {
    ip_map = *options.known_ips;
    for (std::size_t i = 0; i < ip_map.size(); ++i) ip_index.emplace(ip_map[i], static_cast<NodeId>(i));
  }
  auto node_of = [&](const std::string& ip) {
    auto [it, inserted] = ip_index.emplace(ip, static_cast<NodeId>(ip_map.size()));
    if (inserted) ip_map.push_back(ip);
    return it->second;
  };

  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, CategoryId> vocab_index;
  std::vector<NetflowRecord> flows;
  flows.reserve(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto& f = raw[r];
    const double start = f.start - epoch;
    if (!(start >= 0.0)) {
      ++st.rows_rejected;
      st.warnings.push_back("flow starts before the dataset epoch, row rejected");
      continue;
    }
    NetflowRecord rec;
    rec.src = node_of(f.src);
    rec.dst = node_of(f.dst);
    rec.start_time = start;
    rec.duration = f.duration;
    auto [it, inserted] = vocab_index.emplace(f.label, static_cast<CategoryId>(vocabulary.size()));
    if (inserted) vocabulary.push_back(f.label);
    rec.category = it->second;
    flows.push_back(rec);
  }

  const std::size_t n = ip_map.size();
  return DynamicMultigraph(n, std::move(flows), std::move(vocabulary), std::move(ip_map), epoch);
}

DynamicMultigraph ingest_csv(const std::filesystem::path& path, const IngestOptions& options,
                             IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file " + path.string());
  return ingest_csv(in, options, stats);
}

void write_csv(const DynamicMultigraph& g, std::ostream& out) {
  out << "src,dst,start_time,duration,port_protocol\n";
  for (const auto& f : g.flows()) {
    out << csv::escape(g.node_name(f.src)) << ',' << csv::escape(g.node_name(f.dst)) << ','
        << csv::format_double(g.epoch() + f.start_time) << ',' << csv::format_double(f.duration)
        << ',' << csv::escape(g.label(f)) << '\n';
  }
}

void write_csv(const DynamicMultigraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(g, out);
  if (!out) throw DataError("write failed for " + path.string());
}

StaticGraph to_static(const DynamicMultigraph& g, bool directed) {
  std::vector<Edge> edges;
  edges.reserve(g.flow_count());
  for (const auto& f : g.flows()) edges.push_back({f.src, f.dst});
  return StaticGraph(g.node_count(), std::move(edges), directed);
}

double CountMatrix::at(NodeId i, NodeId j) const {
  const auto it = entries_.find({i, j});
  return it == entries_.end() ? 0.0 : it->second;
}

void CountMatrix::add(NodeId i, NodeId j, double amount) { entries_[{i, j}] += amount; }

double CountMatrix::total() const {
  double sum = 0.0;
  for (const auto& [_, v] : entries_) sum += v;
  return sum;
}

DailyTensor daily_tensor(const DynamicMultigraph& g, double day_length) {
  if (!(day_length > 0.0)) throw PreconditionError("day_length must be positive");
  if (g.flow_count() == 0) return {};
  const auto days = static_cast<std::size_t>(std::floor(g.max_end_time() / day_length)) + 1;
  DailyTensor out(days, CountMatrix(g.node_count()));
  for (const auto& f : g.flows()) {
    const auto first = static_cast<std::size_t>(std::floor(f.start_time / day_length));
    const auto last = static_cast<std::size_t>(std::floor(f.end_time() / day_length));
    for (std::size_t t = first; t <= last; ++t) out[t].add(f.src, f.dst, 1.0);
  }
  return out;
}

}  // namespace netsynth
