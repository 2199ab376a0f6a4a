#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace netsynth {

using NodeId = std::uint32_t;
using CategoryId = std::uint32_t;

inline constexpr double kDefaultDayLength = 86400.0;

// One flow: src -> dst over [start_time, start_time + duration] with a
// port/protocol label stored as an index into the owning graph's vocabulary.
struct NetflowRecord {
  NodeId src = 0;
  NodeId dst = 0;
  double start_time = 0.0;
  double duration = 0.0;
  CategoryId category = 0;

  double end_time() const { return start_time + duration; }
  bool operator==(const NetflowRecord&) const = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  auto operator<=>(const Edge&) const = default;
};

// The flow dataset: N nodes and M timed multi-edges. Immutable once built.
class DynamicMultigraph {
 public:
  DynamicMultigraph() = default;
  // Throws DataError when a flow references a node >= node_count, a category
  // outside the vocabulary, or has a negative duration / start time.
  // ip_map is either empty or has exactly node_count entries.
  DynamicMultigraph(std::size_t node_count, std::vector<NetflowRecord> flows,
                    std::vector<std::string> vocabulary, std::vector<std::string> ip_map = {},
                    double epoch = 0.0);

  std::size_t node_count() const { return node_count_; }
  std::size_t flow_count() const { return flows_.size(); }
  const std::vector<NetflowRecord>& flows() const { return flows_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<std::string>& ip_map() const { return ip_map_; }
  double epoch() const { return epoch_; }

  const std::string& label(const NetflowRecord& r) const { return vocabulary_[r.category]; }
  // IP string of a node, or its decimal id when no ip_map is attached.
  std::string node_name(NodeId id) const;
  // Largest start_time + duration over all flows (0 for an empty graph).
  double max_end_time() const;

  bool operator==(const DynamicMultigraph&) const = default;

 private:
  std::size_t node_count_ = 0;
  std::vector<NetflowRecord> flows_;
  std::vector<std::string> vocabulary_;
  std::vector<std::string> ip_map_;
  double epoch_ = 0.0;
};

// Simple graph (no duplicate pairs). Edges are kept sorted; for undirected
// graphs each pair is stored once as (min, max).
class StaticGraph {
 public:
  StaticGraph() = default;
  StaticGraph(std::size_t node_count, std::vector<Edge> edges, bool directed = true);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }
  bool contains(NodeId src, NodeId dst) const;

  // In + out degree for directed graphs; incident-edge count otherwise.
  // A self-loop contributes 2.
  std::vector<std::size_t> degrees() const;

  bool operator==(const StaticGraph&) const = default;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  bool directed_ = true;
};

// Neighbour lists of the undirected view with self-loops dropped; each list
// is sorted and duplicate-free.
std::vector<std::vector<NodeId>> undirected_neighbors(const StaticGraph& g);

// Column names used to resolve the flow 5-tuple out of a CSV header.
// The end time is read from `end` when set, otherwise from `duration`.
// The label is `port_protocol` when set, otherwise "<port>/<protocol>".
struct CsvSchema {
  std::string src = "src";
  std::string dst = "dst";
  std::string start = "start_time";
  std::string end;
  std::string duration = "duration";
  std::string port;
  std::string protocol;
  std::string port_protocol = "port_protocol";
};

struct IngestOptions {
  CsvSchema schema;
  // When set, node ids come from this id -> IP table; unseen IPs are appended.
  const std::vector<std::string>* known_ips = nullptr;
  // When set, times are rebased on this epoch instead of the minimum start.
  std::optional<double> epoch;
};

struct IngestStats {
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::string> warnings;
};

DynamicMultigraph ingest_csv(std::istream& in, const IngestOptions& options = {},
                             IngestStats* stats = nullptr);
DynamicMultigraph ingest_csv(const std::filesystem::path& path, const IngestOptions& options = {},
                             IngestStats* stats = nullptr);

// Serialized dialect: header src,dst,start_time,duration,port_protocol with
// absolute start times (epoch + start_time) in shortest round-trip decimals.
void write_csv(const DynamicMultigraph& g, std::ostream& out);
void write_csv(const DynamicMultigraph& g, const std::filesystem::path& path);

StaticGraph to_static(const DynamicMultigraph& g, bool directed = true);

// Sparse N x N count matrix.
class CountMatrix {
 public:
  explicit CountMatrix(std::size_t node_count = 0) : node_count_(node_count) {}

  std::size_t node_count() const { return node_count_; }
  double at(NodeId i, NodeId j) const;
  void add(NodeId i, NodeId j, double amount);
  const std::map<Edge, double>& entries() const { return entries_; }
  double total() const;

 private:
  std::size_t node_count_;
  std::map<Edge, double> entries_;
};

using DailyTensor = std::vector<CountMatrix>;

// Day t covers [t * day_length, (t + 1) * day_length). A flow is counted in
// every day its closed interval [start, end] intersects.
DailyTensor daily_tensor(const DynamicMultigraph& g, double day_length = kDefaultDayLength);

}  // namespace netsynth
