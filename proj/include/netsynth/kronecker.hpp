#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "netsynth/core_model.hpp"
#include "netsynth/random.hpp"

namespace netsynth {

// n1 x n1 Kronecker initiator with the metadata of the fit that produced it.
class InitiatorMatrix {
 public:
  InitiatorMatrix() = default;
  // Row-major entries; throws PreconditionError unless entries.size() == n1^2,
  // n1 >= 2 and every entry is in [0, 1].
  InitiatorMatrix(std::size_t n1, std::vector<double> entries);

  std::size_t n1() const { return n1_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * n1_ + j]; }
  const std::vector<double>& entries() const { return entries_; }
  double sum() const;

  double log_likelihood = 0.0;
  double bic = 0.0;
  std::uint64_t seed = 0;
  // Kronecker position assigned to each node of the fitted graph (empty when
  // not fitted). Sampling maps positions back to these node ids.
  std::vector<std::uint64_t> node_positions;

  bool operator==(const InitiatorMatrix&) const = default;

 private:
  std::size_t n1_ = 0;
  std::vector<double> entries_;
};

void to_json(nlohmann::json& j, const InitiatorMatrix& m);
void from_json(const nlohmann::json& j, InitiatorMatrix& m);

// Smallest k with n1^k >= nodes (at least 1).
unsigned kron_levels(std::size_t n1, std::size_t nodes);

// Dense n1^k x n1^k probability matrix; only for small oracle-sized k.
struct ProbabilityMatrix {
  std::size_t side = 0;
  std::vector<double> values;
  double at(std::size_t i, std::size_t j) const { return values[i * side + j]; }
};

// Throws PreconditionError for k == 0 and when the result would exceed 2^26 cells.
ProbabilityMatrix kron_power(const InitiatorMatrix& a, unsigned k);

struct PositionPair {
  std::uint64_t row = 0;
  std::uint64_t col = 0;
};

// Draws one Kronecker position pair by k categorical choices over the
// normalized initiator entries. Level t contributes digit * n1^(t-1).
class KroneckerDrawer {
 public:
  KroneckerDrawer(const InitiatorMatrix& a, unsigned k);
  PositionPair draw(Rng& rng) const;
  std::uint64_t side() const { return side_; }

 private:
  std::size_t n1_;
  unsigned k_;
  std::uint64_t side_;
  std::vector<double> cumulative_;
};

struct KronSampleSpec {
  std::size_t target_nodes = 0;
  std::size_t target_edges = 0;
  unsigned k = 0;  // 0 = kron_levels(n1, target_nodes)
  std::uint64_t seed = 0;
};

struct SampleStats {
  std::size_t draws = 0;
  std::size_t duplicates = 0;
  std::size_t out_of_range = 0;
};

// Samples exactly target_edges distinct directed edges (self-loops allowed).
// Positions are mapped to nodes through a.node_positions when that map fits
// the spec (same node count and k), else identity with positions >= N redrawn.
StaticGraph sample_graph(const InitiatorMatrix& a, const KronSampleSpec& spec,
                         SampleStats* stats = nullptr);

struct KronFitParams {
  std::size_t n1 = 2;
  std::size_t iterations = 100;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  double swaps_per_node = 10.0;
  double clamp_epsilon = 1e-4;
};

struct KronFitTrace {
  std::vector<double> log_likelihood;  // estimate at each iteration
  std::vector<double> acceptance_rate;
};

InitiatorMatrix kronfit(const StaticGraph& g, const KronFitParams& params,
                        KronFitTrace* trace = nullptr);

// -l + 1/2 n1^2 log(N^2), natural log.
double bic(double log_likelihood, std::size_t n1, std::size_t node_count);

// Fits every candidate size and returns the minimum-BIC fit; ties go to the
// smaller n1. Candidate fits run concurrently.
// Index of the lowest-BIC fit; ties go to the smaller n1.
std::size_t min_bic_index(std::span<const InitiatorMatrix> fits);

InitiatorMatrix select_n1(const StaticGraph& g, std::span<const std::size_t> candidates,
                          const KronFitParams& params);

}  // namespace netsynth
