#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "netsynth/core_model.hpp"
#include "netsynth/kronecker.hpp"

namespace netsynth {

enum class BaselineKind { random, scale_free, rmat2 };

BaselineKind parse_baseline_kind(std::string_view name);
std::string_view to_string(BaselineKind kind);

struct BaselineSpec {
  BaselineKind kind = BaselineKind::random;
  std::size_t target_nodes = 0;
  std::size_t target_edges = 0;
  std::size_t flow_count = 0;
  std::uint64_t seed = 0;
};

// Uniformly random set of E distinct directed pairs (self-loops allowed).
StaticGraph random_structure(std::size_t nodes, std::size_t edges, std::uint64_t seed);

// Preferential-attachment growth with m = max(1, round(E / N)) links per new
// node, then uniform random additions/removals to land on exactly E edges.
StaticGraph scale_free_structure(std::size_t nodes, std::size_t edges, std::uint64_t seed);

// Structure from the chosen kind's generator; each of the M flows copies a uniformly
// drawn reference row's features onto a uniformly drawn structural edge.
// rmat2 fits a 2x2 initiator to the reference (see rmat2_initiator).
DynamicMultigraph generate_baseline(const BaselineSpec& spec, const DynamicMultigraph& ref);

// Same, with a precomputed 2x2 initiator (avoids refitting per member).
DynamicMultigraph generate_baseline(const BaselineSpec& spec, const DynamicMultigraph& ref,
                                    const InitiatorMatrix& rmat_initiator);

InitiatorMatrix rmat2_initiator(const DynamicMultigraph& ref, std::uint64_t seed,
                                std::size_t iterations = 100);

}  // namespace netsynth
