#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "netsynth/baselines.hpp"
#include "netsynth/boosted_trees.hpp"
#include "netsynth/core_model.hpp"
#include "netsynth/feature_synth.hpp"
#include "netsynth/kronecker.hpp"

namespace netsynth {

struct AlignmentConfig {
  double threshold = 0.0;
  std::size_t trees = 200;
  std::size_t depth = 4;
  double learning_rate = 0.1;
  double sample_fraction = 1.0;
  // Upper bound on (edge, flow) training pairs; 0 = no bound.
  std::size_t pair_budget = 50000;
  double edge_fraction = 1.0;
};

struct PipelineConfig {
  std::filesystem::path input;         // reference CSV
  std::filesystem::path model_dir;     // fit output / generate input
  std::filesystem::path output_dir;    // generate and baseline output
  std::filesystem::path ensemble_dir;  // evaluate input (defaults to output_dir)
  std::filesystem::path report_dir;    // evaluate output (defaults to ensemble_dir)
  CsvSchema schema;

  std::vector<std::size_t> n1_candidates{2, 3};
  std::size_t fit_iterations = 100;
  double fit_learning_rate = 0.01;
  std::size_t feature_modes = 10;
  AlignmentConfig alignment;

  std::size_t ensemble_size = 20;
  double day_length = kDefaultDayLength;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::optional<std::size_t> nodes;
  std::optional<std::size_t> edges;
  std::optional<std::size_t> flows;

  BaselineKind baseline = BaselineKind::random;
};

// Throws PreconditionError naming the first out-of-range knob.
void validate(const PipelineConfig& config);

void to_json(nlohmann::json& j, const PipelineConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 over the canonical JSON dump of the model-relevant settings
// (paths excluded), as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

inline constexpr const char* kModelArtifacts[] = {"initiator.json", "encoder.json", "sampler.json",
                                                  "scorer.json", "manifest.json"};

struct ModelBundle {
  InitiatorMatrix initiator;
  FeatureEncoder encoder;
  FeatureSampler sampler;
  BoostedScorer scorer;
  nlohmann::json manifest;

  std::size_t reference_nodes() const;
  std::size_t reference_edges() const;
  std::size_t reference_flows() const;
  double epoch() const;
  std::vector<std::string> ip_map() const;
};

// Runs every fit stage on the reference CSV and writes the five artifacts.
// A failing stage is rethrown with its name prefixed; files written so far
// are removed.
ModelBundle cmd_fit(const PipelineConfig& config);
ModelBundle fit_model(const DynamicMultigraph& ref, const PipelineConfig& config);
void save_model(const ModelBundle& model, const std::filesystem::path& dir);
ModelBundle load_model(const std::filesystem::path& dir);

struct MemberTargets {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t flows = 0;
};

MemberTargets member_targets(const ModelBundle& model, const PipelineConfig& config);

// One ensemble member: sample_graph -> sample_features -> assign_edges.
DynamicMultigraph generate_member(const ModelBundle& model, const MemberTargets& targets,
                                  const PipelineConfig& config, std::uint64_t member_seed);

std::string member_file_name(std::size_t index);

// Writes member_000.csv ... and ensemble.json into output_dir. Member i uses
// seed + i. Returns the written CSV paths.
std::vector<std::filesystem::path> cmd_generate(const PipelineConfig& config);
std::vector<std::filesystem::path> cmd_generate(const PipelineConfig& config, const ModelBundle& model);

// Same layout as cmd_generate for the configured baseline kind.
std::vector<std::filesystem::path> cmd_baseline(const PipelineConfig& config);

struct EvaluationResult {
  nlohmann::json report;      // ensemble sphere metrics
  nlohmann::json structural;  // per-member structural measures
  nlohmann::json features;    // per-member KS distances of the feature marginals
};

// Reads every member_*.csv (or, failing that, every *.csv) in ensemble_dir,
// aligns its nodes to the reference, and writes report.json,
// structural.json, features.json and cdf_{start_time,duration,port_protocol}.csv.
EvaluationResult cmd_evaluate(const PipelineConfig& config);

}  // namespace netsynth
