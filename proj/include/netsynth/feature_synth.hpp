#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "netsynth/core_model.hpp"
#include "netsynth/gmm.hpp"
#include "netsynth/random.hpp"

namespace netsynth {

// Non-topological part of a flow.
struct FlowFeatures {
  double start_time = 0.0;
  double duration = 0.0;
  std::string port_protocol;
  bool operator==(const FlowFeatures&) const = default;
};

// Dense vector form:
//   [start scalar | start mode one-hot | duration scalar | duration mode one-hot | label one-hot]
struct EncodedFeature {
  std::vector<double> values;
  bool operator==(const EncodedFeature&) const = default;
};

// Mode-specific normalization of start time and duration plus a one-hot
// port/protocol vocabulary (sorted, so indices are stable across runs).
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(GaussianMixture1D start_time, GaussianMixture1D duration,
                 std::vector<std::string> vocabulary);

  // Requires g.flow_count() >= modes.
  static FeatureEncoder fit(const DynamicMultigraph& g, std::size_t modes, std::uint64_t seed,
                            const EmOptions& options = {});

  const GaussianMixture1D& start_time() const { return start_time_; }
  const GaussianMixture1D& duration() const { return duration_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  // Throws EncodingError naming the label when it is not in the vocabulary.
  std::size_t category_index(const std::string& label) const;

  std::size_t width() const;
  std::size_t duration_offset() const { return 1 + start_time_.size(); }
  std::size_t category_offset() const { return duration_offset() + 1 + duration_.size(); }

  // The mode of each continuous value is drawn from its posterior
  // responsibilities; the scalar is (x - mean) / (4 stddev) clamped to [-1, 1].
  EncodedFeature encode(const FlowFeatures& f, Rng& rng) const;
  // Inverse map; negative durations and start times are clamped to 0.
  // Throws EncodingError on a malformed one-hot block or wrong width.
  FlowFeatures decode(const EncodedFeature& f) const;

  bool operator==(const FeatureEncoder&) const = default;

 private:
  GaussianMixture1D start_time_;
  GaussianMixture1D duration_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> index_;
};

void to_json(nlohmann::json& j, const FeatureEncoder& e);
void from_json(const nlohmann::json& j, FeatureEncoder& e);

// Category marginal plus a per-category 2-D mixture over raw
// (start_time, duration). Categories follow the encoder's vocabulary.
class FeatureSampler {
 public:
  FeatureSampler() = default;
  FeatureSampler(std::vector<std::string> vocabulary, std::vector<double> marginal,
                 std::vector<GaussianMixture2D> per_category);

  static FeatureSampler fit(const DynamicMultigraph& g, const FeatureEncoder& encoder,
                            std::size_t modes, std::uint64_t seed, const EmOptions& options = {});

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& marginal() const { return marginal_; }
  // Empty mixture for categories with zero marginal.
  const std::vector<GaussianMixture2D>& per_category() const { return per_category_; }

  FlowFeatures sample(Rng& rng) const;

  bool operator==(const FeatureSampler&) const = default;

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> marginal_;
  std::vector<double> cumulative_;
  std::vector<GaussianMixture2D> per_category_;
};

void to_json(nlohmann::json& j, const FeatureSampler& s);
void from_json(const nlohmann::json& j, FeatureSampler& s);

struct SampledFeatures {
  std::vector<FlowFeatures> rows;
  std::vector<EncodedFeature> encoded;
};

// Exactly `count` rows, deterministic in seed. Durations and start times are
// clamped to be non-negative.
SampledFeatures sample_features(const FeatureSampler& sampler, const FeatureEncoder& encoder,
                                std::size_t count, std::uint64_t seed);

}  // namespace netsynth
