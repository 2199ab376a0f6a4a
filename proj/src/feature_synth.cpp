#include "netsynth/feature_synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "netsynth/errors.hpp"

namespace netsynth {

namespace {

constexpr double kNormalizationWidth = 4.0;

std::size_t one_hot_index(const std::vector<double>& v, std::size_t offset, std::size_t width,
                          const char* block) {
  std::size_t active = width;
  for (std::size_t i = 0; i < width; ++i) {
    const double x = v[offset + i];
    if (x == 1.0) {
      if (active != width) throw EncodingError(std::string("multiple entries set in ") + block + " one-hot block");
      active = i;
    } else if (x != 0.0) {
      throw EncodingError(std::string("non-binary entry in ") + block + " one-hot block");
    }
  }
  if (active == width) throw EncodingError(std::string("no entry set in ") + block + " one-hot block");
  return active;
}

void encode_continuous(const GaussianMixture1D& mix, double x, Rng& rng, std::vector<double>& out,
                       std::size_t offset) {
  const auto resp = mix.responsibilities(x);
  std::vector<double> cumulative(resp.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < resp.size(); ++c) cumulative[c] = acc += resp[c];
  const std::size_t mode = resp.size() == 1 ? 0 : rng.categorical(cumulative);
  const auto& comp = mix.components()[mode];
  out[offset] = std::clamp((x - comp.mean) / (kNormalizationWidth * comp.stddev), -1.0, 1.0);
  out[offset + 1 + mode] = 1.0;
}

double decode_continuous(const GaussianMixture1D& mix, const std::vector<double>& v,
                         std::size_t offset, const char* block) {
  const std::size_t mode = one_hot_index(v, offset + 1, mix.size(), block);
  const auto& comp = mix.components()[mode];
  return v[offset] * kNormalizationWidth * comp.stddev + comp.mean;
}

}  // namespace

FeatureEncoder::FeatureEncoder(GaussianMixture1D start_time, GaussianMixture1D duration,
                               std::vector<std::string> vocabulary)
    : start_time_(std::move(start_time)), duration_(std::move(duration)), vocabulary_(std::move(vocabulary)) {
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], i).second) {
      throw PreconditionError("duplicate vocabulary entry '" + vocabulary_[i] + "'");
    }
  }
}

FeatureEncoder FeatureEncoder::fit(const DynamicMultigraph& g, std::size_t modes, std::uint64_t seed,
                                   const EmOptions& options) {
  if (modes == 0) throw PreconditionError("feature encoder needs at least one mode");
  if (g.flow_count() < modes) {
    throw PreconditionError("feature encoder needs at least as many flows as modes");
  }
  std::vector<double> starts, durations;
  starts.reserve(g.flow_count());
  durations.reserve(g.flow_count());
  std::set<std::string> labels;
  for (const auto& f : g.flows()) {
    starts.push_back(f.start_time);
    durations.push_back(f.duration);
    labels.insert(g.label(f));
  }
  Rng rng(seed);
  auto start_mix = GaussianMixture1D::fit(starts, modes, rng, options);
  auto duration_mix = GaussianMixture1D::fit(durations, modes, rng, options);
  return FeatureEncoder(std::move(start_mix), std::move(duration_mix),
                        std::vector<std::string>(labels.begin(), labels.end()));
}

std::size_t FeatureEncoder::category_index(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) throw EncodingError("unknown port/protocol '" + label + "'");
  return it->second;
}

std::size_t FeatureEncoder::width() const { return category_offset() + vocabulary_.size(); }

EncodedFeature FeatureEncoder::encode(const FlowFeatures& f, Rng& rng) const {
  const std::size_t cat = category_index(f.port_protocol);
  EncodedFeature out;
  out.values.assign(width(), 0.0);
  encode_continuous(start_time_, f.start_time, rng, out.values, 0);
  encode_continuous(duration_, f.duration, rng, out.values, duration_offset());
  out.values[category_offset() + cat] = 1.0;
  return out;
}

FlowFeatures FeatureEncoder::decode(const EncodedFeature& f) const {
  if (f.values.size() != width()) {
    throw EncodingError("encoded feature has width " + std::to_string(f.values.size()) +
                        ", expected " + std::to_string(width()));
  }
  FlowFeatures out;
  out.start_time = std::max(0.0, decode_continuous(start_time_, f.values, 0, "start-time mode"));
  out.duration =
      std::max(0.0, decode_continuous(duration_, f.values, duration_offset(), "duration mode"));
  out.port_protocol =
      vocabulary_[one_hot_index(f.values, category_offset(), vocabulary_.size(), "port/protocol")];
  return out;
}

void to_json(nlohmann::json& j, const FeatureEncoder& e) {
  j = nlohmann::json{{"start_time", e.start_time()},
                     {"duration", e.duration()},
                     {"vocabulary", e.vocabulary()}};
}

void from_json(const nlohmann::json& j, FeatureEncoder& e) {
  e = FeatureEncoder(j.at("start_time").get<GaussianMixture1D>(),
                     j.at("duration").get<GaussianMixture1D>(),
                     j.at("vocabulary").get<std::vector<std::string>>());
}

FeatureSampler::FeatureSampler(std::vector<std::string> vocabulary, std::vector<double> marginal,
                               std::vector<GaussianMixture2D> per_category)
    : vocabulary_(std::move(vocabulary)), marginal_(std::move(marginal)), per_category_(std::move(per_category)) {
  if (marginal_.size() != vocabulary_.size() || per_category_.size() != vocabulary_.size()) {
    throw PreconditionError("sampler tables must match the vocabulary size");
  }
  double acc = 0.0;
  cumulative_.resize(marginal_.size());
  for (std::size_t c = 0; c < marginal_.size(); ++c) {
    if (!(marginal_[c] >= 0.0)) throw PreconditionError("negative category probability");
    if (marginal_[c] > 0.0 && per_category_[c].size() == 0) {
      throw PreconditionError("category with positive probability has no mixture");
    }
    cumulative_[c] = acc += marginal_[c];
  }
  if (std::abs(acc - 1.0) > 1e-9) throw PreconditionError("category marginal must sum to 1");
}

FeatureSampler FeatureSampler::fit(const DynamicMultigraph& g, const FeatureEncoder& encoder,
                                   std::size_t modes, std::uint64_t seed, const EmOptions& options) {
  if (g.flow_count() == 0) throw PreconditionError("feature sampler needs at least one flow");
  const auto& vocab = encoder.vocabulary();
  std::vector<std::vector<std::array<double, 2>>> rows(vocab.size());
  for (const auto& f : g.flows()) {
    rows[encoder.category_index(g.label(f))].push_back({f.start_time, f.duration});
  }
  Rng rng(seed);
  std::vector<double> marginal(vocab.size());
  std::vector<GaussianMixture2D> mixtures(vocab.size());
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    marginal[c] = static_cast<double>(rows[c].size()) / static_cast<double>(g.flow_count());
    if (!rows[c].empty()) mixtures[c] = GaussianMixture2D::fit(rows[c], modes, rng, options);
  }
  return FeatureSampler(vocab, std::move(marginal), std::move(mixtures));
}

FlowFeatures FeatureSampler::sample(Rng& rng) const {
  const std::size_t c = rng.categorical(cumulative_);
  const auto xy = per_category_[c].sample(rng);
  return {std::max(0.0, xy[0]), std::max(0.0, xy[1]), vocabulary_[c]};
}

void to_json(nlohmann::json& j, const FeatureSampler& s) {
  j = nlohmann::json{{"vocabulary", s.vocabulary()},
                     {"marginal", s.marginal()},
                     {"mixtures", s.per_category()}};
}

void from_json(const nlohmann::json& j, FeatureSampler& s) {
  std::vector<GaussianMixture2D> mixtures;
  for (const auto& m : j.at("mixtures")) {
    mixtures.push_back(m.empty() ? GaussianMixture2D() : m.get<GaussianMixture2D>());
  }
  s = FeatureSampler(j.at("vocabulary").get<std::vector<std::string>>(),
                     j.at("marginal").get<std::vector<double>>(), std::move(mixtures));
}

SampledFeatures sample_features(const FeatureSampler& sampler, const FeatureEncoder& encoder,
                                std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  SampledFeatures out;
  out.rows.reserve(count);
  out.encoded.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.rows.push_back(sampler.sample(rng));
    out.encoded.push_back(encoder.encode(out.rows.back(), rng));
  }
  return out;
}

}  // namespace netsynth
