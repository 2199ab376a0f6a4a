#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "netsynth/random.hpp"

namespace netsynth {

struct EmOptions {
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-6;
  double prune_weight = 1e-3;
  std::size_t init_subsample = 2000;  // k-means++ seeding subsample size
};

struct GaussianComponent {
  double weight = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  bool operator==(const GaussianComponent&) const = default;
};

// One-dimensional Gaussian mixture fit by EM.
class GaussianMixture1D {
 public:
  GaussianMixture1D() = default;
  explicit GaussianMixture1D(std::vector<GaussianComponent> components);

  // At most `modes` components, fewer when the data has fewer distinct
  // values; zero-variance data gives one component at the constant.
  static GaussianMixture1D fit(std::span<const double> data, std::size_t modes, Rng& rng,
                               const EmOptions& options = {});

  std::size_t size() const { return components_.size(); }
  const std::vector<GaussianComponent>& components() const { return components_; }
  // Posterior component probabilities for x (sums to 1).
  std::vector<double> responsibilities(double x) const;
  double log_density(double x) const;
  double sample(Rng& rng) const;

  bool operator==(const GaussianMixture1D&) const = default;

 private:
  std::vector<GaussianComponent> components_;
};

struct GaussianComponent2D {
  double weight = 0.0;
  std::array<double, 2> mean{};
  std::array<double, 3> cov{};  // xx, xy, yy
  bool operator==(const GaussianComponent2D&) const = default;
};

// Full-covariance two-dimensional Gaussian mixture fit by EM. A component
// with an all-zero covariance is a point mass.
class GaussianMixture2D {
 public:
  GaussianMixture2D() = default;
  explicit GaussianMixture2D(std::vector<GaussianComponent2D> components);

  static GaussianMixture2D fit(std::span<const std::array<double, 2>> data, std::size_t modes,
                               Rng& rng, const EmOptions& options = {});

  std::size_t size() const { return components_.size(); }
  const std::vector<GaussianComponent2D>& components() const { return components_; }
  std::array<double, 2> sample(Rng& rng) const;

  bool operator==(const GaussianMixture2D&) const = default;

 private:
  std::vector<GaussianComponent2D> components_;
};

void to_json(nlohmann::json& j, const GaussianComponent& c);
void from_json(const nlohmann::json& j, GaussianComponent& c);
void to_json(nlohmann::json& j, const GaussianMixture1D& m);
void from_json(const nlohmann::json& j, GaussianMixture1D& m);
void to_json(nlohmann::json& j, const GaussianComponent2D& c);
void from_json(const nlohmann::json& j, GaussianComponent2D& c);
void to_json(nlohmann::json& j, const GaussianMixture2D& m);
void from_json(const nlohmann::json& j, GaussianMixture2D& m);

}  // namespace netsynth
