#include "netsynth/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "netsynth/errors.hpp"

namespace netsynth {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Picks up to `take` distinct indices of [0, n) with a partial Fisher-Yates.
std::vector<std::size_t> subsample(std::size_t n, std::size_t take, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  take = std::min(take, n);
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// k-means++ seeding followed by a few Lloyd rounds. Returns the cluster label
// of every point; labels are dense in [0, clusters).
template <typename Point, typename Dist>
std::vector<std::size_t> kmeans_labels(const std::vector<Point>& pts, std::size_t k, Rng& rng,
                                       Dist dist2) {
  std::vector<Point> centers;
  centers.push_back(pts[rng.index(pts.size())]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    std::vector<double> cumulative(pts.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], dist2(pts[i], centers.back()));
      acc += d2[i];
      cumulative[i] = acc;
    }
    if (!(acc > 0.0)) break;
    centers.push_back(pts[rng.categorical(cumulative)]);
  }
  std::vector<std::size_t> label(pts.size(), 0);
  for (int round = 0; round < 10; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t best = 0;
      double best_d = dist2(pts[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = dist2(pts[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || label[i] != best;
      label[i] = best;
    }
    std::vector<Point> sums(centers.size(), Point{});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t d = 0; d < sums[label[i]].size(); ++d) sums[label[i]][d] += pts[i][d];
      ++counts[label[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < sums[c].size(); ++d) centers[c][d] = sums[c][d] / counts[c];
    }
    if (!changed && round > 0) break;
  }
  std::vector<std::size_t> remap(centers.size(), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (auto& l : label) {
    if (remap[l] == std::numeric_limits<std::size_t>::max()) remap[l] = next++;
    l = remap[l];
  }
  return label;
}

std::size_t distinct_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

GaussianMixture1D::GaussianMixture1D(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw PreconditionError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.stddev > 0.0) || !(c.weight >= 0.0)) {
      throw PreconditionError("mixture components need stddev > 0 and weight >= 0");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("mixture weights must sum to 1");
}

GaussianMixture1D GaussianMixture1D::fit(std::span<const double> data, std::size_t modes, Rng& rng,
                                         const EmOptions& options) {
  if (data.empty()) throw PreconditionError("cannot fit a mixture to no data");
  if (modes == 0) throw PreconditionError("mixture needs at least one mode");
  const std::size_t n = data.size();
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var /= n;
  const double scale = std::max(1.0, std::abs(mean));
  if (!(var > 1e-24 * scale * scale)) {
    return GaussianMixture1D({{1.0, mean, 1e-6 * scale}});
  }
  const double var_floor = std::max(1e-6 * var, 1e-18 * scale * scale);

  const std::vector<double> values(data.begin(), data.end());
  const std::size_t k = std::min(modes, distinct_count(values));

  // Seed from a subsample, then assign every point to the nearest seed mean.
  const auto picked = subsample(n, options.init_subsample, rng);
  std::vector<std::array<double, 1>> pts;
  pts.reserve(picked.size());
  for (std::size_t i : picked) pts.push_back({data[i]});
  const auto labels = kmeans_labels(pts, k, rng, [](const auto& a, const auto& b) {
    return (a[0] - b[0]) * (a[0] - b[0]);
  });
  const std::size_t clusters = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<GaussianComponent> comp(clusters);
  {
    std::vector<double> sum(clusters, 0.0), sum_sq(clusters, 0.0), cnt(clusters, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[labels[i]] += pts[i][0];
      cnt[labels[i]] += 1.0;
    }
    for (std::size_t c = 0; c < clusters; ++c) comp[c].mean = sum[c] / cnt[c];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = pts[i][0] - comp[labels[i]].mean;
      sum_sq[labels[i]] += d * d;
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      comp[c].weight = cnt[c] / static_cast<double>(pts.size());
      comp[c].stddev = std::sqrt(std::max(sum_sq[c] / cnt[c], var_floor));
    }
  }

  std::vector<double> resp(n * clusters);
  std::vector<double> logp(clusters);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < clusters; ++c) {
        const double z = (data[i] - comp[c].mean) / comp[c].stddev;
        logp[c] = std::log(std::max(comp[c].weight, 1e-300)) - std::log(comp[c].stddev) -
                  0.5 * kLogTwoPi - 0.5 * z * z;
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      for (std::size_t c = 0; c < clusters; ++c) resp[i * clusters + c] = std::exp(logp[c] - lse);
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      double r = 0.0, s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        r += resp[i * clusters + c];
        s += resp[i * clusters + c] * data[i];
      }
      if (r <= 0.0) {
        comp[c].weight = 0.0;
        continue;
      }
      const double m = s / r;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += resp[i * clusters + c] * (data[i] - m) * (data[i] - m);
      comp[c] = {r / n, m, std::sqrt(std::max(v / r, var_floor))};
    }
    if (std::abs(ll - prev_ll) <= options.relative_tolerance * std::abs(ll)) break;
    prev_ll = ll;
  }

  std::erase_if(comp, [&](const GaussianComponent& c) { return c.weight < options.prune_weight; });
  double total = 0.0;
  for (const auto& c : comp) total += c.weight;
  for (auto& c : comp) c.weight /= total;
  std::sort(comp.begin(), comp.end(),
            [](const GaussianComponent& a, const GaussianComponent& b) { return a.mean < b.mean; });
  return GaussianMixture1D(std::move(comp));
}

std::vector<double> GaussianMixture1D::responsibilities(double x) const {
  std::vector<double> logp(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& comp = components_[c];
    const double z = (x - comp.mean) / comp.stddev;
    logp[c] = comp.weight > 0.0
                  ? std::log(comp.weight) - std::log(comp.stddev) - 0.5 * z * z
                  : -std::numeric_limits<double>::infinity();
  }
  const double lse = log_sum_exp(logp);
  for (auto& v : logp) v = std::exp(v - lse);
  return logp;
}

double GaussianMixture1D::log_density(double x) const {
  std::vector<double> logp(components_.size());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& comp = components_[c];
    const double z = (x - comp.mean) / comp.stddev;
    logp[c] = std::log(comp.weight) - std::log(comp.stddev) - 0.5 * kLogTwoPi - 0.5 * z * z;
  }
  return log_sum_exp(logp);
}

double GaussianMixture1D::sample(Rng& rng) const {
  std::vector<double> cumulative(components_.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) cumulative[c] = acc += components_[c].weight;
  const auto& comp = components_[rng.categorical(cumulative)];
  return comp.mean + comp.stddev * rng.normal();
}

GaussianMixture2D::GaussianMixture2D(std::vector<GaussianComponent2D> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw PreconditionError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    const double det = c.cov[0] * c.cov[2] - c.cov[1] * c.cov[1];
    if (!(c.weight >= 0.0) || c.cov[0] < 0.0 || c.cov[2] < 0.0 || det < -1e-12 * (c.cov[0] * c.cov[2] + 1e-300)) {
      throw PreconditionError("2-D mixture component is not positive semidefinite");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("mixture weights must sum to 1");
}

GaussianMixture2D GaussianMixture2D::fit(std::span<const std::array<double, 2>> data,
                                         std::size_t modes, Rng& rng, const EmOptions& options) {
  if (data.empty()) throw PreconditionError("cannot fit a mixture to no data");
  if (modes == 0) throw PreconditionError("mixture needs at least one mode");
  const std::size_t n = data.size();
  std::array<double, 2> mean{0.0, 0.0};
  for (const auto& p : data) {
    mean[0] += p[0];
    mean[1] += p[1];
  }
  mean[0] /= n;
  mean[1] /= n;
  std::array<double, 2> var{0.0, 0.0};
  for (const auto& p : data) {
    var[0] += (p[0] - mean[0]) * (p[0] - mean[0]);
    var[1] += (p[1] - mean[1]) * (p[1] - mean[1]);
  }
  var[0] /= n;
  var[1] /= n;
  if (n == 1 || (var[0] == 0.0 && var[1] == 0.0)) {
    return GaussianMixture2D({{1.0, mean, {0.0, 0.0, 0.0}}});
  }
  std::array<double, 2> floor{};
  for (int d = 0; d < 2; ++d) {
    const double scale = std::max(1.0, std::abs(mean[d]));
    floor[d] = std::max(1e-6 * var[d], 1e-12 * scale * scale);
  }

  std::vector<std::array<double, 2>> values(data.begin(), data.end());
  std::size_t distinct = values.size();
  {
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  }
  const std::size_t k = std::min(modes, distinct);

  // Seeding distances use per-dimension standardized coordinates so that a
  // large-valued column does not dominate.
  const std::array<double, 2> sd{std::sqrt(std::max(var[0], floor[0])),
                                 std::sqrt(std::max(var[1], floor[1]))};
  const auto picked = subsample(n, options.init_subsample, rng);
  std::vector<std::array<double, 2>> pts;
  pts.reserve(picked.size());
  for (std::size_t i : picked) pts.push_back({data[i][0] / sd[0], data[i][1] / sd[1]});
  const auto labels = kmeans_labels(pts, k, rng, [](const auto& a, const auto& b) {
    return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
  });
  const std::size_t clusters = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<GaussianComponent2D> comp(clusters);
  std::vector<double> cnt(clusters, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = data[picked[i]];
    auto& c = comp[labels[i]];
    c.mean[0] += p[0];
    c.mean[1] += p[1];
    cnt[labels[i]] += 1.0;
  }
  for (std::size_t c = 0; c < clusters; ++c) {
    comp[c].mean[0] /= cnt[c];
    comp[c].mean[1] /= cnt[c];
    comp[c].weight = cnt[c] / static_cast<double>(pts.size());
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = data[picked[i]];
    auto& c = comp[labels[i]];
    const double dx = p[0] - c.mean[0], dy = p[1] - c.mean[1];
    c.cov[0] += dx * dx;
    c.cov[1] += dx * dy;
    c.cov[2] += dy * dy;
  }
  for (std::size_t c = 0; c < clusters; ++c) {
    for (auto& v : comp[c].cov) v /= cnt[c];
    comp[c].cov[0] += floor[0];
    comp[c].cov[2] += floor[1];
  }

  std::vector<double> resp(n * clusters);
  std::vector<double> logp(clusters);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < clusters; ++c) {
        const auto& g = comp[c];
        const double det = g.cov[0] * g.cov[2] - g.cov[1] * g.cov[1];
        const double dx = data[i][0] - g.mean[0], dy = data[i][1] - g.mean[1];
        const double q = (g.cov[2] * dx * dx - 2.0 * g.cov[1] * dx * dy + g.cov[0] * dy * dy) / det;
        logp[c] = std::log(std::max(g.weight, 1e-300)) - kLogTwoPi - 0.5 * std::log(det) - 0.5 * q;
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      for (std::size_t c = 0; c < clusters; ++c) resp[i * clusters + c] = std::exp(logp[c] - lse);
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      double r = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp[i * clusters + c];
        r += w;
        sx += w * data[i][0];
        sy += w * data[i][1];
      }
      if (r <= 0.0) {
        comp[c].weight = 0.0;
        continue;
      }
      const double mx = sx / r, my = sy / r;
      double xx = 0.0, xy = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp[i * clusters + c];
        const double dx = data[i][0] - mx, dy = data[i][1] - my;
        xx += w * dx * dx;
        xy += w * dx * dy;
        yy += w * dy * dy;
      }
      comp[c] = {r / n, {mx, my}, {xx / r + floor[0], xy / r, yy / r + floor[1]}};
    }
    if (std::abs(ll - prev_ll) <= options.relative_tolerance * std::abs(ll)) break;
    prev_ll = ll;
  }

  std::erase_if(comp, [&](const GaussianComponent2D& c) { return c.weight < options.prune_weight; });
  double total = 0.0;
  for (const auto& c : comp) total += c.weight;
  for (auto& c : comp) c.weight /= total;
  return GaussianMixture2D(std::move(comp));
}

std::array<double, 2> GaussianMixture2D::sample(Rng& rng) const {
  std::vector<double> cumulative(components_.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) cumulative[c] = acc += components_[c].weight;
  const auto& g = components_[rng.categorical(cumulative)];
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  const double l11 = std::sqrt(g.cov[0]);
  const double l21 = l11 > 0.0 ? g.cov[1] / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, g.cov[2] - l21 * l21));
  return {g.mean[0] + l11 * z0, g.mean[1] + l21 * z0 + l22 * z1};
}

void to_json(nlohmann::json& j, const GaussianComponent& c) {
  j = nlohmann::json{{"weight", c.weight}, {"mean", c.mean}, {"stddev", c.stddev}};
}

void from_json(const nlohmann::json& j, GaussianComponent& c) {
  c.weight = j.at("weight").get<double>();
  c.mean = j.at("mean").get<double>();
  c.stddev = j.at("stddev").get<double>();
}

void to_json(nlohmann::json& j, const GaussianMixture1D& m) { j = m.components(); }

void from_json(const nlohmann::json& j, GaussianMixture1D& m) {
  m = GaussianMixture1D(j.get<std::vector<GaussianComponent>>());
}

void to_json(nlohmann::json& j, const GaussianComponent2D& c) {
  j = nlohmann::json{{"weight", c.weight}, {"mean", c.mean}, {"cov", c.cov}};
}

void from_json(const nlohmann::json& j, GaussianComponent2D& c) {
  c.weight = j.at("weight").get<double>();
  c.mean = j.at("mean").get<std::array<double, 2>>();
  c.cov = j.at("cov").get<std::array<double, 3>>();
}

void to_json(nlohmann::json& j, const GaussianMixture2D& m) { j = m.components(); }

void from_json(const nlohmann::json& j, GaussianMixture2D& m) {
  m = GaussianMixture2D(j.get<std::vector<GaussianComponent2D>>());
}

}  // namespace netsynth
