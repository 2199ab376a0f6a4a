#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "netsynth/core_model.hpp"

namespace netsynth {

// Sum over day blocks of the entrywise L1 distance between daily count
// matrices; the shorter tensor is padded with zero days. Throws DataError on
// differing node counts.
double edit_distance_sum(const DailyTensor& g, const DailyTensor& h);
double edit_distance_sum(const DynamicMultigraph& g, const DynamicMultigraph& h,
                         double day_length = kDefaultDayLength);

struct Ensemble {
  std::vector<DynamicMultigraph> members;
  double day_length = kDefaultDayLength;
};

// Accuracy / diversity / radius of an ensemble around the reference. Fields
// that are undefined (|S| < 2, or R = 0 for the ratios) are empty.
struct EnsembleReport {
  std::optional<double> accuracy;     // A = L(ref, mean of S)
  std::optional<double> diversity;    // D = sample std of L(G, ref)
  std::optional<double> radius;       // R = sqrt(sum L^2 / (|S| - 1))
  std::optional<double> bias;         // A / R
  std::optional<double> variability;  // D / R
  std::optional<double> error;        // bias^2 + variability
  std::vector<double> member_distances;
};

EnsembleReport evaluate_ensemble(const DynamicMultigraph& ref, const Ensemble& ensemble);

// Report schema: exactly {A, D, R, bias, variability, E, members}; undefined
// values serialize as null.
nlohmann::json to_json(const EnsembleReport& r);

struct StructuralReport {
  double degree_similarity = 0.0;
  double avg_path_length = 0.0;
  double effective_diameter = 0.0;
  double distinct_edges = 0.0;
  double density = 0.0;
  double clustering = 0.0;
};

nlohmann::json to_json(const StructuralReport& r);

// Degree similarity is the cosine of the two descending degree sequences
// (zero padded). Path measures use the undirected view and reachable pairs;
// effective diameter is their 90th percentile with linear interpolation.
// Density is E / N^2.
StructuralReport structural_report(const StaticGraph& g, const StaticGraph& ref);

// Linear-interpolation percentile of sorted data (q in [0, 1]).
double percentile_sorted(const std::vector<double>& sorted, double q);

// Right-continuous step CDF as sorted (value, cumulative fraction) pairs.
struct EmpiricalCdf {
  std::vector<std::pair<double, double>> points;
  double at(double x) const;
};

EmpiricalCdf empirical_cdf(std::vector<double> values);
// Sup-norm distance between two step CDFs.
double ks_distance(const EmpiricalCdf& a, const EmpiricalCdf& b);

struct FeatureCdfs {
  EmpiricalCdf start_time;
  EmpiricalCdf duration;
  EmpiricalCdf port_protocol;  // over category_order indices
  std::vector<std::string> category_order;
};

// Labels ordered by descending frequency in g, ties alphabetical.
std::vector<std::string> category_frequency_order(const DynamicMultigraph& g);

// When category_order is empty the graph's own frequency order is used.
// Labels missing from the order are appended alphabetically.
FeatureCdfs feature_cdfs(const DynamicMultigraph& g, std::vector<std::string> category_order = {});

}  // namespace netsynth
