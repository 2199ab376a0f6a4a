// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fixtures.hpp"
#include "netsynth/alignment.hpp"
#include "netsynth/baselines.hpp"
#include "netsynth/centrality.hpp"
#include "netsynth/metrics.hpp"
#include "netsynth/pipeline.hpp"
#include "oracles.hpp"

using namespace netsynth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, const std::string& text) {
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += text;
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Chi-square goodness of fit with adjacent cells pooled until each pooled
// expected count is at least 5.
double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0, obs = 0.0, exp = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs += observed[i];
    exp += expected[i];
    if (exp >= 5.0) {
      stat += (obs - exp) * (obs - exp) / exp;
      ++cells;
      obs = exp = 0.0;
    }
  }
  if (exp > 0.0) {
    if (cells == 0) return 1.0;
    stat += (obs - exp) * (obs - exp) / exp;  // leftover tail joins as its own cell
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

Outcome sampler_fidelity() {
  Outcome o;
  const InitiatorMatrix a(2, {0.9, 0.5, 0.5, 0.1});
  const std::size_t draws = 200000;
  for (unsigned k = 1; k <= 4; ++k) {
    const auto p = kron_power(a, k);
    const double total = std::accumulate(p.values.begin(), p.values.end(), 0.0);
    // Order cells by expected mass so pooling merges the rare ones.
    std::vector<std::size_t> order(p.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p.values[x] < p.values[y]; });
    for (std::uint64_t seed : {1, 2, 3}) {
      const KroneckerDrawer drawer(a, k);
      Rng rng(seed);
      std::vector<double> counts(p.values.size(), 0.0);
      for (std::size_t i = 0; i < draws; ++i) {
        const auto pos = drawer.draw(rng);
        counts[pos.row * p.side + pos.col] += 1.0;
      }
      std::vector<double> observed, expected;
      for (std::size_t c : order) {
        observed.push_back(counts[c]);
        expected.push_back(static_cast<double>(draws) * p.values[c] / total);
      }
      const double pv = chi_square_p(observed, expected);
      if (!(pv > 0.01)) {
        o.pass = false;
        note(o, "k=" + std::to_string(k) + " seed=" + std::to_string(seed) + " p=" + fmt(pv));
      }
    }
  }
  if (o.pass) note(o, "k=1..4 x 3 seeds, 2e5 draws each, all p > 0.01");
  return o;
}

double initiator_error(const InitiatorMatrix& fit, const InitiatorMatrix& truth) {
  const std::size_t n = truth.n1();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) err += std::abs(fit.at(perm[i], perm[j]) - truth.at(i, j));
    best = std::min(best, err / static_cast<double>(n * n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const InitiatorMatrix& planted_initiator() {
  static const InitiatorMatrix a(2, {0.9, 0.6, 0.6, 0.2});
  return a;
}

// Expected edge count of the planted model at N = 256 (k = 8): (sum A)^k.
std::size_t planted_edges() { return static_cast<std::size_t>(std::llround(std::pow(planted_initiator().sum(), 8))); }

Outcome kronfit_recovery() {
  Outcome o;
  int recovered = 0;
  bool trend = true;
  std::string errors;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = sample_graph(planted_initiator(), {256, planted_edges(), 0, seed});
    KronFitParams params;
    params.seed = seed;
    KronFitTrace trace;
    const auto fit = kronfit(g, params, &trace);
    const double err = initiator_error(fit, planted_initiator());
    recovered += err <= 0.1;
    errors += (errors.empty() ? "" : ",") + fmt(err, 3);
    const std::size_t tenth = std::max<std::size_t>(1, trace.log_likelihood.size() / 10);
    const std::vector<double> first(trace.log_likelihood.begin(), trace.log_likelihood.begin() + tenth);
    const std::vector<double> last(trace.log_likelihood.end() - tenth, trace.log_likelihood.end());
    if (median(last) < median(first)) {
      trend = false;
      note(o, "seed " + std::to_string(seed) + " log-likelihood trend decreasing");
    }
  }
  o.pass = recovered >= 4 && trend;
  note(o, "recovered " + std::to_string(recovered) + "/5, MAE [" + errors + "], E=" + std::to_string(planted_edges()));
  return o;
}

Outcome bic_selection() {
  Outcome o;
  int picks = 0;
  std::string bics;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = sample_graph(planted_initiator(), {256, planted_edges(), 0, 100 + seed});
    KronFitParams params;
    params.seed = seed;
    const std::vector<std::size_t> candidates{2, 3};
    const auto best = select_n1(g, candidates, params);
    picks += best.n1() == 2;
    bics += (bics.empty() ? "" : ",") + std::to_string(best.n1());
  }
  o.pass = picks >= 3;
  note(o, "n1=2 chosen in " + std::to_string(picks) + "/5 trials [" + bics + "]");
  return o;
}

Outcome target_exactness() {
  Outcome o;
  Rng rng(2024);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    const std::size_t n = 2 + rng.index(9);
    const std::size_t m = 3 + rng.index(48);
    std::vector<NetflowRecord> flows;
    for (std::size_t i = 0; i < m; ++i) {
      flows.push_back({static_cast<NodeId>(rng.index(n)), static_cast<NodeId>(rng.index(n)), rng.uniform(0.0, 2e5),
                       rng.uniform(0.0, 100.0), static_cast<CategoryId>(rng.index(3))});
    }
    const DynamicMultigraph ref(n, std::move(flows), {"a", "b", "c"});
    const auto enc = FeatureEncoder::fit(ref, std::min<std::size_t>(3, m), fixture);
    const auto t = build_targets(ref, enc, 1.0, fixture);
    // Naive: for every edge and flow, average the cosine against every flow on the edge.
    for (const auto& pair : t.pairs) {
      const Edge e = t.edges[pair.edge];
      std::vector<std::vector<double>> group;
      for (std::size_t k = 0; k < ref.flow_count(); ++k) {
        const auto& f = ref.flows()[k];
        if (f.src == e.src && f.dst == e.dst) group.push_back(t.features[k].values);
      }
      worst = std::max(worst, std::abs(pair.target - oracle::mean_cosine(t.features[pair.feature].values, group)));
      ++checked;
    }
  }
  o.pass = worst <= 1e-12 && checked > 0;
  note(o, std::to_string(checked) + " pairs over 20 fixtures, max |diff| = " + fmt(worst, 3));
  return o;
}

Outcome boosted_scorer() {
  Outcome o;
  bool monotone = true;
  Rng rng(5);
  for (int fixture = 0; fixture < 10; ++fixture) {
    const std::size_t rows = 50 + rng.index(300), cols = 1 + rng.index(6);
    FeatureMatrix x(rows, cols);
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) x.data[i * cols + j] = std::round(rng.uniform(-5.0, 5.0) * 4.0) / 4.0;
      y[i] = std::sin(x.at(i, 0)) + (cols > 1 ? x.at(i, 1) * x.at(i, 0) : 0.0) + rng.normal();
    }
    BoostingParams p;
    p.trees = 100;
    p.max_depth = 1 + rng.index(5);
    p.learning_rate = rng.uniform(0.05, 1.0);
    std::vector<double> trace;
    train_boosted(x, y, p, &trace);
    for (std::size_t t = 1; t < trace.size(); ++t) {
      if (trace[t] > trace[t - 1]) monotone = false;
    }
  }
  // Alignment training on the planted reference.
  {
    const auto ref = testing::planted_reference(1, 300, 32, 80);
    const auto enc = FeatureEncoder::fit(ref, 5, 1);
    const auto targets = build_targets(ref, enc, 0.2, 1);
    std::vector<double> trace;
    BoostingParams p;
    p.trees = 50;
    train_scorer(targets, structural_features(to_static(ref)), p, &trace);
    for (std::size_t t = 1; t < trace.size(); ++t) {
      if (trace[t] > trace[t - 1]) monotone = false;
    }
  }
  // Separable step: y = 1 when x0 > 0.3 and x1 <= 0.6, else 0.
  FeatureMatrix x(500, 2);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < 500; ++i) {
    x.data[2 * i] = rng.uniform();
    x.data[2 * i + 1] = rng.uniform();
    y[i] = (x.at(i, 0) > 0.3 && x.at(i, 1) <= 0.6) ? 1.0 : 0.0;
  }
  std::vector<double> trace;
  train_boosted(x, y, BoostingParams{}, &trace);
  o.pass = monotone && trace.back() <= 1e-3;
  note(o, std::string("mse non-increasing on 11 fixtures: ") + (monotone ? "yes" : "no") +
              ", step fixture final mse = " + fmt(trace.back(), 3));
  return o;
}

DynamicMultigraph random_member(Rng& rng, std::size_t n, std::size_t days) {
  std::vector<NetflowRecord> flows;
  const std::size_t m = rng.index(25);
  for (std::size_t i = 0; i < m; ++i) {
    flows.push_back({static_cast<NodeId>(rng.index(n)), static_cast<NodeId>(rng.index(n)),
                     rng.uniform(0.0, static_cast<double>(days) * 100.0 - 1.0), rng.uniform(0.0, 80.0), 0});
  }
  DynamicMultigraph g(n, std::move(flows), {"x"});
  // Keep T <= days by dropping flows that end past the horizon.
  std::vector<NetflowRecord> kept;
  for (const auto& f : g.flows()) {
    if (f.end_time() < static_cast<double>(days) * 100.0) kept.push_back(f);
  }
  return DynamicMultigraph(n, std::move(kept), {"x"});
}

Outcome metric_identities() {
  Outcome o;
  Rng rng(6);
  double worst_identity = 0.0;
  bool pseudometric = true, exact_e = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(6), days = 1 + rng.index(5), size = 2 + rng.index(9);
    const auto ref = random_member(rng, n, days);
    Ensemble s;
    s.day_length = 100.0;
    for (std::size_t i = 0; i < size; ++i) s.members.push_back(random_member(rng, n, days));
    const auto r = evaluate_ensemble(ref, s);

    const auto& g = s.members[0];
    const auto& h = s.members[1];
    const double gh = edit_distance_sum(g, h, 100.0), hg = edit_distance_sum(h, g, 100.0);
    const double gr = edit_distance_sum(g, ref, 100.0), rh = edit_distance_sum(ref, h, 100.0);
    if (edit_distance_sum(g, g, 100.0) != 0.0 || gh != hg || gh < 0.0 || gh > gr + rh + 1e-9) pseudometric = false;

    if (r.radius && *r.radius > 0.0) {
      if (*r.error != (*r.bias) * (*r.bias) + *r.variability) exact_e = false;
    }
    const double k = static_cast<double>(size);
    const double mean = std::accumulate(r.member_distances.begin(), r.member_distances.end(), 0.0) / k;
    const double lhs = (k - 1.0) * (*r.radius) * (*r.radius);
    const double rhs = (k - 1.0) * (*r.diversity) * (*r.diversity) + k * mean * mean;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / scale);
  }
  Rng crng(7);
  const auto ref = random_member(crng, 4, 3);
  const auto collapse = evaluate_ensemble(ref, Ensemble{{ref, ref}, 100.0});
  const bool collapsed = *collapse.accuracy == 0.0 && *collapse.diversity == 0.0 && *collapse.radius == 0.0;
  o.pass = pseudometric && exact_e && worst_identity <= 1e-9 && collapsed;
  note(o, std::string("pseudometric ") + (pseudometric ? "ok" : "violated") + ", E exact " + (exact_e ? "ok" : "violated") +
              ", radius identity max rel err " + fmt(worst_identity, 3) + ", collapse A=D=R=0 " +
              (collapsed ? "ok" : "violated"));
  return o;
}

// CDF of the planted start-time or duration marginal.
double planted_cdf(double x, bool start) {
  double f = 0.0;
  const auto& labels = testing::planted_label_weights();
  for (std::size_t c = 0; c < labels.size(); ++c)
    for (const auto& comp : testing::planted_mixtures()[c]) {
      const double mu = start ? comp.start_mean : comp.duration_mean;
      const double sd = start ? comp.start_sd : comp.duration_sd;
      f += labels[c] * comp.weight * 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
    }
  return f;
}

double ks_against(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

Outcome feature_round_trip(std::size_t negative_durations_elsewhere) {
  Outcome o;
  double worst = 0.0;
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const double mean = rng.uniform(-1e4, 1e6), sd = rng.uniform(0.01, 1e4);
    const GaussianMixture1D one({{1.0, mean, sd}});
    const FeatureEncoder enc(one, one, {"x"});
    for (int i = 0; i < 200; ++i) {
      const double v = std::max(0.0, mean + sd * rng.uniform(-3.9, 3.9));
      const auto back = enc.decode(enc.encode({v, v, "x"}, rng));
      worst = std::max({worst, std::abs(back.start_time - v), std::abs(back.duration - v)});
    }
  }

  const auto ref = testing::planted_reference(9, 10000, 128, 600);
  const auto enc = FeatureEncoder::fit(ref, 10, 9);
  const auto sampler = FeatureSampler::fit(ref, enc, 10, 9);
  const auto out = sample_features(sampler, enc, 10000, 10);
  std::vector<double> starts, durations, labels;
  std::size_t negative = negative_durations_elsewhere;
  for (const auto& r : out.rows) {
    starts.push_back(r.start_time);
    durations.push_back(r.duration);
    labels.push_back(static_cast<double>(enc.category_index(r.port_protocol)));
    negative += r.duration < 0.0;
  }
  const double ks_start = ks_against(starts, [](double x) { return planted_cdf(x, true); });
  const double ks_duration = ks_against(durations, [](double x) { return planted_cdf(x, false); });
  // Labels are discrete: compare the two step CDFs at every label index. The
  // sorted vocabulary order matches the planted label order.
  const auto& w = testing::planted_label_weights();
  const auto label_cdf = empirical_cdf(labels);
  double ks_label = 0.0, planted = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    planted += w[c];
    ks_label = std::max(ks_label, std::abs(label_cdf.at(static_cast<double>(c)) - planted));
  }
  o.pass = worst <= 1e-6 && ks_start <= 0.05 && ks_duration <= 0.05 && ks_label <= 0.05 && negative == 0;
  note(o, "round-trip max err " + fmt(worst, 3) + ", KS start " + fmt(ks_start, 3) + ", duration " +
              fmt(ks_duration, 3) + ", label " + fmt(ks_label, 3) + ", negative durations " + std::to_string(negative));
  return o;
}

std::size_t negative_durations(const Ensemble& e) {
  std::size_t n = 0;
  for (const auto& g : e.members)
    for (const auto& f : g.flows()) n += f.duration < 0.0;
  return n;
}

Outcome end_to_end(std::size_t& negatives) {
  Outcome o;
  int wins = 0;
  std::string pairs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ref = testing::planted_reference(seed);
    PipelineConfig config;
    config.seed = seed;
    config.ensemble_size = 10;
    const auto model = fit_model(ref, config);
    const auto targets = member_targets(model, config);
    Ensemble pipeline, random;
    for (std::size_t i = 0; i < config.ensemble_size; ++i) {
      pipeline.members.push_back(generate_member(model, targets, config, config.seed + i));
      random.members.push_back(generate_baseline(
          {BaselineKind::random, targets.nodes, targets.edges, targets.flows, config.seed + i}, ref));
    }
    negatives += negative_durations(pipeline) + negative_durations(random);
    const auto a = evaluate_ensemble(ref, pipeline);
    const auto b = evaluate_ensemble(ref, random);
    const bool win = a.error && b.error && *a.error < *b.error;
    wins += win;
    pairs += (pairs.empty() ? "" : ", ") + fmt(a.error.value_or(NAN)) + " vs " + fmt(b.error.value_or(NAN));
  }
  o.pass = wins >= 4;
  note(o, "pipeline E < random E in " + std::to_string(wins) + "/5 seeds [" + pairs + "]");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("netsynth_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  write_csv(testing::planted_reference(4, 400, 64, 120), root / "ref.csv");
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    PipelineConfig c;
    c.input = root / "ref.csv";
    c.model_dir = root / ("model" + std::to_string(run));
    c.output_dir = root / ("ens" + std::to_string(run));
    c.ensemble_size = 4;
    c.workers = 2;
    c.seed = 99;
    c.alignment.trees = 50;
    cmd_fit(c);
    std::vector<std::string> contents;
    for (const auto& p : cmd_generate(c)) contents.push_back(slurp(p));
    runs.push_back(std::move(contents));
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  o.pass = runs[0] == runs[1] && runs[0].size() == 4 && !runs[0][0].empty();
  note(o, std::to_string(runs[0].size()) + " member CSVs " + (o.pass ? "byte-identical" : "differ") + " across two runs");
  return o;
}

Outcome structural_measures() {
  Outcome o;
  const StaticGraph triangle(3, {{0, 1}, {1, 2}, {2, 0}});
  const StaticGraph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const StaticGraph path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const auto tri = structural_report(triangle, triangle);
  const double center = betweenness(undirected_neighbors(star)).node[0];
  const auto self = structural_report(star, star);
  const double diameter = structural_report(path, path).effective_diameter;
  const double expected = oracle::percentile(oracle::pair_distances(path), 0.9);
  o.pass = tri.clustering == 1.0 && center == 6.0 && std::abs(self.degree_similarity - 1.0) <= 1e-12 &&
           std::abs(diameter - expected) <= 1e-12;
  note(o, "triangle clustering " + fmt(tri.clustering) + ", K1,4 center betweenness " + fmt(center) +
              ", degree_similarity(g,g) " + fmt(self.degree_similarity, 15) + ", path diameter " + fmt(diameter) +
              " vs oracle " + fmt(expected));
  return o;
}

}  // namespace

int main() {
  std::size_t negatives = 0;
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Kronecker sampler fidelity", 10.0, sampler_fidelity},
      {2, "KronFit planted recovery", 120.0, kronfit_recovery},
      {3, "BIC selection", 0.0, bic_selection},
      {4, "alignment-target exactness", 5.0, target_exactness},
      {5, "boosted scorer", 0.0, boosted_scorer},
      {6, "metric identities", 0.0, metric_identities},
      {8, "end-to-end self-consistency", 300.0, [&] { return end_to_end(negatives); }},
      {7, "feature round-trip and marginals", 0.0, [&] { return feature_round_trip(negatives); }},
      {9, "determinism", 0.0, determinism},
      {10, "structural measures", 0.0, structural_measures},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      note(o, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      o.pass = false;
      note(o, "runtime " + fmt(seconds, 3) + " s exceeds " + fmt(c.limit_seconds, 3) + " s");
    }
    failures += !o.pass;
    const std::string line = std::string(o.pass ? "[PASS] " : "[FAIL] ") + std::to_string(c.id) + ". " + c.name +
                             " (" + fmt(seconds, 3) + " s): " + o.detail;
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    lines.emplace_back(c.id, line);
  }
  std::sort(lines.begin(), lines.end());
  std::printf("\nSummary (%d of %zu passed):\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  for (const auto& [_, line] : lines) std::printf("%s\n", line.substr(0, line.find(" (")).c_str());
  return failures == 0 ? 0 : 1;
}
