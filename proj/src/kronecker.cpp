#include "netsynth/kronecker.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "netsynth/errors.hpp"

namespace netsynth {

InitiatorMatrix::InitiatorMatrix(std::size_t n1, std::vector<double> entries)
    : n1_(n1), entries_(std::move(entries)) {
  if (n1_ < 2) throw PreconditionError("initiator side n1 must be >= 2");
  if (entries_.size() != n1_ * n1_) throw PreconditionError("initiator needs n1^2 entries");
  for (double v : entries_) {
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("initiator entries must lie in [0, 1]");
  }
}

double InitiatorMatrix::sum() const { return std::accumulate(entries_.begin(), entries_.end(), 0.0); }

void to_json(nlohmann::json& j, const InitiatorMatrix& m) {
  j = nlohmann::json{{"n1", m.n1()},
                     {"entries", m.entries()},
                     {"log_likelihood", m.log_likelihood},
                     {"bic", m.bic},
                     {"seed", m.seed},
                     {"node_positions", m.node_positions}};
}

void from_json(const nlohmann::json& j, InitiatorMatrix& m) {
  m = InitiatorMatrix(j.at("n1").get<std::size_t>(), j.at("entries").get<std::vector<double>>());
  m.log_likelihood = j.at("log_likelihood").get<double>();
  m.bic = j.at("bic").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.node_positions = j.value("node_positions", std::vector<std::uint64_t>{});
}

namespace {

// n1^k, or nullopt when it does not fit in 62 bits.
std::optional<std::uint64_t> checked_power(std::size_t n1, unsigned k) {
  std::uint64_t side = 1;
  for (unsigned t = 0; t < k; ++t) {
    if (side > (std::uint64_t{1} << 62) / n1) return std::nullopt;
    side *= n1;
  }
  return side;
}

}  // namespace

unsigned kron_levels(std::size_t n1, std::size_t nodes) {
  if (n1 < 2) throw PreconditionError("initiator side n1 must be >= 2");
  unsigned k = 1;
  std::uint64_t side = n1;
  while (side < nodes) {
    side *= n1;
    ++k;
  }
  return k;
}

ProbabilityMatrix kron_power(const InitiatorMatrix& a, unsigned k) {
  if (k == 0) throw PreconditionError("Kronecker power k must be >= 1");
  const auto side = checked_power(a.n1(), k);
  if (!side || *side > (std::uint64_t{1} << 13)) {
    throw PreconditionError("Kronecker power too large for a dense matrix");
  }
  ProbabilityMatrix out;
  out.side = a.n1();
  out.values = a.entries();
  for (unsigned level = 1; level < k; ++level) {
    const std::size_t next_side = out.side * a.n1();
    std::vector<double> next(next_side * next_side);
    for (std::size_t i = 0; i < out.side; ++i) {
      for (std::size_t j = 0; j < out.side; ++j) {
        const double p = out.at(i, j);
        for (std::size_t u = 0; u < a.n1(); ++u) {
          for (std::size_t v = 0; v < a.n1(); ++v) {
            next[(i * a.n1() + u) * next_side + (j * a.n1() + v)] = p * a.at(u, v);
          }
        }
      }
    }
    out.side = next_side;
    out.values = std::move(next);
  }
  return out;
}

KroneckerDrawer::KroneckerDrawer(const InitiatorMatrix& a, unsigned k) : n1_(a.n1()), k_(k) {
  if (k == 0) throw PreconditionError("Kronecker power k must be >= 1");
  const auto side = checked_power(n1_, k);
  if (!side) throw PreconditionError("n1^k overflows the position range");
  side_ = *side;
  const double total = a.sum();
  if (!(total > 0.0)) throw FitError("initiator has no positive entry; cannot normalize");
  cumulative_.resize(a.entries().size());
  double acc = 0.0;
  for (std::size_t c = 0; c < cumulative_.size(); ++c) {
    acc += a.entries()[c] / total;
    cumulative_[c] = acc;
  }
}

PositionPair KroneckerDrawer::draw(Rng& rng) const {
  PositionPair out;
  std::uint64_t place = 1;
  for (unsigned t = 0; t < k_; ++t) {
    const std::size_t cell = rng.categorical(cumulative_);
    out.row += (cell / n1_) * place;
    out.col += (cell % n1_) * place;
    place *= n1_;
  }
  return out;
}

StaticGraph sample_graph(const InitiatorMatrix& a, const KronSampleSpec& spec, SampleStats* stats) {
  const std::size_t n = spec.target_nodes;
  if (n == 0) throw PreconditionError("target node count must be positive");
  const long double cells = static_cast<long double>(n) * static_cast<long double>(n);
  if (static_cast<long double>(spec.target_edges) > cells) {
    throw InfeasibleError("target edge count " + std::to_string(spec.target_edges) +
                          " exceeds N^2 = " + std::to_string(static_cast<unsigned long long>(cells)));
  }
  const unsigned k = spec.k == 0 ? kron_levels(a.n1(), n) : spec.k;
  const KroneckerDrawer drawer(a, k);
  if (drawer.side() < n) throw PreconditionError("n1^k is smaller than the target node count");

  // Position -> node. The fitted permutation is honoured only when it was fit
  // for this exact node count and depth.
  std::unordered_map<std::uint64_t, NodeId> fitted;
  const bool use_fitted = a.node_positions.size() == n && kron_levels(a.n1(), n) == k &&
                          std::all_of(a.node_positions.begin(), a.node_positions.end(),
                                      [&](std::uint64_t p) { return p < drawer.side(); });
  if (use_fitted) {
    fitted.reserve(n);
    for (std::size_t v = 0; v < n; ++v) fitted.emplace(a.node_positions[v], static_cast<NodeId>(v));
    if (fitted.size() != n) throw DataError("fitted node positions are not distinct");
  }
  auto to_node = [&](std::uint64_t pos) -> std::optional<NodeId> {
    if (use_fitted) {
      const auto it = fitted.find(pos);
      if (it == fitted.end()) return std::nullopt;
      return it->second;
    }
    if (pos >= n) return std::nullopt;
    return static_cast<NodeId>(pos);
  };

  Rng rng(spec.seed);
  SampleStats local;
  SampleStats& st = stats ? *stats : local;
  st = SampleStats{};
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(spec.target_edges * 2);
  std::vector<Edge> edges;
  edges.reserve(spec.target_edges);
  const std::size_t stall_limit = 1'000'000 + 100 * spec.target_edges;
  std::size_t since_progress = 0;
  while (edges.size() < spec.target_edges) {
    const PositionPair p = drawer.draw(rng);
    ++st.draws;
    const auto src = to_node(p.row);
    const auto dst = to_node(p.col);
    if (!src || !dst) {
      ++st.out_of_range;
    } else if (!seen.insert(static_cast<std::uint64_t>(*src) * n + *dst).second) {
      ++st.duplicates;
    } else {
      edges.push_back({*src, *dst});
      since_progress = 0;
      continue;
    }
    if (++since_progress > stall_limit) {
      throw InfeasibleError("Kronecker sampler stalled after " + std::to_string(edges.size()) +
                            " of " + std::to_string(spec.target_edges) +
                            " edges; initiator support is too small");
    }
  }
  return StaticGraph(n, std::move(edges), true);
}

namespace {

// Stochastic gradient ascent on the sampled-permutation Kronecker likelihood.
// Nodes are placed on n1^k positions; positions without a node act as
// isolated padding nodes.
class KronFitter {
 public:
  KronFitter(const StaticGraph& g, const KronFitParams& params)
      : params_(params),
        n1_(params.n1),
        k_(kron_levels(params.n1, g.node_count())),
        nodes_(g.node_count()),
        rng_(params.seed),
        edges_(g.edges()),
        out_(nodes_),
        in_(nodes_) {
    const auto side = checked_power(n1_, k_);
    if (!side || *side > (std::uint64_t{1} << 28)) {
      throw PreconditionError("graph too large for the position table at this n1");
    }
    side_ = static_cast<std::size_t>(*side);
    for (const auto& e : edges_) {
      out_[e.src].push_back(e.dst);
      in_[e.dst].push_back(e.src);
    }
    digits_.resize(side_ * k_);
    for (std::size_t pos = 0; pos < side_; ++pos) {
      std::size_t rest = pos;
      for (unsigned t = 0; t < k_; ++t) {
        digits_[pos * k_ + t] = static_cast<std::uint8_t>(rest % n1_);
        rest /= n1_;
      }
    }
    init_theta();
    init_permutation(g);
  }

  InitiatorMatrix run(KronFitTrace* trace) {
    const std::size_t swaps =
        static_cast<std::size_t>(std::ceil(params_.swaps_per_node * static_cast<double>(nodes_)));
    std::vector<double> grad(n1_ * n1_);
    for (std::size_t it = 0; it < params_.iterations; ++it) {
      const double acceptance = metropolis(swaps);
      const double ll = gradient(grad);
      if (!std::isfinite(ll) ||
          std::any_of(grad.begin(), grad.end(), [](double v) { return !std::isfinite(v); })) {
        throw FitError("non-finite log-likelihood gradient at iteration " + std::to_string(it));
      }
      if (trace) {
        trace->log_likelihood.push_back(ll);
        trace->acceptance_rate.push_back(acceptance);
      }
      double scale = 0.0;
      for (double v : grad) scale = std::max(scale, std::abs(v));
      const double clip = scale > 1.0 ? 1.0 / scale : 1.0;
      for (std::size_t c = 0; c < theta_.size(); ++c) {
        theta_[c] = std::clamp(theta_[c] + params_.learning_rate * clip * grad[c],
                               params_.clamp_epsilon, 1.0 - params_.clamp_epsilon);
      }
      refresh_logs();
    }
    metropolis(swaps);
    const double final_ll = gradient(grad);
    if (!std::isfinite(final_ll)) throw FitError("non-finite final log-likelihood");

    InitiatorMatrix out(n1_, theta_);
    out.log_likelihood = final_ll;
    out.bic = bic(final_ll, n1_, nodes_);
    out.seed = params_.seed;
    out.node_positions.assign(position_.begin(), position_.end());
    return out;
  }

 private:
  static constexpr std::size_t kEmpty = std::numeric_limits<std::size_t>::max();

  void init_theta() {
    // Entries start around the uniform initiator whose expected edge count
    // matches the graph, with seeded jitter to break the symmetry.
    const double e = std::max<double>(1.0, static_cast<double>(edges_.size()));
    const double base = std::pow(e, 1.0 / k_) / static_cast<double>(n1_ * n1_);
    theta_.resize(n1_ * n1_);
    for (auto& v : theta_) {
      v = std::clamp(base * rng_.uniform(0.5, 1.5), params_.clamp_epsilon,
                     1.0 - params_.clamp_epsilon);
    }
    refresh_logs();
  }

  // Highest-degree nodes take the positions with the highest expected degree.
  void init_permutation(const StaticGraph& g) {
    std::vector<double> row_sum(n1_, 0.0), col_sum(n1_, 0.0);
    for (std::size_t i = 0; i < n1_; ++i) {
      for (std::size_t j = 0; j < n1_; ++j) {
        row_sum[i] += theta_[i * n1_ + j];
        col_sum[j] += theta_[i * n1_ + j];
      }
    }
    std::vector<double> expected(side_);
    for (std::size_t pos = 0; pos < side_; ++pos) {
      double out = 1.0, in = 1.0;
      for (unsigned t = 0; t < k_; ++t) {
        out *= row_sum[digits_[pos * k_ + t]];
        in *= col_sum[digits_[pos * k_ + t]];
      }
      expected[pos] = out + in;
    }
    std::vector<std::size_t> positions(side_);
    std::iota(positions.begin(), positions.end(), 0);
    std::stable_sort(positions.begin(), positions.end(),
                     [&](std::size_t x, std::size_t y) { return expected[x] > expected[y]; });
    const auto deg = g.degrees();
    std::vector<std::size_t> order(nodes_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return deg[x] > deg[y]; });
    position_.assign(nodes_, 0);
    occupant_.assign(side_, kEmpty);
    for (std::size_t r = 0; r < nodes_; ++r) {
      position_[order[r]] = positions[r];
      occupant_[positions[r]] = order[r];
    }
  }

  void refresh_logs() {
    log_theta_.resize(theta_.size());
    for (std::size_t c = 0; c < theta_.size(); ++c) log_theta_[c] = std::log(theta_[c]);
  }

  double log_prob(std::size_t row, std::size_t col) const {
    double lp = 0.0;
    const std::uint8_t* dr = &digits_[row * k_];
    const std::uint8_t* dc = &digits_[col * k_];
    for (unsigned t = 0; t < k_; ++t) lp += log_theta_[dr[t] * n1_ + dc[t]];
    return lp;
  }

  // log p - log(1 - p) with the second-order expansion of log(1 - p).
  static double edge_term(double lp) {
    const double p = std::exp(lp);
    return lp + p + 0.5 * p * p;
  }

  double incident_terms(std::size_t u, std::size_t v) const {
    double s = 0.0;
    for (NodeId w : out_[u]) s += edge_term(log_prob(position_[u], position_[w]));
    for (NodeId w : in_[u]) {
      if (w != u) s += edge_term(log_prob(position_[w], position_[u]));
    }
    if (v != kEmpty) {
      for (NodeId w : out_[v]) {
        if (w != u) s += edge_term(log_prob(position_[v], position_[w]));
      }
      for (NodeId w : in_[v]) {
        if (w != u && w != v) s += edge_term(log_prob(position_[w], position_[v]));
      }
    }
    return s;
  }

  void swap_positions(std::size_t u, std::size_t target) {
    const std::size_t from = position_[u];
    const std::size_t v = occupant_[target];
    position_[u] = target;
    occupant_[target] = u;
    occupant_[from] = v;
    if (v != kEmpty) position_[v] = from;
  }

  // Metropolis over node placements; the empty-graph term is invariant, so
  // only edges touching the two moved nodes enter the acceptance ratio.
  double metropolis(std::size_t proposals) {
    if (nodes_ < 2 && side_ < 2) return 0.0;
    std::size_t accepted = 0;
    for (std::size_t s = 0; s < proposals; ++s) {
      const std::size_t u = rng_.index(nodes_);
      const std::size_t target = rng_.index(side_);
      if (target == position_[u]) continue;
      const std::size_t from = position_[u];
      const std::size_t v = occupant_[target];
      const double before = incident_terms(u, v);
      swap_positions(u, target);
      const double after = incident_terms(u, v);
      const double delta = after - before;
      if (delta >= 0.0 || rng_.uniform() < std::exp(delta)) {
        ++accepted;
      } else {
        swap_positions(u, from);
      }
    }
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }

  // Fills grad with d l / d theta and returns the log-likelihood estimate at
  // the current placement.
  double gradient(std::vector<double>& grad) const {
    const std::size_t cells = n1_ * n1_;
    double sum = 0.0, sum_sq = 0.0;
    for (double v : theta_) {
      sum += v;
      sum_sq += v * v;
    }
    const double kd = static_cast<double>(k_);
    const double pow_sum = std::pow(sum, kd - 1.0);
    const double pow_sq = std::pow(sum_sq, kd - 1.0);
    double ll = -pow_sum * sum - 0.5 * pow_sq * sum_sq;
    for (std::size_t c = 0; c < cells; ++c) grad[c] = -kd * pow_sum - kd * theta_[c] * pow_sq;

    std::vector<unsigned> counts(cells);
    for (const auto& e : edges_) {
      const std::size_t row = position_[e.src];
      const std::size_t col = position_[e.dst];
      std::fill(counts.begin(), counts.end(), 0u);
      double lp = 0.0;
      for (unsigned t = 0; t < k_; ++t) {
        const std::size_t c = digits_[row * k_ + t] * n1_ + digits_[col * k_ + t];
        ++counts[c];
        lp += log_theta_[c];
      }
      const double p = std::exp(lp);
      ll += lp + p + 0.5 * p * p;
      const double factor = 1.0 + p + p * p;
      for (std::size_t c = 0; c < cells; ++c) {
        if (counts[c]) grad[c] += counts[c] / theta_[c] * factor;
      }
    }
    return ll;
  }

  KronFitParams params_;
  std::size_t n1_;
  unsigned k_;
  std::size_t nodes_;
  std::size_t side_ = 0;
  Rng rng_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
  std::vector<std::uint8_t> digits_;
  std::vector<double> theta_;
  std::vector<double> log_theta_;
  std::vector<std::size_t> position_;
  std::vector<std::size_t> occupant_;
};

}  // namespace

InitiatorMatrix kronfit(const StaticGraph& g, const KronFitParams& params, KronFitTrace* trace) {
  if (params.n1 < 2) throw PreconditionError("kronfit requires n1 >= 2");
  if (g.node_count() == 0 || g.edge_count() == 0) throw PreconditionError("kronfit requires a nonempty graph");
  if (params.iterations == 0) throw PreconditionError("kronfit requires at least one iteration");
  if (!(params.learning_rate > 0.0)) throw PreconditionError("kronfit learning rate must be positive");
  if (params.n1 > 255) throw PreconditionError("kronfit supports n1 <= 255");
  KronFitter fitter(g, params);
  return fitter.run(trace);
}

double bic(double log_likelihood, std::size_t n1, std::size_t node_count) {
  const double n = static_cast<double>(node_count);
  const double side = static_cast<double>(n1);
  return -log_likelihood + 0.5 * side * side * std::log(n * n);
}

InitiatorMatrix select_n1(const StaticGraph& g, std::span<const std::size_t> candidates,
                          const KronFitParams& params) {
  if (candidates.empty()) throw PreconditionError("select_n1 needs at least one candidate");
  for (std::size_t c : candidates) {
    if (c < 2) throw PreconditionError("initiator candidates must be >= 2");
  }
  std::vector<std::size_t> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::future<InitiatorMatrix>> fits;
  for (std::size_t n1 : sorted) {
    KronFitParams p = params;
    p.n1 = n1;
    fits.push_back(std::async(std::launch::async, [&g, p] { return kronfit(g, p); }));
  }
  std::vector<InitiatorMatrix> done;
  std::string failures;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    try {
      done.push_back(fits[i].get());
    } catch (const Error& e) {
      failures += " n1=" + std::to_string(sorted[i]) + ": " + e.what() + ";";
    }
  }
  if (done.empty()) throw FitError("every initiator candidate failed:" + failures);
  return done[min_bic_index(done)];
}

std::size_t min_bic_index(std::span<const InitiatorMatrix> fits) {
  if (fits.empty()) throw PreconditionError("no fits to compare");
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    const auto& a = fits[i];
    const auto& b = fits[best];
    if (a.bic < b.bic || (a.bic == b.bic && a.n1() < b.n1())) best = i;
  }
  return best;
}

}  // namespace netsynth
