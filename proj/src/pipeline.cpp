#include "netsynth/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <sstream>

#include "netsynth/alignment.hpp"
#include "netsynth/csv.hpp"
#include "netsynth/errors.hpp"
#include "netsynth/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace netsynth {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(seed ^ splitmix(stream)); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw PreconditionError("output directory not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Rethrows any library error with the stage name in front, keeping its type.
template <typename F>
auto run_stage(const char* stage, F&& fn) -> decltype(fn()) {
  const auto wrap = [stage](const std::exception& e) { return std::string("stage '") + stage + "': " + e.what(); };
  try {
    return fn();
  } catch (const SchemaError& e) {
    throw SchemaError(wrap(e));
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(wrap(e));
  } catch (const EncodingError& e) {
    throw EncodingError(wrap(e));
  } catch (const DataError& e) {
    throw DataError(wrap(e));
  } catch (const PreconditionError& e) {
    throw PreconditionError(wrap(e));
  } catch (const FitError& e) {
    throw FitError(wrap(e));
  } catch (const json::exception& e) {
    throw DataError(wrap(e));
  }
}

IngestOptions reference_options(const PipelineConfig& config) {
  IngestOptions opts;
  opts.schema = config.schema;
  return opts;
}

// Runs tasks 0..count-1 with up to `workers` in flight; results keep index order.
template <typename T>
std::vector<T> run_parallel(std::size_t count, std::size_t workers, const std::function<T(std::size_t)>& task) {
  std::vector<T> out;
  out.reserve(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(task(i));
    return out;
  }
  for (std::size_t begin = 0; begin < count; begin += workers) {
    const std::size_t end = std::min(count, begin + workers);
    std::vector<std::future<T>> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, task, i));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

std::vector<std::string> resize_ip_map(std::vector<std::string> ip_map, std::size_t nodes) {
  if (ip_map.empty()) return ip_map;
  const std::size_t old = ip_map.size();
  ip_map.resize(nodes);
  for (std::size_t v = old; v < nodes; ++v) ip_map[v] = "syn-" + std::to_string(v);
  return ip_map;
}

}  // namespace

void validate(const PipelineConfig& c) {
  const auto fail = [](const std::string& what) { throw PreconditionError("config: " + what); };
  if (c.n1_candidates.empty()) fail("n1_candidates must not be empty");
  for (std::size_t n1 : c.n1_candidates) {
    if (n1 < 2 || n1 > 8) fail("n1 candidates must be in [2, 8]");
  }
  if (c.fit_iterations < 1) fail("fit_iterations must be >= 1");
  if (!(c.fit_learning_rate > 0.0)) fail("fit_learning_rate must be > 0");
  if (c.feature_modes < 1) fail("feature_modes must be >= 1");
  if (c.alignment.threshold < 0.0) fail("alignment.threshold must be >= 0");
  if (c.alignment.trees < 1) fail("alignment.trees must be >= 1");
  if (c.alignment.depth < 1) fail("alignment.depth must be >= 1");
  if (!(c.alignment.learning_rate > 0.0 && c.alignment.learning_rate <= 1.0)) {
    fail("alignment.learning_rate must be in (0, 1]");
  }
  if (!(c.alignment.sample_fraction > 0.0 && c.alignment.sample_fraction <= 1.0)) {
    fail("alignment.sample_fraction must be in (0, 1]");
  }
  if (!(c.alignment.edge_fraction > 0.0 && c.alignment.edge_fraction <= 1.0)) {
    fail("alignment.edge_fraction must be in (0, 1]");
  }
  if (c.ensemble_size < 1) fail("ensemble_size must be >= 1");
  if (!(c.day_length > 0.0)) fail("day_length must be > 0");
  if (c.workers < 1) fail("workers must be >= 1");
  if (c.nodes && *c.nodes < 1) fail("nodes must be >= 1");
}

void to_json(json& j, const PipelineConfig& c) {
  const auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  j = json{{"input", c.input.string()},
           {"model_dir", c.model_dir.string()},
           {"output_dir", c.output_dir.string()},
           {"ensemble_dir", c.ensemble_dir.string()},
           {"report_dir", c.report_dir.string()},
           {"schema",
            {{"src", c.schema.src},
             {"dst", c.schema.dst},
             {"start", c.schema.start},
             {"end", c.schema.end},
             {"duration", c.schema.duration},
             {"port", c.schema.port},
             {"protocol", c.schema.protocol},
             {"port_protocol", c.schema.port_protocol}}},
           {"n1_candidates", c.n1_candidates},
           {"fit_iterations", c.fit_iterations},
           {"fit_learning_rate", c.fit_learning_rate},
           {"feature_modes", c.feature_modes},
           {"alignment",
            {{"threshold", c.alignment.threshold},
             {"trees", c.alignment.trees},
             {"depth", c.alignment.depth},
             {"learning_rate", c.alignment.learning_rate},
             {"sample_fraction", c.alignment.sample_fraction},
             {"pair_budget", c.alignment.pair_budget},
             {"edge_fraction", c.alignment.edge_fraction}}},
           {"ensemble_size", c.ensemble_size},
           {"day_length", c.day_length},
           {"seed", c.seed},
           {"workers", c.workers},
           {"nodes", opt(c.nodes)},
           {"edges", opt(c.edges)},
           {"flows", opt(c.flows)},
           {"baseline", std::string(to_string(c.baseline))}};
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw PreconditionError("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw PreconditionError("config: unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, fs::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

void read_opt(const json& j, const char* key, std::optional<std::size_t>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<std::size_t>();
  }
}

}  // namespace

void from_json(const json& j, PipelineConfig& c) {
  check_keys(j,
             {"input", "model_dir", "output_dir", "ensemble_dir", "report_dir", "schema", "n1_candidates",
              "fit_iterations", "fit_learning_rate", "feature_modes", "alignment", "ensemble_size",
              "day_length", "seed", "workers", "nodes", "edges", "flows", "baseline"},
             "");
  try {
    read_path(j, "input", c.input);
    read_path(j, "model_dir", c.model_dir);
    read_path(j, "output_dir", c.output_dir);
    read_path(j, "ensemble_dir", c.ensemble_dir);
    read_path(j, "report_dir", c.report_dir);
    if (j.contains("schema")) {
      const json& s = j.at("schema");
      check_keys(s, {"src", "dst", "start", "end", "duration", "port", "protocol", "port_protocol"}, "schema.");
      read_key(s, "src", c.schema.src);
      read_key(s, "dst", c.schema.dst);
      read_key(s, "start", c.schema.start);
      read_key(s, "end", c.schema.end);
      read_key(s, "duration", c.schema.duration);
      read_key(s, "port", c.schema.port);
      read_key(s, "protocol", c.schema.protocol);
      read_key(s, "port_protocol", c.schema.port_protocol);
    }
    read_key(j, "n1_candidates", c.n1_candidates);
    read_key(j, "fit_iterations", c.fit_iterations);
    read_key(j, "fit_learning_rate", c.fit_learning_rate);
    read_key(j, "feature_modes", c.feature_modes);
    if (j.contains("alignment")) {
      const json& a = j.at("alignment");
      check_keys(a,
                 {"threshold", "trees", "depth", "learning_rate", "sample_fraction", "pair_budget",
                  "edge_fraction"},
                 "alignment.");
      read_key(a, "threshold", c.alignment.threshold);
      read_key(a, "trees", c.alignment.trees);
      read_key(a, "depth", c.alignment.depth);
      read_key(a, "learning_rate", c.alignment.learning_rate);
      read_key(a, "sample_fraction", c.alignment.sample_fraction);
      read_key(a, "pair_budget", c.alignment.pair_budget);
      read_key(a, "edge_fraction", c.alignment.edge_fraction);
    }
    read_key(j, "ensemble_size", c.ensemble_size);
    read_key(j, "day_length", c.day_length);
    read_key(j, "seed", c.seed);
    read_key(j, "workers", c.workers);
    read_opt(j, "nodes", c.nodes);
    read_opt(j, "edges", c.edges);
    read_opt(j, "flows", c.flows);
    if (j.contains("baseline")) c.baseline = parse_baseline_kind(j.at("baseline").get<std::string>());
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw PreconditionError("config " + path.string() + ": " + e.what());
  }
  PipelineConfig c;
  from_json(j, c);
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  json j = config;
  for (const char* key : {"input", "model_dir", "output_dir", "ensemble_dir", "report_dir", "workers"}) {
    j.erase(key);
  }
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::size_t ModelBundle::reference_nodes() const { return manifest.at("reference").at("nodes").get<std::size_t>(); }
std::size_t ModelBundle::reference_edges() const { return manifest.at("reference").at("edges").get<std::size_t>(); }
std::size_t ModelBundle::reference_flows() const { return manifest.at("reference").at("flows").get<std::size_t>(); }
double ModelBundle::epoch() const { return manifest.at("reference").at("epoch").get<double>(); }
std::vector<std::string> ModelBundle::ip_map() const {
  return manifest.at("reference").at("ip_map").get<std::vector<std::string>>();
}

ModelBundle fit_model(const DynamicMultigraph& ref, const PipelineConfig& config) {
  validate(config);
  if (ref.flow_count() == 0) throw DataError("reference has no flows");
  ModelBundle model;
  const StaticGraph g = run_stage("to_static", [&] { return to_static(ref); });

  KronFitParams params;
  params.iterations = config.fit_iterations;
  params.learning_rate = config.fit_learning_rate;
  params.seed = derive_seed(config.seed, 1);
  model.initiator = run_stage("select_n1", [&] { return select_n1(g, config.n1_candidates, params); });

  const std::size_t modes = std::min(config.feature_modes, ref.flow_count());
  model.encoder =
      run_stage("fit_encoder", [&] { return FeatureEncoder::fit(ref, modes, derive_seed(config.seed, 2)); });
  model.sampler = run_stage("fit_sampler", [&] {
    return FeatureSampler::fit(ref, model.encoder, modes, derive_seed(config.seed, 3));
  });

  double fraction = config.alignment.sample_fraction;
  const double pairs = static_cast<double>(g.edge_count()) * static_cast<double>(ref.flow_count());
  if (config.alignment.pair_budget > 0 && pairs > 0.0) {
    fraction = std::min(fraction, static_cast<double>(config.alignment.pair_budget) / pairs);
  }
  const AlignmentTargets targets = run_stage(
      "build_targets", [&] { return build_targets(ref, model.encoder, fraction, derive_seed(config.seed, 4)); });
  const DescriptorMap descriptors = run_stage("structural_features", [&] { return structural_features(g); });
  BoostingParams boost;
  boost.trees = config.alignment.trees;
  boost.max_depth = config.alignment.depth;
  boost.learning_rate = config.alignment.learning_rate;
  std::vector<double> mse;
  model.scorer = run_stage("train_scorer", [&] { return train_scorer(targets, descriptors, boost, &mse); });

  json reference{{"nodes", ref.node_count()},
                 {"edges", g.edge_count()},
                 {"flows", ref.flow_count()},
                 {"epoch", ref.epoch()},
                 {"max_end_time", ref.max_end_time()},
                 {"ip_map", ref.ip_map()}};
  model.manifest = json{{"config_hash", config_hash(config)},
                        {"seed", config.seed},
                        {"config", config},
                        {"n1", model.initiator.n1()},
                        {"bic", model.initiator.bic},
                        {"alignment_pairs", targets.pairs.size()},
                        {"alignment_sample_fraction", fraction},
                        {"scorer_train_mse", mse.empty() ? 0.0 : mse.back()},
                        {"reference", reference},
                        {"artifacts", json::array({"initiator.json", "encoder.json", "sampler.json", "scorer.json"})}};
  for (const char* key : {"input", "model_dir", "output_dir", "ensemble_dir", "report_dir", "workers"}) {
    model.manifest["config"].erase(key);
  }
  return model;
}

void save_model(const ModelBundle& model, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> written;
  try {
    const std::pair<const char*, json> files[] = {{"initiator.json", model.initiator},
                                                  {"encoder.json", model.encoder},
                                                  {"sampler.json", model.sampler},
                                                  {"scorer.json", model.scorer},
                                                  {"manifest.json", model.manifest}};
    for (const auto& [name, content] : files) {
      written.push_back(dir / name);
      write_json(content, written.back());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

ModelBundle cmd_fit(const PipelineConfig& config) {
  validate(config);
  if (config.model_dir.empty()) throw PreconditionError("config: model_dir not set");
  const DynamicMultigraph ref =
      run_stage("ingest", [&] { return ingest_csv(config.input, reference_options(config)); });
  ModelBundle model = fit_model(ref, config);
  run_stage("persist", [&] {
    save_model(model, config.model_dir);
    return 0;
  });
  return model;
}

ModelBundle load_model(const fs::path& dir) {
  for (const char* name : kModelArtifacts) {
    if (!fs::exists(dir / name)) throw DataError("model bundle incomplete: missing " + (dir / name).string());
  }
  ModelBundle m;
  try {
    m.initiator = read_json(dir / "initiator.json").get<InitiatorMatrix>();
    m.encoder = read_json(dir / "encoder.json").get<FeatureEncoder>();
    m.sampler = read_json(dir / "sampler.json").get<FeatureSampler>();
    m.scorer = read_json(dir / "scorer.json").get<BoostedScorer>();
    m.manifest = read_json(dir / "manifest.json");
    (void)m.reference_nodes();
    (void)m.ip_map();
  } catch (const json::exception& e) {
    throw DataError("model bundle " + dir.string() + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw DataError("model bundle " + dir.string() + ": " + e.what());
  }
  return m;
}

MemberTargets member_targets(const ModelBundle& model, const PipelineConfig& config) {
  MemberTargets t{model.reference_nodes(), model.reference_edges(), model.reference_flows()};
  if (config.nodes) t.nodes = *config.nodes;
  if (config.edges) t.edges = *config.edges;
  if (config.flows) t.flows = *config.flows;
  if (static_cast<long double>(t.edges) > static_cast<long double>(t.nodes) * t.nodes) {
    throw InfeasibleError("target edge count " + std::to_string(t.edges) + " exceeds N^2 for N = " +
                          std::to_string(t.nodes));
  }
  return t;
}

DynamicMultigraph generate_member(const ModelBundle& model, const MemberTargets& targets,
                                  const PipelineConfig& config, std::uint64_t member_seed) {
  const StaticGraph g = sample_graph(model.initiator, {targets.nodes, targets.edges, 0, member_seed});
  const SampledFeatures features =
      sample_features(model.sampler, model.encoder, targets.flows, derive_seed(member_seed, 11));
  AssignOptions opts;
  opts.threshold = config.alignment.threshold;
  opts.edge_fraction = config.alignment.edge_fraction;
  opts.seed = derive_seed(member_seed, 12);
  return assign_edges(model.scorer, g, features, model.encoder, opts,
                      resize_ip_map(model.ip_map(), targets.nodes), model.epoch());
}

std::string member_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%03zu.csv", index);
  return buf;
}

namespace {

std::vector<fs::path> write_ensemble(const PipelineConfig& config, const std::string& generator,
                                     const MemberTargets& targets,
                                     const std::function<DynamicMultigraph(std::uint64_t)>& make) {
  ensure_dir(config.output_dir);
  const auto paths = run_parallel<fs::path>(config.ensemble_size, config.workers, [&](std::size_t i) {
    const std::uint64_t seed = config.seed + i;
    DynamicMultigraph member;
    try {
      member = make(seed);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("member " + std::to_string(i) + ": " + e.what());
    }
    const fs::path path = config.output_dir / member_file_name(i);
    write_csv(member, path);
    return path;
  });
  json members = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    members.push_back({{"file", paths[i].filename().string()}, {"seed", config.seed + i}});
  }
  write_json(json{{"generator", generator},
                  {"config_hash", config_hash(config)},
                  {"seed", config.seed},
                  {"nodes", targets.nodes},
                  {"edges", targets.edges},
                  {"flows", targets.flows},
                  {"day_length", config.day_length},
                  {"members", members}},
             config.output_dir / "ensemble.json");
  return paths;
}

}  // namespace

std::vector<fs::path> cmd_generate(const PipelineConfig& config, const ModelBundle& model) {
  validate(config);
  const MemberTargets targets = member_targets(model, config);
  return write_ensemble(config, "model", targets,
                        [&](std::uint64_t seed) { return generate_member(model, targets, config, seed); });
}

std::vector<fs::path> cmd_generate(const PipelineConfig& config) {
  validate(config);
  return cmd_generate(config, load_model(config.model_dir));
}

std::vector<fs::path> cmd_baseline(const PipelineConfig& config) {
  validate(config);
  const DynamicMultigraph ref = ingest_csv(config.input, reference_options(config));
  if (ref.flow_count() == 0) throw DataError("reference has no flows");
  MemberTargets targets{ref.node_count(), to_static(ref).edge_count(), ref.flow_count()};
  if (config.nodes) targets.nodes = *config.nodes;
  if (config.edges) targets.edges = *config.edges;
  if (config.flows) targets.flows = *config.flows;
  if (static_cast<long double>(targets.edges) > static_cast<long double>(targets.nodes) * targets.nodes) {
    throw InfeasibleError("target edge count exceeds N^2");
  }
  InitiatorMatrix rmat;
  if (config.baseline == BaselineKind::rmat2) {
    rmat = rmat2_initiator(ref, derive_seed(config.seed, 1), config.fit_iterations);
  }
  return write_ensemble(config, std::string(to_string(config.baseline)), targets, [&](std::uint64_t seed) {
    BaselineSpec spec{config.baseline, targets.nodes, targets.edges, targets.flows, seed};
    return generate_baseline(spec, ref, rmat);
  });
}

namespace {

std::vector<fs::path> list_members(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("ensemble directory not found: " + dir.string());
  std::vector<fs::path> members, any_csv;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("cdf_", 0) == 0) continue;
    any_csv.push_back(entry.path());
    if (name.rfind("member_", 0) == 0) members.push_back(entry.path());
  }
  auto& chosen = members.empty() ? any_csv : members;
  std::sort(chosen.begin(), chosen.end());
  if (chosen.empty()) throw DataError("ensemble directory has no CSV members: " + dir.string());
  return chosen;
}

void write_cdf_table(const fs::path& path, const std::vector<std::string>& names,
                     const std::vector<const EmpiricalCdf*>& cdfs,
                     const std::vector<const std::vector<std::string>*>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dataset,value,cdf\n";
  for (std::size_t d = 0; d < names.size(); ++d) {
    for (const auto& [x, p] : cdfs[d]->points) {
      std::string value;
      if (!labels.empty()) {
        const auto idx = static_cast<std::size_t>(x);
        value = idx < labels[d]->size() ? csv::escape((*labels[d])[idx]) : csv::format_double(x);
      } else {
        value = csv::format_double(x);
      }
      out << csv::escape(names[d]) << ',' << value << ',' << csv::format_double(p) << '\n';
    }
  }
}

}  // namespace

EvaluationResult cmd_evaluate(const PipelineConfig& config) {
  validate(config);
  const fs::path ens_dir = config.ensemble_dir.empty() ? config.output_dir : config.ensemble_dir;
  const fs::path out_dir = config.report_dir.empty() ? ens_dir : config.report_dir;
  const DynamicMultigraph ref = ingest_csv(config.input, reference_options(config));
  const auto files = list_members(ens_dir);

  IngestOptions member_opts = reference_options(config);
  member_opts.known_ips = &ref.ip_map();
  member_opts.epoch = ref.epoch();
  Ensemble ensemble;
  ensemble.day_length = config.day_length;
  ensemble.members = run_parallel<DynamicMultigraph>(files.size(), config.workers, [&](std::size_t i) {
    DynamicMultigraph g = ingest_csv(files[i], member_opts);
    if (g.node_count() != ref.node_count()) {
      throw DataError("member " + files[i].filename().string() + " has " + std::to_string(g.node_count()) +
                      " nodes but the reference has " + std::to_string(ref.node_count()) +
                      "; the edit distance needs node-aligned graphs (same IP set)");
    }
    return g;
  });

  EvaluationResult result;
  result.report = to_json(evaluate_ensemble(ref, ensemble));

  const StaticGraph ref_static = to_static(ref);
  const FeatureCdfs ref_cdfs = feature_cdfs(ref);
  const auto reports = run_parallel<StructuralReport>(ensemble.members.size(), config.workers, [&](std::size_t i) {
    return structural_report(to_static(ensemble.members[i]), ref_static);
  });
  result.structural = json::array();
  result.features = json::array();
  std::vector<std::string> names{"reference"};
  std::vector<FeatureCdfs> member_cdfs;
  member_cdfs.reserve(ensemble.members.size());
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    const std::string name = files[i].filename().string();
    json s = to_json(reports[i]);
    s["member"] = name;
    result.structural.push_back(std::move(s));
    member_cdfs.push_back(feature_cdfs(ensemble.members[i], ref_cdfs.category_order));
    const auto& mc = member_cdfs.back();
    result.features.push_back({{"member", name},
                               {"ks_start_time", ks_distance(ref_cdfs.start_time, mc.start_time)},
                               {"ks_duration", ks_distance(ref_cdfs.duration, mc.duration)},
                               {"ks_port_protocol", ks_distance(ref_cdfs.port_protocol, mc.port_protocol)}});
    names.push_back(name);
  }

  ensure_dir(out_dir);
  write_json(result.report, out_dir / "report.json");
  write_json(result.structural, out_dir / "structural.json");
  write_json(result.features, out_dir / "features.json");
  std::vector<const EmpiricalCdf*> start{&ref_cdfs.start_time}, dur{&ref_cdfs.duration},
      port{&ref_cdfs.port_protocol};
  for (const auto& mc : member_cdfs) {
    start.push_back(&mc.start_time);
    dur.push_back(&mc.duration);
    port.push_back(&mc.port_protocol);
  }
  write_cdf_table(out_dir / "cdf_start_time.csv", names, start, {});
  write_cdf_table(out_dir / "cdf_duration.csv", names, dur, {});
  std::vector<const std::vector<std::string>*> labels{&ref_cdfs.category_order};
  for (const auto& mc : member_cdfs) labels.push_back(&mc.category_order);
  write_cdf_table(out_dir / "cdf_port_protocol.csv", names, port, labels);
  return result;
}

}  // namespace netsynth
