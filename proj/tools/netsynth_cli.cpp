// netsynth: fit / generate / evaluate / baseline driver.
//
// Exit codes: 0 ok, 1 usage or bad configuration, 2 data error, 3 internal.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "netsynth/errors.hpp"
#include "netsynth/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> input, model_dir, output_dir, ensemble_dir, report_dir;
  std::optional<std::vector<std::size_t>> n1;
  std::optional<std::size_t> iterations, modes, trees, depth, pair_budget, count, workers;
  std::optional<std::size_t> nodes, edges, flows;
  std::optional<double> fit_lr, threshold, align_lr, sample_fraction, edge_fraction, day_length;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> kind;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "JSON config file; flags override it");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers, "concurrent member tasks");
  cmd->add_option("--day-length", f.day_length, "seconds per day block");
}

netsynth::PipelineConfig resolve(const Flags& f) {
  netsynth::PipelineConfig c;
  if (!f.config.empty()) c = netsynth::load_config(f.config);
  if (f.input) c.input = *f.input;
  if (f.model_dir) c.model_dir = *f.model_dir;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.ensemble_dir) c.ensemble_dir = *f.ensemble_dir;
  if (f.report_dir) c.report_dir = *f.report_dir;
  if (f.n1) c.n1_candidates = *f.n1;
  if (f.iterations) c.fit_iterations = *f.iterations;
  if (f.fit_lr) c.fit_learning_rate = *f.fit_lr;
  if (f.modes) c.feature_modes = *f.modes;
  if (f.threshold) c.alignment.threshold = *f.threshold;
  if (f.trees) c.alignment.trees = *f.trees;
  if (f.depth) c.alignment.depth = *f.depth;
  if (f.align_lr) c.alignment.learning_rate = *f.align_lr;
  if (f.sample_fraction) c.alignment.sample_fraction = *f.sample_fraction;
  if (f.pair_budget) c.alignment.pair_budget = *f.pair_budget;
  if (f.edge_fraction) c.alignment.edge_fraction = *f.edge_fraction;
  if (f.count) c.ensemble_size = *f.count;
  if (f.day_length) c.day_length = *f.day_length;
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.nodes) c.nodes = *f.nodes;
  if (f.edges) c.edges = *f.edges;
  if (f.flows) c.flows = *f.flows;
  if (f.kind) c.baseline = netsynth::parse_baseline_kind(*f.kind);
  netsynth::validate(c);
  return c;
}

void add_targets(CLI::App* cmd, Flags& f) {
  cmd->add_option("-o,--output", f.output_dir, "directory for member CSVs")->required();
  cmd->add_option("--count", f.count, "ensemble size");
  cmd->add_option("--nodes", f.nodes, "target node count (default: reference)");
  cmd->add_option("--edges", f.edges, "target edge count (default: reference)");
  cmd->add_option("--flows", f.flows, "target flow count (default: reference)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic netflow multigraph generator and ensemble evaluator"};
  app.require_subcommand(1);
  Flags f;

  auto* fit = app.add_subcommand("fit", "fit a model bundle to a reference CSV");
  add_common(fit, f);
  fit->add_option("-i,--input", f.input, "reference CSV")->required();
  fit->add_option("-m,--model", f.model_dir, "model bundle directory")->required();
  fit->add_option("--n1", f.n1, "initiator sizes to compare by BIC");
  fit->add_option("--iterations", f.iterations, "KronFit gradient iterations");
  fit->add_option("--fit-lr", f.fit_lr, "KronFit learning rate");
  fit->add_option("--modes", f.modes, "Gaussian mixture modes per continuous feature");
  fit->add_option("--trees", f.trees, "boosted trees");
  fit->add_option("--depth", f.depth, "maximum tree depth");
  fit->add_option("--align-lr", f.align_lr, "boosting learning rate");
  fit->add_option("--sample-fraction", f.sample_fraction, "share of (edge, flow) training pairs kept");
  fit->add_option("--pair-budget", f.pair_budget, "cap on training pairs, 0 for none");

  auto* gen = app.add_subcommand("generate", "generate an ensemble from a model bundle");
  add_common(gen, f);
  gen->add_option("-m,--model", f.model_dir, "model bundle directory")->required();
  add_targets(gen, f);
  gen->add_option("--threshold", f.threshold, "alignment score threshold");
  gen->add_option("--edge-fraction", f.edge_fraction, "share of edges scored per flow");

  auto* eval = app.add_subcommand("evaluate", "score an ensemble against the reference");
  add_common(eval, f);
  eval->add_option("-i,--input", f.input, "reference CSV")->required();
  eval->add_option("-e,--ensemble", f.ensemble_dir, "directory of member CSVs")->required();
  eval->add_option("-r,--report", f.report_dir, "report directory (default: ensemble directory)");

  auto* base = app.add_subcommand("baseline", "generate a baseline ensemble");
  add_common(base, f);
  base->add_option("-i,--input", f.input, "reference CSV")->required();
  base->add_option("-k,--kind", f.kind, "random | scale_free | rmat2")->required();
  base->add_option("--iterations", f.iterations, "KronFit iterations for rmat2");
  add_targets(base, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const netsynth::PipelineConfig config = resolve(f);
    if (fit->parsed()) {
      const auto model = netsynth::cmd_fit(config);
      std::cout << "fit: n1=" << model.initiator.n1() << " bic=" << model.initiator.bic
                << " hash=" << model.manifest.at("config_hash").get<std::string>() << " -> "
                << config.model_dir.string() << '\n';
    } else if (gen->parsed()) {
      const auto files = netsynth::cmd_generate(config);
      std::cout << "generate: " << files.size() << " members -> " << config.output_dir.string() << '\n';
    } else if (eval->parsed()) {
      const auto result = netsynth::cmd_evaluate(config);
      std::cout << result.report.dump() << '\n';
    } else if (base->parsed()) {
      const auto files = netsynth::cmd_baseline(config);
      std::cout << "baseline " << netsynth::to_string(config.baseline) << ": " << files.size()
                << " members -> " << config.output_dir.string() << '\n';
    }
  } catch (const netsynth::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const netsynth::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
