#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sumpref/commands.hpp"

namespace {

// Loads the config file when given, otherwise starts from defaults; CLI
// flags override file values.
sumpref::RunConfig resolve_config(const std::optional<std::string>& config_path,
                                  const std::optional<std::int64_t>& seed,
                                  const std::optional<int>& workers,
                                  bool needs_backend) {
  sumpref::RunConfig config;
  if (config_path) {
    config = sumpref::load_config_file(*config_path);
  } else if (needs_backend) {
    throw sumpref::ConfigError(
        "this command needs --config with a [backend] section");
  }
  if (seed) config.pipeline.rng_seed = static_cast<std::uint64_t>(*seed);
  if (workers) {
    if (*workers < 1) throw sumpref::ConfigError("--workers must be >= 1");
    config.pipeline.workers = *workers;
  }
  sumpref::refresh_fingerprint(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Faithfulness preference dataset builder and toy preference trainer"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::int64_t> seed;
  std::optional<int> workers;
  bool trace = false;
  app.add_option("--config", config_path, "Path to the run config file");
  app.add_option("--seed", seed, "Override the pipeline RNG seed");
  app.add_option("--workers", workers, "Override the document worker count");
  app.add_flag("--trace", trace, "Write a per-sample trace next to the output");

  auto* construct = app.add_subcommand(
      "construct", "Build a preference dataset from an unlabeled corpus");
  std::string corpus_path, out_path;
  std::optional<std::string> sft_path, trace_path;
  construct->add_option("--corpus,-i", corpus_path, "Corpus JSONL (id, document)")
      ->required();
  construct->add_option("--out,-o", out_path, "Preference JSONL output")->required();
  construct->add_option("--sft-out", sft_path, "Also write SFT targets JSONL");
  construct->add_option("--trace-out", trace_path,
                        "Trace JSONL path (implies --trace)");

  auto* score = app.add_subcommand(
      "score", "Score (document, summary) pairs for faithfulness");
  std::string pairs_path;
  score->add_option("--pairs", pairs_path, "Pairs JSONL (id, document, summary)")
      ->required();

  auto* refine = app.add_subcommand(
      "refine", "Critique and refine summaries at inference time");
  std::string refine_corpus, refine_out;
  refine->add_option("--corpus,-i", refine_corpus, "Corpus JSONL (id, document)")
      ->required();
  refine->add_option("--out,-o", refine_out, "Refined summaries JSONL output")
      ->required();

  auto* train = app.add_subcommand(
      "train-toy", "Train the toy categorical policy on a preference JSONL");
  std::string prefs_path;
  std::optional<std::string> report_path;
  int steps = 500;
  double lr = 0.1;
  train->add_option("--prefs", prefs_path, "Preference JSONL input")->required();
  train->add_option("--report", report_path, "Write the training report JSON here");
  train->add_option("--steps", steps, "Gradient descent steps");
  train->add_option("--lr", lr, "Learning rate");

  auto* inspect = app.add_subcommand("inspect", "Pretty-print a trace file");
  std::string inspect_path;
  inspect->add_option("trace", inspect_path, "Trace JSONL file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (construct->parsed()) {
      const sumpref::RunConfig config =
          resolve_config(config_path, seed, workers, true);
      sumpref::ConstructPaths paths{corpus_path, out_path, sft_path, trace_path};
      if (trace && !paths.trace_out) {
        paths.trace_out = out_path + ".trace.jsonl";
      }
      return sumpref::cmd_construct(config, paths, std::cout, std::cerr);
    }
    if (score->parsed()) {
      const sumpref::RunConfig config =
          resolve_config(config_path, seed, workers, true);
      return sumpref::cmd_score(config, pairs_path, std::cout, std::cerr);
    }
    if (refine->parsed()) {
      const sumpref::RunConfig config =
          resolve_config(config_path, seed, workers, true);
      return sumpref::cmd_refine(config, refine_corpus, refine_out, std::cout,
                                 std::cerr);
    }
    if (train->parsed()) {
      const sumpref::RunConfig config =
          resolve_config(config_path, seed, workers, false);
      return sumpref::cmd_train_toy(config, prefs_path, report_path, steps, lr,
                                    std::cout, std::cerr);
    }
    return sumpref::cmd_inspect(inspect_path, std::cout, std::cerr);
  } catch (const sumpref::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return sumpref::kExitConfig;
  }
}
