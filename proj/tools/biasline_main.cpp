#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "biasline/cli.hpp"

namespace {

// BIASLINE_THREADS caps workers; deterministic mode stays single-threaded.
std::size_t env_threads() {
  const char* raw = std::getenv("BIASLINE_THREADS");
  if (!raw) return 1;
  const long n = std::strtol(raw, nullptr, 10);
  return n > 1 ? static_cast<std::size_t>(n) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biasline: political bias labeling, prediction and cascade forecasting"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  std::string out_dir;
  app.add_option("--config", config_path, "pipeline config (JSON)")->required();
  app.add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_flag("--deterministic", deterministic,
               "force sequential, reproducible execution");
  app.add_option("--out", out_dir, "override the output directory");

  auto* label = app.add_subcommand("label", "score posts with political bias");
  auto* validate = app.add_subcommand("validate", "centroid cosine similarity report");
  auto* predict = app.add_subcommand("predict", "transfer-protocol metrics tables");
  std::string protocol = "transcripts";
  std::string train_forum, test_forum;
  predict->add_option("--protocol", protocol, "transcripts|cross");
  predict->add_option("--train-forum", train_forum, "cross protocol: training forum");
  predict->add_option("--test-forum", test_forum, "cross protocol: test forum");
  auto* forecast = app.add_subcommand("forecast", "cascade bias-shift forecasting");
  auto* cascades = app.add_subcommand("cascades", "export or synthesize cascades");
  bool synthesize = false;
  biasline::cli::SynthesizeOptions synth_opts;
  cascades->add_flag("--synthesize", synthesize,
                     "generate the planted-rule synthetic corpus");
  cascades->add_option("--count", synth_opts.cascades, "synthetic cascade count");
  cascades->add_option("--shift-fraction", synth_opts.shift_fraction,
                       "fraction of cascades with a planted shift");
  cascades->add_option("--noise-fraction", synth_opts.noise_fraction,
                       "fraction violating the planted rule");
  cascades->add_option("--synth-seed", synth_opts.seed, "generator seed");
  auto* tfidf = app.add_subcommand("tfidf", "export party TF-IDF weights");
  auto* embed_train = app.add_subcommand("embed-train", "train and persist embeddings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit with 2; --help with 0
  }

  try {
    auto config = biasline::cli::PipelineConfig::from_file(config_path);
    if (seed_set) {
      config.seed = seed;
      config.embedding.seed = seed;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (deterministic) {
      config.deterministic = true;
      config.threads = 1;
    } else if (!config.deterministic) {
      config.threads = std::max(config.threads, env_threads());
    }
    config.embedding.deterministic = config.deterministic;
    config.embedding.threads = config.threads;

    if (label->parsed()) {
      biasline::cli::cmd_label(config);
    } else if (validate->parsed()) {
      biasline::cli::cmd_validate(config);
    } else if (predict->parsed()) {
      biasline::cli::cmd_predict(config, protocol, train_forum, test_forum);
    } else if (forecast->parsed()) {
      biasline::cli::cmd_forecast(config);
    } else if (cascades->parsed()) {
      if (synthesize)
        biasline::cli::cmd_cascades_synthesize(config, synth_opts);
      else
        biasline::cli::cmd_cascades_export(config);
    } else if (tfidf->parsed()) {
      biasline::cli::cmd_tfidf(config);
    } else if (embed_train->parsed()) {
      biasline::cli::cmd_embed_train(config);
    }
  } catch (const biasline::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
