#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biasline/cascade.hpp"
#include "biasline/embed.hpp"
#include "biasline/ml.hpp"

namespace biasline::cli {

/// Bad or incomplete configuration / usage: exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON manifest drives every subcommand; flags override scalars.
struct PipelineConfig {
  std::uint64_t seed{42};
  bool deterministic{true};
  std::size_t threads{1};
  std::string out_dir{"out"};
  bool lenient_loading{false};  // skip malformed input lines with a warning

  std::string speeches_path;
  std::vector<std::pair<std::string, std::string>> forum_posts;  // (forum, path)
  std::string stopwords_path;
  std::string lexicon_path;
  std::string negators_path;   // optional
  std::string gazetteer_path;  // optional
  std::string media_bias_path;  // optional

  std::size_t entity_min_forum_freq{100};
  bool normalize_bias{true};
  embed::EmbeddingConfig embedding;
  std::vector<ml::ModelSpec> predict_models;   // default roster: RF MLP DT LR
  std::vector<ml::ModelSpec> forecast_models;  // default roster: RF AdaBoost MLP QDA
  cascade::ForecastConfig forecast;
  double forecast_test_fraction{0.3};
  std::string forecast_forum{"gab"};

  static PipelineConfig from_file(const std::string& path);

  /// Throws ConfigError when a referenced path is configured but missing on
  /// disk, or a required one is absent. `required` lists logical names:
  /// speeches, posts, stopwords, lexicon.
  void require(const std::vector<std::string>& required) const;
};

std::vector<ml::ModelSpec> default_predict_models(std::uint64_t seed);
std::vector<ml::ModelSpec> default_forecast_models(std::uint64_t seed);

}  // namespace biasline::cli
