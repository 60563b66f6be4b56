#pragma once

#include <string>

#include "biasline/config.hpp"

namespace biasline::cli {

/// Pipeline subcommands. All of them read only the configured inputs, write
/// under config.out_dir, and are byte-reproducible for a fixed seed in
/// deterministic mode. Errors propagate as exceptions (ConfigError -> exit 2,
/// anything else -> exit 1 in the binary).

/// textproc -> tfidf -> bias over every configured forum. Writes
/// labels_<forum>.tsv, bias_summary.tsv, posts_per_day.csv and, when a media
/// bias table is configured, media_bias_histogram.csv.
void cmd_label(const PipelineConfig& config);

/// Trains embeddings over speeches + posts and writes the pairwise centroid
/// cosine matrix (parties x forums) to similarity_matrix.tsv.
void cmd_validate(const PipelineConfig& config);

/// Transfer experiments. protocol "transcripts": train on speeches, test on
/// each forum. protocol "cross": train on train_forum posts, test on
/// test_forum posts (defaults: both directions of the first two forums).
/// Writes metrics_<train>_to_<test>.tsv plus metrics.jsonl records.
void cmd_predict(const PipelineConfig& config, const std::string& protocol,
                 const std::string& train_forum = "", const std::string& test_forum = "");

/// Cascade bias-shift forecasting on the configured forum: engineered / text /
/// combined feature sets, four models each. Writes forecast_accuracy.tsv and
/// forecast_metrics.jsonl.
void cmd_forecast(const PipelineConfig& config);

/// Writes one record per built cascade (root id, size, levels, theta per
/// level) to cascades.tsv.
void cmd_cascades_export(const PipelineConfig& config);

struct SynthesizeOptions {
  std::size_t cascades{2000};
  double shift_fraction{0.5};
  double noise_fraction{0.05};
  std::uint64_t seed{7};
};

/// Generates the planted-rule synthetic corpus and writes
/// synthetic_speeches.jsonl, synthetic_posts.jsonl and
/// synthetic_planted.tsv under out_dir.
void cmd_cascades_synthesize(const PipelineConfig& config, const SynthesizeOptions& opts);

/// Writes the party TF-IDF snapshot (entity, tf_d, tf_r, idf) to tfidf.tsv.
void cmd_tfidf(const PipelineConfig& config);

/// Trains embeddings over speeches + posts and persists them to model.bin.
void cmd_embed_train(const PipelineConfig& config);

}  // namespace biasline::cli
