#include "biasline/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

#include "biasline/bias.hpp"
#include "biasline/cascade.hpp"
#include "biasline/corpus.hpp"
#include "biasline/embed.hpp"
#include "biasline/ml.hpp"
#include "biasline/textproc.hpp"
#include "biasline/tfidf.hpp"

namespace biasline::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const PipelineConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  const auto path = std::filesystem::path(config.out_dir) / name;
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct Inputs {
  std::vector<corpus::Speech> speeches;
  std::vector<std::pair<std::string, std::vector<corpus::Post>>> forums;
  textproc::StopwordSet stopwords;
  textproc::SentimentLexicon lexicon;
  textproc::EntityRules rules;
};

Inputs load_inputs(const PipelineConfig& config, bool need_speeches, bool need_posts) {
  std::vector<std::string> required = {"stopwords", "lexicon"};
  if (need_speeches) required.push_back("speeches");
  if (need_posts) required.push_back("posts");
  config.require(required);

  Inputs in;
  in.stopwords = textproc::load_stopwords(config.stopwords_path);
  in.lexicon = textproc::load_lexicon(config.lexicon_path, config.negators_path);
  in.rules.stopwords = in.stopwords;
  if (!config.gazetteer_path.empty())
    in.rules.gazetteer = textproc::load_gazetteer(config.gazetteer_path);

  const bool strict = !config.lenient_loading;
  auto report = [](const std::string& path, const auto& warnings) {
    for (const auto& w : warnings)
      std::cerr << "warning: " << path << " line " << w.line << ": " << w.message
                << '\n';
  };
  if (need_speeches) {
    auto loaded = corpus::load_speeches(config.speeches_path, strict);
    report(config.speeches_path, loaded.warnings);
    in.speeches = std::move(loaded.items);
  }
  if (need_posts) {
    for (const auto& [forum, path] : config.forum_posts) {
      auto loaded = corpus::load_posts(path, strict);
      report(path, loaded.warnings);
      in.forums.emplace_back(forum, std::move(loaded.items));
    }
  }
  return in;
}

std::vector<corpus::Post> all_posts(const Inputs& in) {
  std::vector<corpus::Post> posts;
  for (const auto& [forum, forum_posts] : in.forums)
    posts.insert(posts.end(), forum_posts.begin(), forum_posts.end());
  return posts;
}

tfidf::PartyTfidf build_weights(const Inputs& in, const PipelineConfig& config) {
  auto vocab =
      tfidf::build_vocab(all_posts(in), in.rules, config.entity_min_forum_freq);
  return tfidf::compute_party_tfidf(in.speeches, vocab, in.stopwords);
}

std::vector<textproc::TokenList> tokenize_posts(const std::vector<corpus::Post>& posts,
                                                const textproc::StopwordSet& stopwords) {
  std::vector<textproc::TokenList> docs;
  docs.reserve(posts.size());
  for (const auto& p : posts) docs.push_back(textproc::preprocess(p.text, stopwords));
  return docs;
}

std::vector<textproc::TokenList> tokenize_speeches(
    const std::vector<corpus::Speech>& speeches,
    const textproc::StopwordSet& stopwords) {
  std::vector<textproc::TokenList> docs;
  docs.reserve(speeches.size());
  for (const auto& s : speeches) docs.push_back(textproc::preprocess(s.text, stopwords));
  return docs;
}

std::vector<std::string> prediction_feature_names(std::size_t dim) {
  std::vector<std::string> names(textproc::StyleFeatures::names().begin(),
                                 textproc::StyleFeatures::names().end());
  for (std::size_t k = 0; k < dim; ++k) names.push_back("embed_" + std::to_string(k));
  return names;
}

void append_row(ml::Dataset& data, const textproc::StyleFeatures& style,
                const std::vector<double>& doc_vec, int label) {
  std::vector<double> row;
  row.reserve(data.cols);
  auto arr = style.as_array();
  row.insert(row.end(), arr.begin(), arr.end());
  row.insert(row.end(), doc_vec.begin(), doc_vec.end());
  data.add_row(row, label);
}

/// Training rows from transcripts: party is both the flag feature and the
/// label (Democrat 0, Republican 1).
ml::Dataset speech_dataset(const Inputs& in, const embed::EmbeddingModel& model) {
  auto data = ml::Dataset::with_features(prediction_feature_names(model.dim()));
  for (const auto& s : in.speeches) {
    auto style = textproc::style_features(s.text, in.lexicon);
    const int party = s.party == corpus::Party::Republican ? 1 : 0;
    style.party_flag = party;
    append_row(data, style, model.doc_vector(textproc::preprocess(s.text, in.stopwords)),
               party);
  }
  return data;
}

/// Post rows labeled by the Eq-style score; posts with no scoreable entity
/// are skipped (their gamma is a convention, not a label).
ml::Dataset post_dataset(const std::vector<corpus::Post>& posts, const Inputs& in,
                         const tfidf::PartyTfidf& weights,
                         const embed::EmbeddingModel& model,
                         const PipelineConfig& config) {
  auto data = ml::Dataset::with_features(prediction_feature_names(model.dim()));
  for (const auto& p : posts) {
    auto score = bias::bias_score(textproc::extract_entities(p.text, in.rules), weights,
                                  {config.normalize_bias});
    if (score.no_scoreable) continue;
    auto style = textproc::style_features(p.text, in.lexicon);  // party_flag stays 0
    append_row(data, style, model.doc_vector(textproc::preprocess(p.text, in.stopwords)),
               bias::binarize(score));
  }
  return data;
}

void write_metrics_table(const PipelineConfig& config, const std::string& filename,
                         const std::vector<ml::ProtocolRow>& rows) {
  auto out = open_out(config, filename);
  out << "metric";
  for (const auto& r : rows) out << '\t' << r.model;
  out << '\n';
  auto line = [&](const char* name, auto get) {
    out << name;
    for (const auto& r : rows) out << '\t' << get(r.metrics);
    out << '\n';
  };
  line("Accuracy", [](const ml::Metrics& m) { return fmt(m.accuracy); });
  line("Precision", [](const ml::Metrics& m) { return fmt(m.precision); });
  line("Recall", [](const ml::Metrics& m) { return fmt(m.recall); });
  line("FScore", [](const ml::Metrics& m) { return fmt(m.f_score); });
  line("ROC", [](const ml::Metrics& m) {
    return m.auroc ? fmt(*m.auroc) : std::string("n/a");
  });
}

nlohmann::json metrics_json(const ml::Metrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f_score"] = m.f_score;
  if (m.auroc) j["auroc"] = *m.auroc;
  return j;
}

std::pair<ml::Dataset, ml::Dataset> split_dataset(const ml::Dataset& data,
                                                  double test_fraction,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> idx(data.rows);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_test = static_cast<std::size_t>(
      std::round(static_cast<double>(data.rows) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, data.rows - 1);

  auto train = ml::Dataset::with_features(data.feature_names);
  auto test = ml::Dataset::with_features(data.feature_names);
  for (std::size_t i = 0; i < idx.size(); ++i)
    (i < n_test ? test : train).add_row(data.row(idx[i]), data.y[idx[i]]);
  return {std::move(train), std::move(test)};
}

}  // namespace

void cmd_label(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);
  auto weights = build_weights(in, config);

  auto summary_out = open_out(config, "bias_summary.tsv");
  summary_out << "forum\tposts\tunscored\tsum\tmean\tmedian\n";
  for (const auto& [forum, posts] : in.forums) {
    auto labels_out = open_out(config, "labels_" + forum + ".tsv");
    std::vector<bias::BiasScore> scores;
    scores.reserve(posts.size());
    std::size_t unscored = 0;
    for (const auto& p : posts) {
      auto score = bias::bias_score(textproc::extract_entities(p.text, in.rules),
                                    weights, {config.normalize_bias});
      labels_out << p.id << '\t' << fmt(score.gamma) << '\t' << bias::binarize(score)
                 << '\t' << score.n_entities << '\n';
      unscored += score.no_scoreable;
      scores.push_back(std::move(score));
    }
    if (!scores.empty()) {
      auto s = bias::corpus_summary(scores);
      summary_out << forum << '\t' << scores.size() << '\t' << unscored << '\t'
                  << fmt(s.sum) << '\t' << fmt(s.mean) << '\t' << fmt(s.median) << '\n';
    } else {
      summary_out << forum << "\t0\t0\tn/a\tn/a\tn/a\n";
    }
  }

  auto per_day_out = open_out(config, "posts_per_day.csv");
  per_day_out << "forum,date,count\n";
  for (const auto& [forum, posts] : in.forums)
    for (const auto& [date, count] : corpus::posts_per_day(posts))
      per_day_out << forum << ',' << date << ',' << count << '\n';

  if (!config.media_bias_path.empty()) {
    auto table = corpus::load_media_bias(config.media_bias_path);
    auto hist_out = open_out(config, "media_bias_histogram.csv");
    hist_out << "forum,bucket,count\n";
    for (const auto& [forum, posts] : in.forums)
      for (const auto& [bucket, count] : corpus::media_bias_histogram(posts, table))
        hist_out << forum << ',' << corpus::to_string(bucket) << ',' << count << '\n';
  }
}

void cmd_validate(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);

  std::vector<std::pair<std::string, std::vector<textproc::TokenList>>> corpora;
  std::vector<textproc::TokenList> dem, rep;
  for (const auto& s : in.speeches)
    (s.party == corpus::Party::Democrat ? dem : rep)
        .push_back(textproc::preprocess(s.text, in.stopwords));
  corpora.emplace_back("democrat", std::move(dem));
  corpora.emplace_back("republican", std::move(rep));
  for (const auto& [forum, posts] : in.forums)
    corpora.emplace_back(forum, tokenize_posts(posts, in.stopwords));

  std::vector<textproc::TokenList> training;
  for (const auto& [name, docs] : corpora)
    training.insert(training.end(), docs.begin(), docs.end());
  auto model = embed::train_embeddings(training, config.embedding);

  auto report = embed::similarity_report(model, corpora);
  auto out = open_out(config, "similarity_matrix.tsv");
  out << "corpus";
  for (const auto& name : report.names) out << '\t' << name;
  out << '\n';
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    out << report.names[i];
    for (double v : report.matrix[i]) out << '\t' << fmt(v);
    out << '\n';
  }
}

void cmd_predict(const PipelineConfig& config, const std::string& protocol,
                 const std::string& train_forum, const std::string& test_forum) {
  Inputs in = load_inputs(config, true, true);
  auto weights = build_weights(in, config);

  auto records_out = open_out(config, "metrics_predict.jsonl");
  auto run_one = [&](const std::string& train_name, const ml::Dataset& train,
                     const std::string& test_name, const ml::Dataset& test) {
    auto rows = ml::transfer_protocol(train, test, config.predict_models);
    write_metrics_table(config, "metrics_" + train_name + "_to_" + test_name + ".tsv",
                        rows);
    for (const auto& r : rows) {
      nlohmann::json j = metrics_json(r.metrics);
      j["train"] = train_name;
      j["test"] = test_name;
      j["model"] = r.model;
      records_out << j.dump() << '\n';
    }
  };

  auto forum_posts = [&](const std::string& name) -> const std::vector<corpus::Post>& {
    for (const auto& [forum, posts] : in.forums)
      if (forum == name) return posts;
    throw ConfigError("predict: forum \"" + name + "\" is not configured");
  };

  if (protocol == "transcripts") {
    auto model =
        embed::train_embeddings(tokenize_speeches(in.speeches, in.stopwords),
                                config.embedding);
    auto train = speech_dataset(in, model);
    for (const auto& [forum, posts] : in.forums)
      run_one("transcripts", train, forum,
              post_dataset(posts, in, weights, model, config));
  } else if (protocol == "cross") {
    std::vector<std::pair<std::string, std::string>> directions;
    if (!train_forum.empty() && !test_forum.empty()) {
      directions.emplace_back(train_forum, test_forum);
    } else {
      if (in.forums.size() < 2)
        throw ConfigError("predict --protocol cross needs two configured forums");
      directions.emplace_back(in.forums[0].first, in.forums[1].first);
      directions.emplace_back(in.forums[1].first, in.forums[0].first);
    }
    for (const auto& [a, b] : directions) {
      const auto& train_posts = forum_posts(a);
      auto model = embed::train_embeddings(tokenize_posts(train_posts, in.stopwords),
                                           config.embedding);
      run_one(a, post_dataset(train_posts, in, weights, model, config), b,
              post_dataset(forum_posts(b), in, weights, model, config));
    }
  } else {
    throw ConfigError("predict: unknown protocol \"" + protocol +
                      "\" (expected transcripts|cross)");
  }
}

namespace {

struct AnnotatedCascades {
  std::vector<cascade::Cascade> cascades;
  embed::EmbeddingModel model;
  tfidf::PartyTfidf weights;
  std::size_t built{0};
  std::size_t rejected_edges{0};
};

AnnotatedCascades prepare_cascades(const Inputs& in, const PipelineConfig& config,
                                   const std::vector<corpus::Post>& posts,
                                   std::size_t min_levels) {
  AnnotatedCascades out;
  out.weights = build_weights(in, config);
  out.model =
      embed::train_embeddings(tokenize_posts(posts, in.stopwords), config.embedding);

  auto built = cascade::build_cascades(posts);
  out.built = built.cascades.size();
  out.rejected_edges = built.warnings.size();
  out.cascades = cascade::filter_min_levels(std::move(built.cascades), min_levels);

  cascade::AnnotateContext ctx;
  ctx.lexicon = &in.lexicon;
  ctx.rules = &in.rules;
  ctx.model = &out.model;
  ctx.weights = &out.weights;
  ctx.bias_options = {config.normalize_bias};
  for (auto& c : out.cascades) cascade::annotate(c, ctx);
  return out;
}

}  // namespace

void cmd_forecast(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);
  const std::vector<corpus::Post>* posts = nullptr;
  for (const auto& [forum, forum_posts] : in.forums)
    if (forum == config.forecast_forum) posts = &forum_posts;
  if (!posts)
    throw ConfigError("forecast: forum \"" + config.forecast_forum +
                      "\" is not configured");

  auto prepared = prepare_cascades(in, config, *posts, config.forecast.min_levels);

  auto table_out = open_out(config, "forecast_accuracy.tsv");
  auto records_out = open_out(config, "forecast_metrics.jsonl");
  table_out << "# cascades built=" << prepared.built
            << " kept=" << prepared.cascades.size()
            << " rejected_edges=" << prepared.rejected_edges << '\n';
  table_out << "feature_set";
  for (const auto& spec : config.forecast_models) table_out << '\t' << spec.name();
  table_out << '\n';

  for (auto set : {cascade::FeatureSet::Engineered, cascade::FeatureSet::Text,
                   cascade::FeatureSet::Combined}) {
    auto assembled =
        cascade::assemble_forecast_dataset(prepared.cascades, config.forecast, set);
    auto [train, test] =
        split_dataset(assembled.dataset, config.forecast_test_fraction, config.seed);
    table_out << cascade::to_string(set);
    for (const auto& spec : config.forecast_models) {
      auto model = ml::fit(spec, train);
      auto metrics = ml::evaluate(test.y, model.predict_proba(test));
      table_out << '\t' << fmt(metrics.accuracy);
      nlohmann::json j = metrics_json(metrics);
      j["feature_set"] = cascade::to_string(set);
      j["model"] = spec.name();
      j["rows"] = assembled.dataset.rows;
      j["excluded"] = assembled.excluded;
      records_out << j.dump() << '\n';
    }
    table_out << '\n';
  }
}

void cmd_cascades_export(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);
  auto prepared = prepare_cascades(in, config, all_posts(in), 1);

  auto out = open_out(config, "cascades.tsv");
  out << "root_id\tforum\tsize\tlevels\torphan\ttheta_per_level\n";
  for (const auto& c : prepared.cascades) {
    out << c.root_id << '\t' << c.nodes[0].post.forum.name << '\t' << c.nodes.size()
        << '\t' << c.level_count() << '\t' << (c.orphan_root ? 1 : 0) << '\t';
    for (std::size_t level = 1; level <= c.level_count(); ++level) {
      if (level > 1) out << ',';
      out << fmt(cascade::theta(c, level).theta);
    }
    out << '\n';
  }
}

void cmd_cascades_synthesize(const PipelineConfig& config,
                             const SynthesizeOptions& opts) {
  cascade::SyntheticConfig synth;
  synth.cascades = opts.cascades;
  synth.shift_fraction = opts.shift_fraction;
  synth.noise_fraction = opts.noise_fraction;
  synth.seed = opts.seed;
  synth.train_levels = config.forecast.train_levels;
  synth.min_levels = config.forecast.min_levels;
  auto generated = cascade::generate_synthetic_cascades(synth);

  auto speeches_out = open_out(config, "synthetic_speeches.jsonl");
  for (const auto& s : generated.speeches) speeches_out << corpus::to_jsonl(s) << '\n';
  auto posts_out = open_out(config, "synthetic_posts.jsonl");
  for (const auto& p : generated.posts) posts_out << corpus::to_jsonl(p) << '\n';
  auto planted_out = open_out(config, "synthetic_planted.tsv");
  planted_out << "cascade\tplanted_shift\n";
  for (std::size_t i = 0; i < generated.planted_shift.size(); ++i)
    planted_out << i << '\t' << generated.planted_shift[i] << '\n';
}

void cmd_tfidf(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);
  auto weights = build_weights(in, config);
  auto out = open_out(config, "tfidf.tsv");
  tfidf::export_tsv(weights, out);
}

void cmd_embed_train(const PipelineConfig& config) {
  Inputs in = load_inputs(config, true, true);
  auto docs = tokenize_speeches(in.speeches, in.stopwords);
  for (const auto& [forum, posts] : in.forums) {
    auto post_docs = tokenize_posts(posts, in.stopwords);
    docs.insert(docs.end(), post_docs.begin(), post_docs.end());
  }
  auto model = embed::train_embeddings(docs, config.embedding);
  std::filesystem::create_directories(config.out_dir);
  model.save((std::filesystem::path(config.out_dir) / "model.bin").string());
  auto losses = open_out(config, "embed_losses.tsv");
  losses << "epoch\tmean_loss\n";
  for (std::size_t e = 0; e < model.epoch_losses().size(); ++e)
    losses << e << '\t' << fmt(model.epoch_losses()[e]) << '\n';
}

}  // namespace biasline::cli
