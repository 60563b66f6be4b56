#include "biasline/config.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace biasline::cli {

using nlohmann::json;

namespace {

ml::ModelSpec parse_model_spec(const json& j, std::uint64_t default_seed) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("model spec: missing 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  auto num = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    return j.contains(key) ? j[key].get<T>() : fallback;
  };

  ml::ModelSpec spec;
  spec.seed = num("seed", default_seed);
  if (kind == "LR") {
    ml::LogisticRegressionParams p;
    p.epochs = num("epochs", p.epochs);
    p.learning_rate = num("learning_rate", p.learning_rate);
    p.l2 = num("l2", p.l2);
    spec.params = p;
  } else if (kind == "DT") {
    ml::DecisionTreeParams p;
    p.max_depth = num("max_depth", p.max_depth);
    p.min_samples_leaf = num("min_samples_leaf", p.min_samples_leaf);
    spec.params = p;
  } else if (kind == "RF") {
    ml::RandomForestParams p;
    p.n_trees = num("n_trees", p.n_trees);
    p.max_depth = num("max_depth", p.max_depth);
    p.min_samples_leaf = num("min_samples_leaf", p.min_samples_leaf);
    p.bootstrap = num("bootstrap", p.bootstrap);
    if (j.contains("feature_sampling"))
      p.feature_sampling = j["feature_sampling"].get<std::string>() == "all"
                               ? ml::FeatureSampling::All
                               : ml::FeatureSampling::Sqrt;
    spec.params = p;
  } else if (kind == "MLP") {
    ml::MlpParams p;
    p.hidden = num("hidden", p.hidden);
    p.epochs = num("epochs", p.epochs);
    p.learning_rate = num("learning_rate", p.learning_rate);
    p.l2 = num("l2", p.l2);
    spec.params = p;
  } else if (kind == "AdaBoost") {
    ml::AdaBoostParams p;
    p.rounds = num("rounds", p.rounds);
    spec.params = p;
  } else if (kind == "QDA") {
    ml::QdaParams p;
    p.ridge = num("ridge", p.ridge);
    spec.params = p;
  } else {
    throw ConfigError("model spec: unknown kind \"" + kind + "\"");
  }
  return spec;
}

}  // namespace

std::vector<ml::ModelSpec> default_predict_models(std::uint64_t seed) {
  return {{ml::RandomForestParams{}, seed},
          {ml::MlpParams{}, seed},
          {ml::DecisionTreeParams{}, seed},
          {ml::LogisticRegressionParams{}, seed}};
}

std::vector<ml::ModelSpec> default_forecast_models(std::uint64_t seed) {
  return {{ml::RandomForestParams{}, seed},
          {ml::AdaBoostParams{}, seed},
          {ml::MlpParams{}, seed},
          {ml::QdaParams{}, seed}};
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }

  PipelineConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.deterministic = j.value("deterministic", cfg.deterministic);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.lenient_loading = j.value("lenient_loading", cfg.lenient_loading);
  cfg.entity_min_forum_freq = j.value("entity_min_forum_freq", cfg.entity_min_forum_freq);
  cfg.normalize_bias = j.value("normalize_bias", cfg.normalize_bias);

  // Paths are resolved relative to the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };
  if (j.contains("paths")) {
    const auto& paths = j["paths"];
    cfg.speeches_path = resolve(paths.value("speeches", ""));
    cfg.stopwords_path = resolve(paths.value("stopwords", ""));
    cfg.lexicon_path = resolve(paths.value("sentiment_lexicon", ""));
    cfg.negators_path = resolve(paths.value("negators", ""));
    cfg.gazetteer_path = resolve(paths.value("gazetteer", ""));
    cfg.media_bias_path = resolve(paths.value("media_bias", ""));
    if (paths.contains("posts")) {
      if (!paths["posts"].is_object())
        throw ConfigError("config: paths.posts must map forum -> file");
      for (auto it = paths["posts"].begin(); it != paths["posts"].end(); ++it)
        cfg.forum_posts.emplace_back(it.key(), resolve(it.value().get<std::string>()));
    }
  }

  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    auto& emb = cfg.embedding;
    emb.dim = e.value("dim", emb.dim);
    emb.window = e.value("window", emb.window);
    emb.negatives = e.value("negatives", emb.negatives);
    emb.epochs = e.value("epochs", emb.epochs);
    emb.learning_rate = e.value("learning_rate", emb.learning_rate);
    emb.min_count = e.value("min_count", emb.min_count);
    emb.minn = e.value("minn", emb.minn);
    emb.maxn = e.value("maxn", emb.maxn);
    emb.bucket_count = e.value("bucket_count", emb.bucket_count);
  }
  cfg.embedding.seed = cfg.seed;
  cfg.embedding.deterministic = cfg.deterministic;
  cfg.embedding.threads = cfg.threads;

  if (j.contains("predict_models"))
    for (const auto& m : j["predict_models"])
      cfg.predict_models.push_back(parse_model_spec(m, cfg.seed));
  else
    cfg.predict_models = default_predict_models(cfg.seed);
  if (j.contains("forecast_models"))
    for (const auto& m : j["forecast_models"])
      cfg.forecast_models.push_back(parse_model_spec(m, cfg.seed));
  else
    cfg.forecast_models = default_forecast_models(cfg.seed);

  if (j.contains("forecast")) {
    const auto& f = j["forecast"];
    cfg.forecast.min_levels = f.value("min_levels", cfg.forecast.min_levels);
    cfg.forecast.train_levels = f.value("train_levels", cfg.forecast.train_levels);
    cfg.forecast.shift_epsilon = f.value("shift_epsilon", cfg.forecast.shift_epsilon);
    cfg.forecast_test_fraction = f.value("test_fraction", cfg.forecast_test_fraction);
    cfg.forecast_forum = f.value("forum", cfg.forecast_forum);
  }

  if (cfg.entity_min_forum_freq < 1)
    throw ConfigError("config: entity_min_forum_freq must be >= 1");
  try {
    cfg.forecast.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: forecast: ") + e.what());
  }
  return cfg;
}

void PipelineConfig::require(const std::vector<std::string>& required) const {
  auto check_file = [](const std::string& logical, const std::string& p) {
    if (p.empty())
      throw ConfigError("config: missing required path '" + logical + "'");
    if (!std::filesystem::exists(p))
      throw ConfigError("config: " + logical + " file not found: " + p);
  };
  for (const auto& name : required) {
    if (name == "speeches") {
      check_file("speeches", speeches_path);
    } else if (name == "stopwords") {
      check_file("stopwords", stopwords_path);
    } else if (name == "lexicon") {
      check_file("sentiment_lexicon", lexicon_path);
    } else if (name == "posts") {
      if (forum_posts.empty())
        throw ConfigError("config: at least one forum posts file is required");
      for (const auto& [forum, p] : forum_posts) check_file("posts." + forum, p);
    }
  }
  // Optional paths must exist when configured.
  for (const auto& [logical, p] :
       std::vector<std::pair<std::string, std::string>>{{"negators", negators_path},
                                                        {"gazetteer", gazetteer_path},
                                                        {"media_bias", media_bias_path}}) {
    if (!p.empty() && !std::filesystem::exists(p))
      throw ConfigError("config: " + logical + " file not found: " + p);
  }
}

}  // namespace biasline::cli
