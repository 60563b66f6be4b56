// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Criterion 10 drives the real CLI binary (--cli PATH).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biasline/bias.hpp"
#include "biasline/cascade.hpp"
#include "biasline/cli.hpp"
#include "biasline/corpus.hpp"
#include "biasline/embed.hpp"
#include "biasline/ml.hpp"
#include "biasline/textproc.hpp"
#include "biasline/tfidf.hpp"

using namespace biasline;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = BIASLINE_FIXTURE_DIR;

struct Checker {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void within(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol)) {
      std::ostringstream msg;
      msg << what << " (actual " << actual << ", expected " << expected << " +- "
          << tol << ")";
      failures.push_back(msg.str());
    }
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing: " + path.string() + ">";
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// criterion 1: Eq-style score against a fully hand-computed oracle
// ---------------------------------------------------------------------------

void criterion_1(Checker& check) {
  const auto start = std::chrono::steady_clock::now();

  auto speeches = corpus::load_speeches(kFixtures + "/speeches.jsonl").items;
  auto posts = corpus::load_posts(kFixtures + "/posts.jsonl").items;
  textproc::EntityRules rules;
  rules.stopwords = textproc::load_stopwords(kFixtures + "/stopwords.txt");
  auto vocab = tfidf::build_vocab(posts, rules, 1);
  check.require(vocab.size() == 6, "fixture vocabulary should hold 6 entities");
  auto weights = tfidf::compute_party_tfidf(speeches, vocab, rules.stopwords);

  // Hand-tallied fixture table (4 speeches, totals 5 democrat / 7 republican):
  //   entity      count_d  count_r  df
  //   taxes          2        1      3
  //   healthcare     2        0      2
  //   education      1        0      1
  //   guns           0        2      2
  //   border         0        3      2
  //   freedom        0        1      1
  std::map<std::string, std::array<double, 3>> table = {
      {"taxes", {2, 1, 3}},  {"healthcare", {2, 0, 2}}, {"education", {1, 0, 1}},
      {"guns", {0, 2, 2}},   {"border", {0, 3, 2}},     {"freedom", {0, 1, 1}}};
  auto hand_weight = [&](const std::string& entity, bool democrat) {
    const auto& row = table.at(entity);
    const double idf = std::log(5.0 / (1.0 + row[2])) + 1.0;
    return (democrat ? row[0] / 5.0 : row[1] / 7.0) * idf;
  };
  auto hand_gamma = [&](const textproc::EntitySet& entities) {
    double sum = 0;
    int n = 0;
    for (const auto& e : entities) {
      if (!table.count(e)) continue;
      const double d = hand_weight(e, true), r = hand_weight(e, false);
      if (d + r <= 0) continue;
      sum += (r - d) / (r + d);
      ++n;
    }
    return n == 0 ? 0.0 : sum / n;
  };

  // Hand-annotated entity sets of the 10 fixture posts.
  const std::vector<textproc::EntitySet> hand_entities = {
      {"taxes", "healthcare"}, {"guns", "border"},      {"freedom", "taxes"},
      {"education", "healthcare"}, {"taxes"},           {"border", "guns"},
      {"healthcare", "taxes"}, {"freedom", "border"},   {"education"},
      {"taxes", "guns"}};
  check.require(posts.size() == 10, "fixture should hold 10 posts");
  for (std::size_t i = 0; i < posts.size(); ++i) {
    auto extracted = textproc::extract_entities(posts[i].text, rules);
    check.require(extracted == hand_entities[i],
                  "entity extraction disagrees with hand annotation on post " +
                      posts[i].id);
    auto score = bias::bias_score(extracted, weights);
    check.within(score.gamma, hand_gamma(hand_entities[i]), 1e-12,
                 "gamma oracle mismatch on post " + posts[i].id);
  }

  // 10,000 fuzzed weight maps: normalized gamma stays in [-1, 1].
  std::mt19937_64 rng(1234);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 10000; ++trial) {
    tfidf::PartyTfidf fuzzed;
    textproc::EntitySet entities;
    for (int e = 0; e < 8; ++e) {
      const std::string name = "e" + std::to_string(e);
      if (unit() < 0.75) entities.insert(name);
      if (unit() < 0.8) fuzzed.tf_d[name] = unit() * 100.0;
      if (unit() < 0.8) fuzzed.tf_r[name] = unit() * 100.0;
    }
    const double gamma = bias::bias_score(entities, fuzzed).gamma;
    if (gamma < -1.0 || gamma > 1.0) {
      check.require(false, "fuzzed gamma escaped [-1, 1]");
      break;
    }
  }

  check.require(elapsed_seconds(start) < 1.0, "criterion 1 exceeded 1 s");
}

// ---------------------------------------------------------------------------
// criterion 2: binarization boundary
// ---------------------------------------------------------------------------

void criterion_2(Checker& check) {
  const double eps = 1e-12;
  const std::vector<std::pair<double, int>> cases = {
      {-1.0, 0}, {-eps, 0}, {0.0, 0}, {eps, 1}, {1.0, 1}};
  for (const auto& [gamma, expected] : cases) {
    bias::BiasScore score;
    score.gamma = gamma;
    score.n_entities = 1;
    check.require(bias::binarize(score) == expected,
                  "binarize(" + std::to_string(gamma) + ") != " +
                      std::to_string(expected));
  }
}

// ---------------------------------------------------------------------------
// criterion 3: TF-IDF hand oracle + bitwise symmetry
// ---------------------------------------------------------------------------

void criterion_3(Checker& check) {
  auto speeches = corpus::load_speeches(kFixtures + "/speeches.jsonl").items;
  auto posts = corpus::load_posts(kFixtures + "/posts.jsonl").items;
  textproc::EntityRules rules;
  rules.stopwords = textproc::load_stopwords(kFixtures + "/stopwords.txt");
  auto vocab = tfidf::build_vocab(posts, rules, 1);
  auto weights = tfidf::compute_party_tfidf(speeches, vocab, rules.stopwords);

  auto idf = [](double df) { return std::log(5.0 / (1.0 + df)) + 1.0; };
  const std::vector<std::tuple<std::string, double, double>> expected = {
      {"taxes", 2.0 / 5 * idf(3), 1.0 / 7 * idf(3)},
      {"healthcare", 2.0 / 5 * idf(2), 0.0},
      {"education", 1.0 / 5 * idf(1), 0.0},
      {"guns", 0.0, 2.0 / 7 * idf(2)},
      {"border", 0.0, 3.0 / 7 * idf(2)},
      {"freedom", 0.0, 1.0 / 7 * idf(1)}};
  for (const auto& [entity, d, r] : expected) {
    check.within(weights.weight_d(entity), d, 1e-9, "tf_d(" + entity + ")");
    check.within(weights.weight_r(entity), r, 1e-9, "tf_r(" + entity + ")");
  }

  // identical party corpora -> bitwise-equal weight maps
  std::vector<corpus::Speech> mirrored;
  for (int i = 0; i < 3; ++i) {
    mirrored.push_back({"d" + std::to_string(i), corpus::Party::Democrat,
                        "taxes border guns healthcare taxes border", {}});
    mirrored.push_back({"r" + std::to_string(i), corpus::Party::Republican,
                        "taxes border guns healthcare taxes border", {}});
  }
  auto sym = tfidf::compute_party_tfidf(mirrored, vocab, rules.stopwords);
  for (const auto& [entity, id] : vocab.ids) {
    const double d = sym.weight_d(entity), r = sym.weight_r(entity);
    check.require(std::memcmp(&d, &r, sizeof(double)) == 0,
                  "symmetry not bitwise for " + entity);
  }
}

// ---------------------------------------------------------------------------
// criterion 4: directional label + similarity analog on synthetic forums
// ---------------------------------------------------------------------------

void criterion_4(Checker& check) {
  const auto start = std::chrono::steady_clock::now();

  const std::vector<std::string> dem_pool = {"medicare", "climate", "unions",
                                             "tuition",  "equity",  "welfare"};
  const std::vector<std::string> rep_pool = {"tariffs", "guns",    "borders",
                                             "veterans", "liberty", "ranchers"};
  std::mt19937_64 rng(77);
  auto sentence = [&](const std::vector<std::string>& pool, bool capitalize) {
    std::ostringstream out;
    out << "people discuss ";
    for (int w = 0; w < 3; ++w) {
      std::string word = pool[rng() % pool.size()];
      if (capitalize) word[0] = static_cast<char>(std::toupper(word[0]));
      out << word << ' ';
    }
    out << "often";
    return out.str();
  };

  std::vector<corpus::Speech> speeches;
  for (int i = 0; i < 10; ++i) {
    std::string dem_text, rep_text;
    for (int s = 0; s < 8; ++s) {
      dem_text += sentence(dem_pool, false) + ". ";
      rep_text += sentence(rep_pool, false) + ". ";
    }
    speeches.push_back({"d" + std::to_string(i), corpus::Party::Democrat, dem_text, {}});
    speeches.push_back({"r" + std::to_string(i), corpus::Party::Republican, rep_text, {}});
  }
  std::vector<corpus::Post> posts;
  auto add_posts = [&](const std::string& forum, const std::vector<std::string>& pool) {
    for (int i = 0; i < 100; ++i) {
      corpus::Post p;
      p.id = forum + std::to_string(i);
      p.forum = corpus::Forum::other(forum);
      p.author = "u";
      p.timestamp = 1000 + i;
      p.text = sentence(pool, true);  // capitalized mid-sentence: entities
      posts.push_back(std::move(p));
    }
  };
  add_posts("leftforum", dem_pool);
  add_posts("rightforum", rep_pool);

  textproc::EntityRules rules;
  rules.stopwords = {"people", "discuss", "often", "the", "and"};
  auto vocab = tfidf::build_vocab(posts, rules, 1);
  auto weights = tfidf::compute_party_tfidf(speeches, vocab, rules.stopwords);

  double left_mean = 0, right_mean = 0;
  std::size_t left_n = 0, right_n = 0;
  for (const auto& p : posts) {
    const double gamma =
        bias::bias_score(textproc::extract_entities(p.text, rules), weights).gamma;
    if (p.forum.name == "leftforum") {
      left_mean += gamma;
      ++left_n;
    } else {
      right_mean += gamma;
      ++right_n;
    }
  }
  left_mean /= static_cast<double>(left_n);
  right_mean /= static_cast<double>(right_n);
  check.require(left_mean < 0, "left forum mean gamma should be negative");
  check.require(right_mean > 0, "right forum mean gamma should be positive");

  // similarity analog: each forum centroid aligns with its own party
  std::vector<textproc::TokenList> dem_docs, rep_docs, left_docs, right_docs, all;
  for (const auto& s : speeches) {
    auto doc = textproc::preprocess(s.text, rules.stopwords);
    (s.party == corpus::Party::Democrat ? dem_docs : rep_docs).push_back(doc);
  }
  for (const auto& p : posts) {
    auto doc = textproc::preprocess(p.text, rules.stopwords);
    (p.forum.name == "leftforum" ? left_docs : right_docs).push_back(doc);
  }
  for (const auto* group : {&dem_docs, &rep_docs, &left_docs, &right_docs})
    all.insert(all.end(), group->begin(), group->end());

  embed::EmbeddingConfig cfg;
  cfg.dim = 24;
  cfg.epochs = 3;
  cfg.min_count = 1;
  cfg.bucket_count = 1u << 12;
  cfg.seed = 7;
  auto model = embed::train_embeddings(all, cfg);
  auto report = embed::similarity_report(model, {{"democrat", dem_docs},
                                                 {"republican", rep_docs},
                                                 {"leftforum", left_docs},
                                                 {"rightforum", right_docs}});
  const auto& m = report.matrix;  // order: dem, rep, left, right
  check.require(m[2][0] > m[2][1],
                "left forum centroid should sit closer to the democrat centroid");
  check.require(m[3][1] > m[3][0],
                "right forum centroid should sit closer to the republican centroid");

  check.require(elapsed_seconds(start) < 120.0, "criterion 4 exceeded 2 min");
}

// ---------------------------------------------------------------------------
// criterion 5: embedding numerics
// ---------------------------------------------------------------------------

void criterion_5(Checker& check) {
  // gradient of the negative-sampling loss vs central finite differences
  using embed::detail::Parameters;
  using embed::detail::Triple;
  const std::size_t dim = 6, vocab = 5, buckets = 9;
  Parameters params;
  params.dim = dim;
  std::mt19937_64 rng(13);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
  params.word_in.resize(vocab * dim);
  params.bucket_in.resize(buckets * dim);
  params.word_out.resize(vocab * dim);
  for (auto* arr : {&params.word_in, &params.bucket_in, &params.word_out})
    for (auto& x : *arr) x = unit();
  std::vector<std::vector<std::size_t>> grams = {{0, 1}, {2}, {3, 4}, {5, 6}, {7, 8}};
  std::vector<Triple> triples = {
      {0, 1, {2, 3}}, {1, 2, {4}}, {2, 0, {1, 3}}, {3, 4, {0}}, {4, 3, {1, 2}}};
  Parameters grad;
  grad.dim = dim;
  grad.word_in.assign(vocab * dim, 0.0);
  grad.bucket_in.assign(buckets * dim, 0.0);
  grad.word_out.assign(vocab * dim, 0.0);
  embed::detail::ns_loss_grad(params, grams, triples, grad);

  const double h = 1e-6;
  double worst = 0;
  auto block = [&](std::vector<double> Parameters::* member) {
    auto& values = params.*member;
    const auto& grads = grad.*member;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = embed::detail::ns_loss(params, grams, triples);
      values[i] = saved - h;
      const double down = embed::detail::ns_loss(params, grams, triples);
      values[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grads[i]), 1e-8});
      worst = std::max(worst, std::abs(fd - grads[i]) / scale);
    }
  };
  block(&Parameters::word_in);
  block(&Parameters::bucket_in);
  block(&Parameters::word_out);
  check.require(worst < 1e-4, "NS gradient relative error >= 1e-4");

  // deterministic retrain is bit-identical; OOV composition is nonzero
  std::vector<textproc::TokenList> docs;
  std::mt19937_64 corpus_rng(5);
  const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta", "epsilon"};
  for (int s = 0; s < 60; ++s) {
    textproc::TokenList doc;
    for (int w = 0; w < 5; ++w) doc.push_back(pool[corpus_rng() % pool.size()]);
    docs.push_back(std::move(doc));
  }
  embed::EmbeddingConfig cfg;
  cfg.dim = 12;
  cfg.epochs = 3;
  cfg.min_count = 1;
  cfg.bucket_count = 1u << 10;
  cfg.seed = 21;
  auto m1 = embed::train_embeddings(docs, cfg);
  auto m2 = embed::train_embeddings(docs, cfg);
  for (const auto& word : m1.vocabulary()) {
    if (m1.word_vector(word) != m2.word_vector(word)) {
      check.require(false, "deterministic retrain not bit-identical");
      break;
    }
  }
  auto oov = m1.word_vector_checked("alphabeta");
  check.require(!oov.in_vocab, "oov probe unexpectedly in vocabulary");
  double norm = 0;
  for (double v : oov.values) norm += v * v;
  check.require(norm > 0, "oov composition returned a zero vector");
}

// ---------------------------------------------------------------------------
// criterion 6: classifier suite
// ---------------------------------------------------------------------------

ml::Dataset blobs(std::size_t n_per_class, double sep, std::uint64_t seed) {
  ml::Dataset data = ml::Dataset::with_features({"x0", "x1"});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    data.add_row({-sep + noise(rng), -sep + noise(rng)}, 0);
    data.add_row({sep + noise(rng), sep + noise(rng)}, 1);
  }
  return data;
}

double accuracy_on(const ml::TrainedModel& model, const ml::Dataset& data) {
  auto preds = model.predict(data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == data.y[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

void criterion_6(Checker& check) {
  const auto start = std::chrono::steady_clock::now();

  auto separable = blobs(100, 2.0, 3);
  auto logreg = ml::fit({ml::LogisticRegressionParams{}, 3}, separable);
  check.require(accuracy_on(logreg, separable) >= 0.95,
                "logistic regression below 95% on separable blobs");

  ml::Dataset xor_data = ml::Dataset::with_features({"x0", "x1"});
  xor_data.add_row({0, 0}, 0);
  xor_data.add_row({0, 1}, 1);
  xor_data.add_row({1, 0}, 1);
  xor_data.add_row({1, 1}, 0);
  auto tree = ml::fit({ml::DecisionTreeParams{.max_depth = 2}, 0}, xor_data);
  check.require(accuracy_on(tree, xor_data) == 1.0, "depth-2 tree misses XOR");

  ml::RandomForestParams rf1;
  rf1.n_trees = 1;
  rf1.bootstrap = false;
  rf1.feature_sampling = ml::FeatureSampling::All;
  rf1.max_depth = 6;
  auto forest = ml::fit({rf1, 5}, blobs(50, 0.8, 6));
  auto single = ml::fit({ml::DecisionTreeParams{.max_depth = 6}, 5}, blobs(50, 0.8, 6));
  auto probe = blobs(30, 0.8, 9);
  check.require(forest.predict_proba(probe) == single.predict_proba(probe),
                "RF(1 tree, no bootstrap) deviates from the decision tree");

  // AUROC: pair counting vs trapezoidal integration
  std::mt19937_64 rng(333);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng() % 30;
    std::vector<int> y(n);
    std::vector<double> scores(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = unit() < 0.5;
      (y[i] ? pos : neg) = true;
      scores[i] = std::round(unit() * 8.0) / 8.0;
    }
    if (!pos || !neg) continue;
    // trapezoid route
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double p_total = 0, n_total = 0;
    for (int label : y) (label ? p_total : n_total) += 1;
    double tp = 0, fp = 0, prev_tpr = 0, prev_fpr = 0, area = 0;
    std::size_t i = 0;
    while (i < n) {
      const double t = scores[order[i]];
      while (i < n && scores[order[i]] == t) {
        (y[order[i]] ? tp : fp) += 1;
        ++i;
      }
      area += (fp / n_total - prev_fpr) * (tp / p_total + prev_tpr) / 2;
      prev_tpr = tp / p_total;
      prev_fpr = fp / n_total;
    }
    if (std::abs(ml::auroc_pair_count(y, scores) - area) > 1e-9) {
      check.require(false, "pair-count AUROC deviates from trapezoid by > 1e-9");
      break;
    }
  }

  // MLP gradient check
  {
    std::mt19937_64 g(11);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t rows = 10, in = 3, hidden = 5;
    std::vector<double> x(rows * in);
    std::vector<int> y(rows);
    for (auto& v : x) v = noise(g);
    for (auto& label : y) label = noise(g) > 0;
    ml::MlpState state;
    state.in = in;
    state.hidden = hidden;
    state.w1.resize(in * hidden);
    state.b1.resize(hidden);
    state.w2.resize(hidden);
    for (auto* arr : {&state.w1, &state.b1, &state.w2})
      for (auto& v : *arr) v = 0.4 * noise(g);
    state.b2 = -0.2;
    ml::MlpState grad;
    const double l2 = 1e-3;
    ml::detail::mlp_loss_grad(state, x, rows, y, l2, grad);
    const double h = 1e-6;
    double worst = 0;
    auto fd = [&](double* p, double analytic) {
      const double saved = *p;
      *p = saved + h;
      const double up = ml::detail::mlp_loss(state, x, rows, y, l2);
      *p = saved - h;
      const double down = ml::detail::mlp_loss(state, x, rows, y, l2);
      *p = saved;
      const double est = (up - down) / (2 * h);
      const double scale = std::max({std::abs(est), std::abs(analytic), 1e-8});
      worst = std::max(worst, std::abs(est - analytic) / scale);
    };
    for (std::size_t k = 0; k < state.w1.size(); ++k) fd(&state.w1[k], grad.w1[k]);
    for (std::size_t k = 0; k < state.b1.size(); ++k) fd(&state.b1[k], grad.b1[k]);
    for (std::size_t k = 0; k < state.w2.size(); ++k) fd(&state.w2[k], grad.w2[k]);
    fd(&state.b2, grad.b2);
    check.require(worst < 1e-4, "MLP gradient relative error >= 1e-4");
  }

  // QDA vs the Bayes boundary on isotropic Gaussians, n = 2000
  auto train = blobs(1000, 1.0, 41);
  auto test = blobs(1000, 1.0, 42);
  auto qda = ml::fit({ml::QdaParams{}, 0}, train);
  const double bayes = 0.9213503964748575;  // Phi(sqrt(2))
  check.within(accuracy_on(qda, test), bayes, 0.02, "QDA accuracy vs Bayes optimum");

  check.require(elapsed_seconds(start) < 60.0, "criterion 6 exceeded 1 min");
}

// ---------------------------------------------------------------------------
// criterion 7: transfer protocol
// ---------------------------------------------------------------------------

void criterion_7(Checker& check) {
  auto train = blobs(80, 1.5, 51);
  auto test = blobs(40, 1.5, 52);
  for (auto& v : test.x) v += (v >= 0 ? 5000.0 : -5000.0);  // marker band

  bool leaked = false;
  bool called = false;
  ml::FitFn spy = [&](const ml::ModelSpec& spec, const ml::Dataset& received) {
    called = true;
    if (received.x != train.x) leaked = true;
    for (double v : received.x)
      if (std::abs(v) >= 5000.0) leaked = true;
    return ml::fit(spec, received);
  };
  ml::transfer_protocol(train, test, {{ml::DecisionTreeParams{}, 1}}, spy);
  check.require(called, "transfer protocol never called fit");
  check.require(!leaked, "test rows reached fit");

  // shared decision boundary across two marginals
  auto domain = [](std::uint64_t seed, double spread) {
    ml::Dataset d = ml::Dataset::with_features({"x0", "x1"});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spread);
    for (int i = 0; i < 500; ++i) {
      const double x0 = gauss(rng), x1 = gauss(rng);
      d.add_row({x0, x1}, x0 + x1 > 0 ? 1 : 0);
    }
    return d;
  };
  std::vector<ml::ModelSpec> spec = {{ml::LogisticRegressionParams{}, 2}};
  const double in_domain =
      ml::transfer_protocol(domain(60, 1.0), domain(61, 1.0), spec)[0].metrics.accuracy;
  const double transferred =
      ml::transfer_protocol(domain(60, 1.0), domain(62, 2.0), spec)[0].metrics.accuracy;
  check.require(std::abs(in_domain - transferred) <= 0.05,
                "transfer accuracy drifted more than 0.05 from in-domain");
}

// ---------------------------------------------------------------------------
// criterion 8: cascade suite
// ---------------------------------------------------------------------------

void criterion_8(Checker& check) {
  // 7-node fixture: hand-drawn shape
  auto posts = corpus::load_posts(kFixtures + "/posts_cascade.jsonl").items;
  auto built = cascade::build_cascades(posts);
  check.require(built.cascades.size() == 1, "fixture should form one cascade");
  const auto& c = built.cascades[0];
  check.require(c.nodes.size() == 7 && c.level_count() == 3 && c.edge_count() == 6,
                "fixture tree shape mismatch");
  std::map<std::string, std::size_t> child_counts;
  for (const auto& n : c.nodes) child_counts[n.post.id] = n.children.size();
  check.require(child_counts["c1"] == 3 && child_counts["c2"] == 2 &&
                    child_counts["c3"] == 1 && child_counts["c4"] == 0,
                "fixture branching mismatch");

  // hand-valued exemplar features on a built-by-hand prefix
  cascade::Cascade hand;
  hand.annotated = true;
  auto add = [&](std::size_t level, std::optional<std::size_t> parent,
                 const std::string& author, std::int64_t t, double z,
                 std::int64_t followers) {
    cascade::Node node;
    node.post.id = "n" + std::to_string(hand.nodes.size());
    node.post.author = author;
    node.post.timestamp = t;
    node.post.follower_count = followers;
    node.level = level;
    node.parent = parent;
    node.z = z;
    node.doc_vec = {1.0};
    const std::size_t idx = hand.nodes.size();
    if (parent) hand.nodes[*parent].children.push_back(idx);
    hand.nodes.push_back(std::move(node));
    return idx;
  };
  auto root = add(0, {}, "root", 0, +0.5, 20);
  add(1, root, "a", 10, +0.3, 5);
  add(1, root, "b", 20, -0.2, 5);
  add(1, root, "c", 30, 0.0, 5);
  add(1, root, "d", 40, 0.0, 5);
  auto features = cascade::engineered_features(hand, 2);
  const auto& names = cascade::engineered_feature_names();
  auto at = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return features[i];
    return std::nan("");
  };
  check.within(at("user.root_influence"), 0.2, 0.0,
               "Root Influence: 4 replies / 20 followers");
  check.within(at("polarity.positive_influence"), 0.4, 0.0,
               "Positive Influence: mean of {+0.5, +0.3}");

  // zero-follower convention
  cascade::Cascade lonely;
  lonely.annotated = true;
  cascade::Node lone;
  lone.post.id = "x";
  lone.post.author = "x";
  lone.post.follower_count = 0;
  lone.doc_vec = {1.0};
  lonely.nodes.push_back(lone);
  lonely.root_id = "x";
  auto lone_features = cascade::engineered_features(lonely, 1);
  check.within(lone_features[0], 0.0, 0.0, "Root Influence with 0 followers");

  // prefix poisoning: features at d never read level >= d
  cascade::Cascade poisoned;
  poisoned.annotated = true;
  {
    cascade::Node n0;
    n0.post.id = "p0";
    n0.post.author = "r";
    n0.post.timestamp = 0;
    n0.post.follower_count = 10;
    n0.z = 0.1;
    n0.gamma.gamma = 0.5;
    n0.doc_vec = {1.0, 0.0};
    poisoned.nodes.push_back(n0);
    cascade::Node n1;
    n1.post.id = "p1";
    n1.post.author = "s";
    n1.post.timestamp = 5;
    n1.post.follower_count = 3;
    n1.level = 1;
    n1.parent = 0;
    n1.z = -0.2;
    n1.stance = 0.4;
    n1.gamma.gamma = -0.1;
    n1.doc_vec = {0.5, 0.5};
    poisoned.nodes[0].children.push_back(1);
    poisoned.nodes.push_back(n1);
    cascade::Node n2 = n1;
    n2.post.id = "p2";
    n2.post.timestamp = 9;
    n2.level = 2;
    n2.parent = 1;
    poisoned.nodes[1].children.push_back(2);
    poisoned.nodes.push_back(n2);
  }
  auto before = cascade::engineered_features(poisoned, 2);
  auto embed_before = cascade::prefix_embedding(poisoned, 2);
  for (auto& node : poisoned.nodes) {
    if (node.level < 2) continue;
    node.z = 1e6;
    node.stance = -1e6;
    node.gamma.gamma = 1e6;
    node.post.follower_count = 123456;
    node.post.reshare_count = 654321;
    node.post.timestamp = -1;
    node.doc_vec = {9e9, -9e9};
  }
  check.require(cascade::engineered_features(poisoned, 2) == before,
                "poisoned future nodes changed prefix features");
  check.require(cascade::prefix_embedding(poisoned, 2) == embed_before,
                "poisoned future nodes changed the prefix embedding");

  // min-5-level boundary
  auto chain = [&](std::size_t levels) {
    std::vector<corpus::Post> chain_posts;
    for (std::size_t l = 0; l < levels; ++l) {
      corpus::Post p;
      p.id = "ch" + std::to_string(levels) + "_" + std::to_string(l);
      p.forum = corpus::Forum::gab();
      p.author = "u";
      p.timestamp = 100 + static_cast<std::int64_t>(l);
      p.text = "t";
      if (l > 0) p.parent_id = "ch" + std::to_string(levels) + "_" + std::to_string(l - 1);
      chain_posts.push_back(std::move(p));
    }
    return cascade::build_cascades(chain_posts).cascades;
  };
  check.require(cascade::filter_min_levels(chain(4), 5).empty(),
                "4-level cascade survived the min-5 filter");
  check.require(cascade::filter_min_levels(chain(5), 5).size() == 1,
                "5-level cascade dropped by the min-5 filter");
}

// ---------------------------------------------------------------------------
// criterion 9: planted-rule forecast analog
// ---------------------------------------------------------------------------

void criterion_9(Checker& check) {
  const auto start = std::chrono::steady_clock::now();

  textproc::SentimentLexicon lexicon;
  lexicon.entries["great"] = {0.8, 0.7};
  lexicon.entries["terrible"] = {-0.9, 0.9};
  lexicon.entries["awful"] = {-0.7, 0.8};
  textproc::EntityRules rules;

  for (std::uint64_t seed : {101, 202, 303, 404, 505}) {
    cascade::SyntheticConfig synth;
    synth.cascades = 2000;
    synth.noise_fraction = 0.05;
    synth.seed = seed;
    auto corpus = cascade::generate_synthetic_cascades(synth);

    auto vocab = tfidf::build_vocab(corpus.posts, rules, 100);
    auto weights = tfidf::compute_party_tfidf(corpus.speeches, vocab, rules.stopwords);
    embed::EmbeddingConfig cfg;
    cfg.dim = 8;
    cfg.min_count = 2;
    cfg.epochs = 1;
    cfg.window = 2;
    cfg.negatives = 2;
    cfg.bucket_count = 1u << 10;
    cfg.seed = seed;
    std::vector<textproc::TokenList> docs;
    docs.reserve(corpus.posts.size());
    for (const auto& p : corpus.posts)
      docs.push_back(textproc::preprocess(p.text, rules.stopwords));
    auto model = embed::train_embeddings(docs, cfg);

    auto kept =
        cascade::filter_min_levels(cascade::build_cascades(corpus.posts).cascades, 5);
    cascade::AnnotateContext ctx{&lexicon, &rules, &model, &weights, {}};
    for (auto& c : kept) cascade::annotate(c, ctx);

    cascade::ForecastConfig forecast;  // min 5 levels, d = 3, epsilon 0
    std::map<cascade::FeatureSet, double> accuracy;
    for (auto set : {cascade::FeatureSet::Engineered, cascade::FeatureSet::Text,
                     cascade::FeatureSet::Combined}) {
      auto assembled = cascade::assemble_forecast_dataset(kept, forecast, set);
      // 70/30 split
      std::vector<std::size_t> idx(assembled.dataset.rows);
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::mt19937_64 rng(seed);
      std::shuffle(idx.begin(), idx.end(), rng);
      auto train = ml::Dataset::with_features(assembled.dataset.feature_names);
      auto test = ml::Dataset::with_features(assembled.dataset.feature_names);
      const std::size_t n_test = assembled.dataset.rows * 3 / 10;
      for (std::size_t i = 0; i < idx.size(); ++i)
        (i < n_test ? test : train)
            .add_row(assembled.dataset.row(idx[i]), assembled.dataset.y[idx[i]]);
      ml::RandomForestParams rf;
      rf.n_trees = 60;
      auto forest = ml::fit({rf, seed}, train);
      accuracy[set] = ml::evaluate(test.y, forest.predict_proba(test)).accuracy;
    }
    check.require(accuracy[cascade::FeatureSet::Combined] >= 0.85 - 0.03,
                  "seed " + std::to_string(seed) + ": combined RF accuracy " +
                      std::to_string(accuracy[cascade::FeatureSet::Combined]) +
                      " below 0.85 - 0.03");
    std::cout << "    [seed " << seed << "] RF accuracy engineered="
              << accuracy[cascade::FeatureSet::Engineered]
              << " text=" << accuracy[cascade::FeatureSet::Text]
              << " combined=" << accuracy[cascade::FeatureSet::Combined] << '\n';
  }

  check.require(elapsed_seconds(start) < 180.0, "criterion 9 exceeded 3 min");
}

// ---------------------------------------------------------------------------
// criterion 10: end-to-end byte-identical reruns through the CLI binary
// ---------------------------------------------------------------------------

struct CliEnv {
  std::string cli;
  fs::path workdir;
};

int run_cli(const CliEnv& env, const std::string& args) {
  const std::string cmd = "\"" + env.cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void criterion_10(Checker& check, const CliEnv& env) {
  if (env.cli.empty()) {
    check.require(false, "no --cli binary provided");
    return;
  }
  fs::remove_all(env.workdir);
  fs::create_directories(env.workdir);

  // config for label/predict over the fixture corpus, absolute paths
  const auto config_path = env.workdir / "config.json";
  {
    std::ofstream out(config_path);
    out << R"({
  "seed": 42,
  "deterministic": true,
  "entity_min_forum_freq": 1,
  "embedding": {"dim": 12, "epochs": 2, "min_count": 1, "bucket_count": 1024},
  "paths": {
    "speeches": ")" << kFixtures << R"(/speeches.jsonl",
    "posts": {"twitter": ")" << kFixtures << R"(/posts_twitter.jsonl",
              "gab": ")" << kFixtures << R"(/posts_gab.jsonl"},
    "stopwords": ")" << kFixtures << R"(/stopwords.txt",
    "sentiment_lexicon": ")" << kFixtures << R"(/sentiment_lexicon.tsv",
    "negators": ")" << kFixtures << R"(/negators.txt",
    "media_bias": ")" << kFixtures << R"(/media_bias.tsv"
  }
})";
  }

  // synthetic corpus for the forecast run
  const auto synth_dir = env.workdir / "synth";
  {
    cascade::SyntheticConfig synth;
    synth.cascades = 150;
    synth.seed = 77;
    auto corpus = cascade::generate_synthetic_cascades(synth);
    fs::create_directories(synth_dir);
    std::ofstream speeches(synth_dir / "speeches.jsonl");
    for (const auto& s : corpus.speeches) speeches << corpus::to_jsonl(s) << '\n';
    std::ofstream posts(synth_dir / "posts.jsonl");
    for (const auto& p : corpus.posts) posts << corpus::to_jsonl(p) << '\n';
  }
  const auto forecast_config_path = env.workdir / "forecast_config.json";
  {
    std::ofstream out(forecast_config_path);
    out << R"({
  "seed": 42,
  "deterministic": true,
  "entity_min_forum_freq": 1,
  "embedding": {"dim": 8, "epochs": 1, "min_count": 2, "bucket_count": 1024},
  "forecast_models": [{"kind": "RF", "n_trees": 20}, {"kind": "AdaBoost"},
                      {"kind": "MLP", "epochs": 120}, {"kind": "QDA"}],
  "paths": {
    "speeches": ")" << (synth_dir / "speeches.jsonl").string() << R"(",
    "posts": {"gab": ")" << (synth_dir / "posts.jsonl").string() << R"("},
    "stopwords": ")" << kFixtures << R"(/stopwords.txt",
    "sentiment_lexicon": ")" << kFixtures << R"(/sentiment_lexicon.tsv"
  }
})";
  }

  struct Run {
    std::string name;
    std::string args;
    std::string config;
    std::vector<std::string> outputs;
  };
  const std::vector<Run> runs = {
      {"label", "label", config_path.string(),
       {"labels_twitter.tsv", "labels_gab.tsv", "bias_summary.tsv",
        "posts_per_day.csv", "media_bias_histogram.csv"}},
      {"predict", "predict --protocol transcripts", config_path.string(),
       {"metrics_transcripts_to_twitter.tsv", "metrics_transcripts_to_gab.tsv",
        "metrics_predict.jsonl"}},
      {"forecast", "forecast", forecast_config_path.string(),
       {"forecast_accuracy.tsv", "forecast_metrics.jsonl"}},
  };
  for (const auto& run : runs) {
    const auto out1 = env.workdir / (run.name + "_run1");
    const auto out2 = env.workdir / (run.name + "_run2");
    for (const auto& out : {out1, out2}) {
      const int rc = run_cli(env, run.args + " --config \"" + run.config +
                                      "\" --out \"" + out.string() + "\"");
      check.require(rc == 0, run.name + " exited with status " + std::to_string(rc));
    }
    for (const auto& file : run.outputs) {
      const auto a = slurp(out1 / file), b = slurp(out2 / file);
      check.require(a == b && a.rfind("<missing", 0) != 0,
                    run.name + ": " + file + " not byte-identical across runs");
    }
  }

  // usage errors exit with 2
  const int rc = run_cli(env, "label --config /nonexistent.json");
  check.require(WIFEXITED(rc) && WEXITSTATUS(rc) == 2,
                "missing config should exit with code 2");
}

}  // namespace

int main(int argc, char** argv) {
  CliEnv env;
  env.workdir = fs::temp_directory_path() / "biasline_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") env.cli = argv[i + 1];
    if (flag == "--workdir") env.workdir = argv[i + 1];
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<void(Checker&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "Eq-score oracle (1e-12) + 10k fuzzed boundedness", criterion_1},
      {2, "binarization boundary", criterion_2},
      {3, "TF-IDF hand oracle (1e-9) + bitwise symmetry", criterion_3},
      {4, "directional label + similarity analog", criterion_4},
      {5, "embedding numerics (gradient, determinism, OOV)", criterion_5},
      {6, "classifier suite", criterion_6},
      {7, "transfer protocol (leakage guard, shared boundary)", criterion_7},
      {8, "cascade suite (shape, poisoning, exemplars, filter)", criterion_8},
      {9, "planted-rule forecast analog (5 seeds)", criterion_9},
      {10, "end-to-end CLI determinism",
       [&](Checker& c) { criterion_10(c, env); }},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    Checker check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = elapsed_seconds(start);
    if (check.failures.empty()) {
      std::printf("PASS  criterion %2d  (%.2fs)  %s\n", criterion.id, secs,
                  criterion.name);
    } else {
      ++failed;
      std::printf("FAIL  criterion %2d  (%.2fs)  %s\n", criterion.id, secs,
                  criterion.name);
      for (const auto& reason : check.failures)
        std::printf("      - %s\n", reason.c_str());
    }
    std::fflush(stdout);
  }
  if (failed == 0)
    std::printf("all 10 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failed);
  return failed;
}
