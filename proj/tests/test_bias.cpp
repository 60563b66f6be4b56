#include <cmath>
#include <random>
#include <string>

#include "doctest.h"

#include "biasline/bias.hpp"
#include "biasline/corpus.hpp"
#include "biasline/textproc.hpp"
#include "biasline/tfidf.hpp"

using namespace biasline;

namespace {

const std::string kFixtures = BIASLINE_FIXTURE_DIR;

tfidf::PartyTfidf weights_of(std::initializer_list<std::tuple<const char*, double, double>>
                                 entries) {
  tfidf::PartyTfidf w;
  for (const auto& [entity, d, r] : entries) {
    if (d != 0) w.tf_d[entity] = d;
    if (r != 0) w.tf_r[entity] = r;
    w.idf[entity] = 1.0;
  }
  w.doc_count_d = w.doc_count_r = 1;
  return w;
}

// Independent oracle: per-entity ratios summed/averaged with plain arithmetic.
double oracle_gamma(const textproc::EntitySet& entities, const tfidf::PartyTfidf& w,
                    bool normalize) {
  double sum = 0;
  int n = 0;
  for (const auto& e : entities) {
    const double d = w.tf_d.count(e) ? w.tf_d.at(e) : 0.0;
    const double r = w.tf_r.count(e) ? w.tf_r.at(e) : 0.0;
    if (d + r <= 0) continue;
    sum += (r - d) / (r + d);
    ++n;
  }
  if (n == 0) return 0;
  return normalize ? sum / n : sum;
}

}  // namespace

TEST_CASE("bias_score: forced single-entity cases") {
  auto balanced = weights_of({{"taxes", 0.5, 0.5}});
  auto score = bias::bias_score({"taxes"}, balanced);
  CHECK(score.gamma == 0.0);
  CHECK(score.n_entities == 1);
  CHECK_FALSE(score.no_scoreable);

  auto right_only = weights_of({{"guns", 0.0, 0.7}});
  CHECK(bias::bias_score({"guns"}, right_only).gamma == doctest::Approx(1.0));
  auto left_only = weights_of({{"healthcare", 0.7, 0.0}});
  CHECK(bias::bias_score({"healthcare"}, left_only).gamma == doctest::Approx(-1.0));
}

TEST_CASE("bias_score: two-entity hand arithmetic") {
  // ratios: (1-2)/3 and (3-1)/4 -> {-1/3? no: r=2,d=1 -> +1/3}, {r=1,d=3 -> -1/2}
  auto w = weights_of({{"e1", 1.0, 2.0}, {"e2", 3.0, 1.0}});
  auto score = bias::bias_score({"e1", "e2"}, w);
  REQUIRE(score.n_entities == 2);
  CHECK(score.contributions[0].second == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(score.contributions[1].second == doctest::Approx(-1.0 / 2).epsilon(1e-12));
  CHECK(score.gamma == doctest::Approx(-1.0 / 12).epsilon(1e-12));

  auto raw = bias::bias_score({"e1", "e2"}, w, {.normalize = false});
  CHECK(raw.gamma == doctest::Approx(-1.0 / 6).epsilon(1e-12));
}

TEST_CASE("bias_score skips entities absent from every speech") {
  auto w = weights_of({{"seen", 0.2, 0.4}});
  auto score = bias::bias_score({"seen", "ghost"}, w);
  CHECK(score.n_entities == 1);
  CHECK(score.gamma == doctest::Approx((0.4 - 0.2) / 0.6).epsilon(1e-12));

  auto none = bias::bias_score({"ghost", "other"}, w);
  CHECK(none.no_scoreable);
  CHECK(none.gamma == 0.0);
  CHECK(none.n_entities == 0);
}

TEST_CASE("binarize: gamma <= 0 maps to 0, anything positive to 1") {
  auto at = [](double gamma) {
    bias::BiasScore s;
    s.gamma = gamma;
    s.n_entities = 1;
    return bias::binarize(s);
  };
  CHECK(at(-1.0) == 0);
  CHECK(at(-1e-9) == 0);
  CHECK(at(0.0) == 0);
  CHECK(at(1e-9) == 1);
  CHECK(at(1.0) == 1);
  CHECK(at(-0.3) == 0);
}

TEST_CASE("binarize is invariant under global positive rescaling") {
  auto w = weights_of({{"a", 0.3, 0.9}, {"b", 0.5, 0.1}, {"c", 0.0, 0.2}});
  auto scaled = w;
  for (auto& [e, v] : scaled.tf_d) v *= 137.0;
  for (auto& [e, v] : scaled.tf_r) v *= 137.0;
  for (const auto& entities :
       {textproc::EntitySet{"a"}, textproc::EntitySet{"a", "b"},
        textproc::EntitySet{"a", "b", "c"}, textproc::EntitySet{"b", "c"}}) {
    CHECK(bias::binarize(bias::bias_score(entities, w)) ==
          bias::binarize(bias::bias_score(entities, scaled)));
  }
}

TEST_CASE("gamma stays in [-1, 1] and matches the oracle on fuzzed weights") {
  std::mt19937_64 rng(2024);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const std::vector<std::string> pool = {"e0", "e1", "e2", "e3", "e4", "e5",
                                         "e6", "e7", "e8", "e9"};
  for (int trial = 0; trial < 2000; ++trial) {
    tfidf::PartyTfidf w;
    textproc::EntitySet entities;
    for (const auto& e : pool) {
      if (unit() < 0.7) entities.insert(e);
      if (unit() < 0.8) w.tf_d[e] = unit() * 10.0;
      if (unit() < 0.8) w.tf_r[e] = unit() * 10.0;
    }
    auto score = bias::bias_score(entities, w);
    CHECK(score.gamma >= -1.0);
    CHECK(score.gamma <= 1.0);
    CHECK(score.gamma == doctest::Approx(oracle_gamma(entities, w, true)).epsilon(1e-12));
  }
}

TEST_CASE("sign soundness: republican-dominant weights force gamma > 0") {
  std::mt19937_64 rng(5);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 200; ++trial) {
    tfidf::PartyTfidf w;
    textproc::EntitySet entities;
    for (int e = 0; e < 5; ++e) {
      const std::string name = "e" + std::to_string(e);
      const double d = unit();
      w.tf_d[name] = d;
      w.tf_r[name] = d + 0.1 + unit();  // strictly larger
      entities.insert(name);
    }
    CHECK(bias::bias_score(entities, w).gamma > 0.0);
  }
}

TEST_CASE("corpus_summary: sum, mean, median conventions") {
  auto with_gammas = [](std::initializer_list<double> gs) {
    std::vector<bias::BiasScore> scores;
    for (double g : gs) {
      bias::BiasScore s;
      s.gamma = g;
      scores.push_back(s);
    }
    return scores;
  };

  auto s1 = bias::corpus_summary(with_gammas({0.2, -0.2}));
  CHECK(s1.sum == doctest::Approx(0.0));
  CHECK(s1.mean == doctest::Approx(0.0));
  CHECK(s1.median == doctest::Approx(0.0));

  auto s2 = bias::corpus_summary(with_gammas({0.1, 0.2, 0.6}));
  CHECK(s2.sum == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(s2.mean == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s2.median == doctest::Approx(0.2).epsilon(1e-12));

  auto s3 = bias::corpus_summary(with_gammas({0.4, 0.1, 0.3, 0.2}));
  CHECK(s3.median == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(bias::corpus_summary({}), std::invalid_argument);
}

TEST_CASE("fixture corpora lean in opposite directions (Gab right, Twitter left)") {
  auto speeches = corpus::load_speeches(kFixtures + "/speeches.jsonl").items;
  auto posts = corpus::load_posts(kFixtures + "/posts.jsonl").items;
  textproc::EntityRules rules;
  rules.stopwords = textproc::load_stopwords(kFixtures + "/stopwords.txt");
  auto vocab = tfidf::build_vocab(posts, rules, 1);
  auto weights = tfidf::compute_party_tfidf(speeches, vocab, rules.stopwords);

  std::vector<bias::BiasScore> gab, twitter;
  for (const auto& p : posts) {
    auto score =
        bias::bias_score(textproc::extract_entities(p.text, rules), weights);
    (p.forum.is_gab() ? gab : twitter).push_back(score);
  }
  REQUIRE(gab.size() == 5);
  REQUIRE(twitter.size() == 5);
  CHECK(bias::corpus_summary(gab).mean > 0.0);
  CHECK(bias::corpus_summary(twitter).mean < 0.0);
}
