#pragma once

#include <string>
#include <utility>
#include <vector>

#include "biasline/textproc.hpp"
#include "biasline/tfidf.hpp"

namespace biasline::bias {

/// Political bias score of a post: per-entity ratios
/// (tf_r - tf_d) / (tf_r + tf_d), averaged over the n scoreable entities
/// (normalized mode, default) or summed (raw mode). Entities with both
/// weights 0 are skipped. gamma stays in [-1, +1] in normalized mode;
/// negative means democrat-leaning.
struct BiasScore {
  double gamma{0};
  std::size_t n_entities{0};  // scoreable entities only
  std::vector<std::pair<std::string, double>> contributions;
  bool no_scoreable{false};   // set when nothing could be scored (gamma = 0)
};

struct ScoreOptions {
  bool normalize{true};  // divide the ratio sum by n
};

BiasScore bias_score(const textproc::EntitySet& entities,
                     const tfidf::PartyTfidf& weights, ScoreOptions options = {});

/// 0 when gamma <= 0, 1 when gamma > 0.
int binarize(const BiasScore& score);

struct Summary {
  double sum{0};
  double mean{0};
  double median{0};
};

/// Sum/mean/median of gamma values; the median of an even-length list is the
/// mean of the central pair. Throws on an empty list.
Summary corpus_summary(const std::vector<BiasScore>& scores);

}  // namespace biasline::bias
