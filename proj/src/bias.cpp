#include "biasline/bias.hpp"

#include <algorithm>
#include <stdexcept>

namespace biasline::bias {

BiasScore bias_score(const textproc::EntitySet& entities,
                     const tfidf::PartyTfidf& weights, ScoreOptions options) {
  BiasScore score;
  double sum = 0;
  for (const auto& entity : entities) {
    const double d = weights.weight_d(entity);
    const double r = weights.weight_r(entity);
    const double denom = r + d;
    if (denom <= 0) continue;  // entity unseen in every speech
    const double ratio = (r - d) / denom;
    score.contributions.emplace_back(entity, ratio);
    sum += ratio;
  }
  score.n_entities = score.contributions.size();
  if (score.n_entities == 0) {
    score.no_scoreable = true;
    score.gamma = 0;
  } else {
    score.gamma = options.normalize ? sum / static_cast<double>(score.n_entities) : sum;
  }
  return score;
}

int binarize(const BiasScore& score) { return score.gamma > 0 ? 1 : 0; }

Summary corpus_summary(const std::vector<BiasScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("corpus_summary: empty score list");
  std::vector<double> gammas;
  gammas.reserve(scores.size());
  double sum = 0;
  for (const auto& s : scores) {
    gammas.push_back(s.gamma);
    sum += s.gamma;
  }
  std::sort(gammas.begin(), gammas.end());
  Summary out;
  out.sum = sum;
  out.mean = sum / static_cast<double>(gammas.size());
  const std::size_t n = gammas.size();
  out.median = n % 2 == 1 ? gammas[n / 2] : 0.5 * (gammas[n / 2 - 1] + gammas[n / 2]);
  return out;
}

}  // namespace biasline::bias
