#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biasline/bias.hpp"
#include "biasline/corpus.hpp"
#include "biasline/embed.hpp"
#include "biasline/ml.hpp"
#include "biasline/textproc.hpp"
#include "biasline/tfidf.hpp"

namespace biasline::cascade {

/// One post inside a reply tree. level 0 is the root; a level is the time
/// step of the forecasting task. Annotation fills z (sentiment), stance (edge
/// weight to the parent), gamma and the document embedding.
struct Node {
  corpus::Post post;
  std::size_t level{0};
  std::optional<std::size_t> parent;  // node index
  std::vector<std::size_t> children;  // node indices
  double z{0};
  double stance{0};
  bias::BiasScore gamma;
  std::vector<double> doc_vec;
};

struct Cascade {
  std::string root_id;
  bool orphan_root{false};  // parent was referenced but missing or rejected
  bool annotated{false};
  std::vector<Node> nodes;  // BFS order: level, then (timestamp, id)

  std::size_t level_count() const;
  std::size_t edge_count() const;  // nodes with a parent
};

struct BuildResult {
  std::vector<Cascade> cascades;
  std::vector<std::string> warnings;  // rejected edges (timestamp order)
};

/// Groups posts into reply trees. Parentless posts root cascades; replies
/// whose parent is missing become orphan roots; an edge whose child does not
/// strictly follow its parent in time is rejected (warning) and the child
/// re-rooted. Cyclic raw parent links are an error naming the cycle.
BuildResult build_cascades(const std::vector<corpus::Post>& posts);

std::vector<Cascade> filter_min_levels(std::vector<Cascade> cascades,
                                       std::size_t min_levels);

struct AnnotateContext {
  const textproc::SentimentLexicon* lexicon{nullptr};
  const textproc::EntityRules* rules{nullptr};
  const embed::EmbeddingModel* model{nullptr};
  const tfidf::PartyTfidf* weights{nullptr};
  bias::ScoreOptions bias_options{};
};

/// Fills z, stance, gamma and doc_vec for every node. Stance of a reply is
/// the cosine of child and parent document vectors, negated when the two
/// sentiments have strictly opposite signs, clamped to [-1, 1].
void annotate(Cascade& cascade, const AnnotateContext& ctx);

struct BiasState {
  double theta{0};
  std::size_t n_scored{0};
  bool none_scored{false};
};

/// Mean gamma over nodes at levels < upto_level that carry scoreable
/// entities; 0 (flagged) when none do. Requires an annotated cascade.
BiasState theta(const Cascade& cascade, std::size_t upto_level);

struct ForecastConfig {
  std::size_t min_levels{5};
  std::size_t train_levels{3};  // d: number of prefix levels fed to models
  double shift_epsilon{0};      // 0 = pure sign change

  void validate() const;
};

struct ShiftResult {
  int label{0};
  bool eligible{false};  // false when the cascade has no level-d nodes
};

/// Shift between theta over d levels and theta over d+1 levels: a sign change
/// (0 is its own sign), or — when epsilon > 0 — |delta theta| > epsilon.
ShiftResult shift_label(const Cascade& cascade, std::size_t d, double epsilon);

inline constexpr std::size_t kUserFeatureCount = 8;
inline constexpr std::size_t kPolarityFeatureCount = 6;
inline constexpr std::size_t kCascadeFeatureCount = 11;
inline constexpr std::size_t kTemporalFeatureCount = 5;
inline constexpr std::size_t kEngineeredFeatureCount =
    kUserFeatureCount + kPolarityFeatureCount + kCascadeFeatureCount +
    kTemporalFeatureCount;

/// Names of the 30 engineered features, in emission order (user, polarity,
/// cascade, temporal).
const std::vector<std::string>& engineered_feature_names();

/// The engineered features over the d-level prefix (levels 0..d-1 only).
/// Ratios with zero denominators are 0.
std::vector<double> engineered_features(const Cascade& cascade, std::size_t d);

/// Element-wise mean of prefix document embeddings.
std::vector<double> prefix_embedding(const Cascade& cascade, std::size_t d);

enum class FeatureSet { Engineered, Text, Combined };

std::string to_string(FeatureSet set);

struct AssembleResult {
  ml::Dataset dataset;
  std::size_t excluded{0};         // passed the level filter but no arrival tier
  std::size_t below_min_levels{0};
};

/// One row per eligible cascade: features from the d-level prefix, label from
/// shift_label at the (d+1)-th level. Throws when nothing is eligible.
AssembleResult assemble_forecast_dataset(const std::vector<Cascade>& cascades,
                                         const ForecastConfig& config,
                                         FeatureSet feature_set);

// --- synthetic corpus with a planted shift rule -----------------------------

/// Generator parameters. Cascades follow one of two structural profiles;
/// root_influence > rule_threshold holds exactly for shift cascades except a
/// noise_fraction whose profile is swapped.
struct SyntheticConfig {
  std::size_t cascades{2000};
  std::size_t train_levels{3};
  std::size_t min_levels{5};
  double shift_fraction{0.5};
  double noise_fraction{0.05};
  std::size_t extra_replies_max{2};  // uniform 0..max extra first-level replies
  std::uint64_t seed{7};
};

struct SyntheticCorpus {
  std::vector<corpus::Speech> speeches;
  std::vector<corpus::Post> posts;
  std::vector<int> planted_shift;  // per cascade, in generation order
};

SyntheticCorpus generate_synthetic_cascades(const SyntheticConfig& config);

}  // namespace biasline::cascade
