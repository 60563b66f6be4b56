#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biasline/textproc.hpp"

namespace biasline::embed {

struct EmbeddingConfig {
  std::size_t dim{64};
  std::size_t window{5};
  std::size_t negatives{5};
  std::size_t epochs{5};
  double learning_rate{0.05};  // decayed linearly to 0 over training
  std::size_t min_count{2};
  std::size_t minn{3};
  std::size_t maxn{6};
  std::size_t bucket_count{1u << 17};
  std::uint64_t seed{42};
  bool deterministic{true};  // sequential, reproducible; false = hogwild
  std::size_t threads{1};    // used only when deterministic == false
};

/// Result of a word lookup, with the composition path that produced it.
struct WordVector {
  std::vector<double> values;
  bool in_vocab{false};
  bool empty{false};  // OOV and too short for any n-gram: zero vector
};

/// Subword skip-gram embeddings. A word's representation is the element-wise
/// mean of its own vector and its hashed character n-gram vectors, so unseen
/// words still compose from their n-grams.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  std::size_t dim() const { return config_.dim; }
  const EmbeddingConfig& config() const { return config_; }
  std::size_t vocab_size() const { return words_.size(); }
  bool has_word(std::string_view word) const;
  const std::vector<std::string>& vocabulary() const { return words_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  WordVector word_vector_checked(std::string_view word) const;
  std::vector<double> word_vector(std::string_view word) const {
    return word_vector_checked(word).values;
  }
  /// Element-wise mean of token vectors; zero vector for an empty list.
  std::vector<double> doc_vector(const textproc::TokenList& tokens) const;

  void save(const std::string& path) const;
  static EmbeddingModel load(const std::string& path);

 private:
  friend EmbeddingModel train_embeddings(const std::vector<textproc::TokenList>&,
                                         const EmbeddingConfig&);
  friend struct ModelAccess;

  EmbeddingConfig config_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> word_ids_;
  std::vector<double> word_in_;    // vocab_size x dim
  std::vector<double> bucket_in_;  // bucket_count x dim
  std::vector<double> word_out_;   // vocab_size x dim, context side
  std::vector<double> epoch_losses_;
};

EmbeddingModel train_embeddings(const std::vector<textproc::TokenList>& docs,
                                const EmbeddingConfig& config);

/// dot(u,v) / (|u||v|); 0 when either norm is 0. Throws on length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct SimilarityReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> matrix;  // symmetric, unit diagonal
};

/// Pairwise cosine similarities of corpus centroids (mean of doc vectors).
/// Throws when a corpus is empty, naming it.
SimilarityReport similarity_report(
    const EmbeddingModel& model,
    const std::vector<std::pair<std::string, std::vector<textproc::TokenList>>>& corpora);

namespace detail {

/// Hashed character n-gram bucket ids of "<word>" for lengths [minn, maxn].
std::vector<std::size_t> ngram_buckets(std::string_view word, std::size_t minn,
                                       std::size_t maxn, std::size_t bucket_count);

/// One skip-gram training example: a center word, one true context word and
/// the drawn negative context words.
struct Triple {
  std::size_t center;
  std::size_t context;
  std::vector<std::size_t> negatives;
};

/// Flat view of the trainable parameters, shared by the SGD path and the
/// finite-difference gradient check.
struct Parameters {
  std::size_t dim{0};
  std::vector<double> word_in;
  std::vector<double> bucket_in;
  std::vector<double> word_out;
};

/// Negative-sampling loss of a batch of triples under the mean word+n-gram
/// composition. grams[w] lists the bucket ids of word w.
double ns_loss(const Parameters& params,
               const std::vector<std::vector<std::size_t>>& grams,
               std::span<const Triple> triples);

/// Analytic gradient of ns_loss, accumulated into grad (same layout as
/// params, zero-initialized by the caller).
void ns_loss_grad(const Parameters& params,
                  const std::vector<std::vector<std::size_t>>& grams,
                  std::span<const Triple> triples, Parameters& grad);

}  // namespace detail

}  // namespace biasline::embed
