#include "biasline/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>

namespace biasline::embed {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform double in [0,1) from the top 53 bits; portable across stdlibs.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unigram^0.75 sampler over word counts, cumulative-sum + binary search.
class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t draw(std::mt19937_64& rng) const {
    const double u = next_unit(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct EncodedCorpus {
  std::vector<std::vector<std::size_t>> docs;  // in-vocab word ids only
  std::size_t token_count{0};
};

}  // namespace

namespace detail {

std::vector<std::size_t> ngram_buckets(std::string_view word, std::size_t minn,
                                       std::size_t maxn, std::size_t bucket_count) {
  std::vector<std::size_t> buckets;
  std::string padded;
  padded.reserve(word.size() + 2);
  padded.push_back('<');
  padded.append(word);
  padded.push_back('>');
  const std::size_t n = padded.size();
  for (std::size_t len = minn; len <= maxn && len <= n; ++len) {
    for (std::size_t start = 0; start + len <= n; ++start) {
      buckets.push_back(
          static_cast<std::size_t>(fnv1a({padded.data() + start, len}) % bucket_count));
    }
  }
  return buckets;
}

namespace {

// Composed center representation: mean of the word vector and its n-gram
// bucket vectors.
void compose_center(const Parameters& p, const std::vector<std::size_t>& grams,
                    std::size_t word, std::vector<double>& out) {
  const std::size_t dim = p.dim;
  out.assign(dim, 0.0);
  const double* w = p.word_in.data() + word * dim;
  for (std::size_t k = 0; k < dim; ++k) out[k] = w[k];
  for (auto g : grams) {
    const double* b = p.bucket_in.data() + g * dim;
    for (std::size_t k = 0; k < dim; ++k) out[k] += b[k];
  }
  const double scale = 1.0 / static_cast<double>(1 + grams.size());
  for (std::size_t k = 0; k < dim; ++k) out[k] *= scale;
}

}  // namespace

double ns_loss(const Parameters& params,
               const std::vector<std::vector<std::size_t>>& grams,
               std::span<const Triple> triples) {
  const std::size_t dim = params.dim;
  std::vector<double> v(dim);
  double loss = 0;
  for (const auto& t : triples) {
    compose_center(params, grams[t.center], t.center, v);
    const double* u_pos = params.word_out.data() + t.context * dim;
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += u_pos[k] * v[k];
    loss -= log_sigmoid(s);
    for (auto neg : t.negatives) {
      const double* u_neg = params.word_out.data() + neg * dim;
      double sn = 0;
      for (std::size_t k = 0; k < dim; ++k) sn += u_neg[k] * v[k];
      loss -= log_sigmoid(-sn);
    }
  }
  return loss;
}

void ns_loss_grad(const Parameters& params,
                  const std::vector<std::vector<std::size_t>>& grams,
                  std::span<const Triple> triples, Parameters& grad) {
  const std::size_t dim = params.dim;
  std::vector<double> v(dim), v_grad(dim);
  for (const auto& t : triples) {
    const auto& g = grams[t.center];
    compose_center(params, g, t.center, v);
    std::fill(v_grad.begin(), v_grad.end(), 0.0);

    auto contribute = [&](std::size_t out_word, double target) {
      const double* u = params.word_out.data() + out_word * dim;
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += u[k] * v[k];
      const double coeff = sigmoid(s) - target;  // dL/ds
      double* gu = grad.word_out.data() + out_word * dim;
      for (std::size_t k = 0; k < dim; ++k) {
        v_grad[k] += coeff * u[k];
        gu[k] += coeff * v[k];
      }
    };
    contribute(t.context, 1.0);
    for (auto neg : t.negatives) contribute(neg, 0.0);

    const double scale = 1.0 / static_cast<double>(1 + g.size());
    double* gw = grad.word_in.data() + t.center * dim;
    for (std::size_t k = 0; k < dim; ++k) gw[k] += scale * v_grad[k];
    for (auto gram : g) {
      double* gb = grad.bucket_in.data() + gram * dim;
      for (std::size_t k = 0; k < dim; ++k) gb[k] += scale * v_grad[k];
    }
  }
}

}  // namespace detail

namespace {

using detail::Parameters;
using detail::Triple;

// One SGD step on a single (center, context, negatives) triple. Returns the
// loss before the update. Reads and writes through raw pointers so the
// hogwild path can race on the same buffers.
double sgd_step(Parameters& params, const std::vector<std::size_t>& grams,
                const Triple& t, double lr, std::vector<double>& v,
                std::vector<double>& v_grad) {
  const std::size_t dim = params.dim;
  detail::compose_center(params, grams, t.center, v);
  std::fill(v_grad.begin(), v_grad.end(), 0.0);
  double loss = 0;

  auto contribute = [&](std::size_t out_word, double target) {
    double* u = params.word_out.data() + out_word * dim;
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += u[k] * v[k];
    loss -= target == 1.0 ? log_sigmoid(s) : log_sigmoid(-s);
    const double coeff = sigmoid(s) - target;
    for (std::size_t k = 0; k < dim; ++k) {
      v_grad[k] += coeff * u[k];
      u[k] -= lr * coeff * v[k];
    }
  };
  contribute(t.context, 1.0);
  for (auto neg : t.negatives) contribute(neg, 0.0);

  const double scale = lr / static_cast<double>(1 + grams.size());
  double* w = params.word_in.data() + t.center * dim;
  for (std::size_t k = 0; k < dim; ++k) w[k] -= scale * v_grad[k];
  for (auto gram : grams) {
    double* b = params.bucket_in.data() + gram * dim;
    for (std::size_t k = 0; k < dim; ++k) b[k] -= scale * v_grad[k];
  }
  return loss;
}

struct TrainShare {
  Parameters* params;
  const std::vector<std::vector<std::size_t>>* grams;
  const EncodedCorpus* corpus;
  const NegativeSampler* sampler;
  const EmbeddingConfig* config;
  std::size_t total_positions;  // across all epochs, for the lr schedule
};

// Train over a subset of documents (stride partitioning). Returns
// (loss sum, pair count) per epoch.
std::vector<std::pair<double, std::size_t>> train_docs(const TrainShare& share,
                                                       std::size_t doc_offset,
                                                       std::size_t doc_stride,
                                                       std::uint64_t rng_seed) {
  const auto& cfg = *share.config;
  std::mt19937_64 rng(rng_seed);
  std::vector<double> v(cfg.dim), v_grad(cfg.dim);
  std::vector<std::pair<double, std::size_t>> epoch_stats(cfg.epochs, {0.0, 0});
  std::size_t processed = 0;
  Triple triple;
  triple.negatives.reserve(cfg.negatives);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto& [loss_sum, pair_count] = epoch_stats[epoch];
    for (std::size_t d = doc_offset; d < share.corpus->docs.size(); d += doc_stride) {
      const auto& doc = share.corpus->docs[d];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const double lr =
            cfg.learning_rate *
            (1.0 - static_cast<double>(processed) /
                       static_cast<double>(share.total_positions));
        ++processed;
        const std::size_t center = doc[i];
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(doc.size(), i + cfg.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          triple.center = center;
          triple.context = doc[j];
          triple.negatives.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            std::size_t neg = triple.context;
            for (int attempt = 0; attempt < 100 && neg == triple.context; ++attempt)
              neg = share.sampler->draw(rng);
            if (neg != triple.context) triple.negatives.push_back(neg);
          }
          loss_sum += sgd_step(*share.params, (*share.grams)[center], triple, lr, v,
                               v_grad);
          ++pair_count;
        }
      }
    }
  }
  return epoch_stats;
}

}  // namespace

EmbeddingModel train_embeddings(const std::vector<textproc::TokenList>& docs,
                                const EmbeddingConfig& config) {
  if (config.dim < 1 || config.minn > config.maxn || config.min_count < 1 ||
      config.epochs < 1 || config.bucket_count < 1)
    throw std::invalid_argument("invalid embedding config");

  // Vocabulary: words meeting min_count, ordered by frequency then name.
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : docs)
    for (const auto& tok : doc) ++freq[tok];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : freq)
    if (count >= config.min_count) kept.emplace_back(word, count);
  if (kept.empty())
    throw std::runtime_error("train_embeddings: no word meets min_count");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  EmbeddingModel model;
  model.config_ = config;
  model.words_.reserve(kept.size());
  model.counts_.reserve(kept.size());
  for (auto& [word, count] : kept) {
    model.word_ids_.emplace(word, model.words_.size());
    model.words_.push_back(word);
    model.counts_.push_back(count);
  }

  const std::size_t vocab = model.words_.size();
  std::vector<std::vector<std::size_t>> grams(vocab);
  for (std::size_t w = 0; w < vocab; ++w)
    grams[w] = detail::ngram_buckets(model.words_[w], config.minn, config.maxn,
                                     config.bucket_count);

  EncodedCorpus corpus;
  corpus.docs.reserve(docs.size());
  for (const auto& doc : docs) {
    std::vector<std::size_t> ids;
    for (const auto& tok : doc) {
      auto it = model.word_ids_.find(tok);
      if (it != model.word_ids_.end()) ids.push_back(it->second);
    }
    corpus.token_count += ids.size();
    corpus.docs.push_back(std::move(ids));
  }
  if (corpus.token_count == 0)
    throw std::runtime_error("train_embeddings: corpus has no in-vocab token");

  Parameters params;
  params.dim = config.dim;
  params.word_in.resize(vocab * config.dim);
  params.bucket_in.resize(config.bucket_count * config.dim);
  params.word_out.assign(vocab * config.dim, 0.0);
  {
    std::mt19937_64 rng(config.seed);
    const double bound = 0.5 / static_cast<double>(config.dim);
    for (auto& x : params.word_in) x = (2.0 * next_unit(rng) - 1.0) * bound;
    for (auto& x : params.bucket_in) x = (2.0 * next_unit(rng) - 1.0) * bound;
  }

  NegativeSampler sampler(model.counts_);
  TrainShare share{&params,  &grams,
                   &corpus,  &sampler,
                   &config,  config.epochs * corpus.token_count};

  const std::size_t threads =
      config.deterministic ? 1 : std::max<std::size_t>(1, config.threads);
  if (threads == 1) {
    auto stats = train_docs(share, 0, 1, config.seed + 0x9e3779b97f4a7c15ULL);
    for (auto& [loss, pairs] : stats)
      model.epoch_losses_.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  } else {
    // Hogwild: worker threads update the shared parameters without locks.
    // Results are not reproducible; per-thread lr schedules approximate the
    // global one.
    std::vector<std::vector<std::pair<double, std::size_t>>> stats(threads);
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        TrainShare local = share;
        local.total_positions = std::max<std::size_t>(1, share.total_positions / threads);
        stats[t] = train_docs(local, t, threads,
                              config.seed + 0x9e3779b97f4a7c15ULL * (t + 1));
      });
    }
    for (auto& w : workers) w.join();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      double loss = 0;
      std::size_t pairs = 0;
      for (auto& s : stats) {
        loss += s[epoch].first;
        pairs += s[epoch].second;
      }
      model.epoch_losses_.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
    }
  }

  model.word_in_ = std::move(params.word_in);
  model.bucket_in_ = std::move(params.bucket_in);
  model.word_out_ = std::move(params.word_out);
  return model;
}

bool EmbeddingModel::has_word(std::string_view word) const {
  return word_ids_.contains(std::string(word));
}

WordVector EmbeddingModel::word_vector_checked(std::string_view word) const {
  WordVector result;
  const std::size_t dim = config_.dim;
  result.values.assign(dim, 0.0);
  auto buckets =
      detail::ngram_buckets(word, config_.minn, config_.maxn, config_.bucket_count);
  std::size_t parts = 0;
  auto it = word_ids_.find(std::string(word));
  if (it != word_ids_.end()) {
    result.in_vocab = true;
    const double* w = word_in_.data() + it->second * dim;
    for (std::size_t k = 0; k < dim; ++k) result.values[k] += w[k];
    ++parts;
  }
  for (auto g : buckets) {
    const double* b = bucket_in_.data() + g * dim;
    for (std::size_t k = 0; k < dim; ++k) result.values[k] += b[k];
    ++parts;
  }
  if (parts == 0) {
    result.empty = true;
    return result;
  }
  const double scale = 1.0 / static_cast<double>(parts);
  for (auto& x : result.values) x *= scale;
  return result;
}

std::vector<double> EmbeddingModel::doc_vector(const textproc::TokenList& tokens) const {
  std::vector<double> mean(config_.dim, 0.0);
  if (tokens.empty()) return mean;
  for (const auto& tok : tokens) {
    auto wv = word_vector_checked(tok);
    for (std::size_t k = 0; k < config_.dim; ++k) mean[k] += wv.values[k];
  }
  const double scale = 1.0 / static_cast<double>(tokens.size());
  for (auto& x : mean) x *= scale;
  return mean;
}

namespace {

constexpr char kMagic[4] = {'B', 'L', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  return value;
}

void write_f32_array(std::ofstream& out, const std::vector<double>& values) {
  for (double x : values) write_raw(out, static_cast<float>(x));
}

void read_f32_array(std::ifstream& in, std::vector<double>& values, std::size_t n) {
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = read_raw<float>(in);
}

}  // namespace

void EmbeddingModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint32_t>(config_.dim));
  write_raw(out, static_cast<std::uint32_t>(config_.minn));
  write_raw(out, static_cast<std::uint32_t>(config_.maxn));
  write_raw(out, static_cast<std::uint64_t>(config_.bucket_count));
  write_raw(out, static_cast<std::uint64_t>(words_.size()));
  write_raw(out, static_cast<std::uint32_t>(config_.window));
  write_raw(out, static_cast<std::uint32_t>(config_.negatives));
  write_raw(out, static_cast<std::uint32_t>(config_.epochs));
  write_raw(out, config_.learning_rate);
  write_raw(out, static_cast<std::uint32_t>(config_.min_count));
  write_raw(out, static_cast<std::uint64_t>(config_.seed));
  for (std::size_t w = 0; w < words_.size(); ++w) {
    write_raw(out, static_cast<std::uint32_t>(words_[w].size()));
    out.write(words_[w].data(), static_cast<std::streamsize>(words_[w].size()));
    write_raw(out, counts_[w]);
  }
  write_f32_array(out, word_in_);
  write_f32_array(out, bucket_in_);
  write_f32_array(out, word_out_);
  if (!out) throw std::runtime_error("write failed for model file " + path);
}

EmbeddingModel EmbeddingModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not an embedding model file");
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported model version " +
                             std::to_string(version));
  EmbeddingModel model;
  model.config_.dim = read_raw<std::uint32_t>(in);
  model.config_.minn = read_raw<std::uint32_t>(in);
  model.config_.maxn = read_raw<std::uint32_t>(in);
  model.config_.bucket_count = read_raw<std::uint64_t>(in);
  const auto vocab = read_raw<std::uint64_t>(in);
  model.config_.window = read_raw<std::uint32_t>(in);
  model.config_.negatives = read_raw<std::uint32_t>(in);
  model.config_.epochs = read_raw<std::uint32_t>(in);
  model.config_.learning_rate = read_raw<double>(in);
  model.config_.min_count = read_raw<std::uint32_t>(in);
  model.config_.seed = read_raw<std::uint64_t>(in);
  model.words_.reserve(vocab);
  model.counts_.reserve(vocab);
  for (std::uint64_t w = 0; w < vocab; ++w) {
    const auto len = read_raw<std::uint32_t>(in);
    std::string word(len, '\0');
    in.read(word.data(), len);
    const auto count = read_raw<std::uint64_t>(in);
    model.word_ids_.emplace(word, model.words_.size());
    model.words_.push_back(std::move(word));
    model.counts_.push_back(count);
  }
  read_f32_array(in, model.word_in_, vocab * model.config_.dim);
  read_f32_array(in, model.bucket_in_, model.config_.bucket_count * model.config_.dim);
  read_f32_array(in, model.word_out_, vocab * model.config_.dim);
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return model;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    nu += u[k] * u[k];
    nv += v[k] * v[k];
  }
  if (nu == 0 || nv == 0) return 0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

SimilarityReport similarity_report(
    const EmbeddingModel& model,
    const std::vector<std::pair<std::string, std::vector<textproc::TokenList>>>& corpora) {
  SimilarityReport report;
  std::vector<std::vector<double>> centroids;
  for (const auto& [name, docs] : corpora) {
    if (docs.empty())
      throw std::runtime_error("similarity_report: empty corpus \"" + name + "\"");
    std::vector<double> centroid(model.dim(), 0.0);
    for (const auto& doc : docs) {
      auto dv = model.doc_vector(doc);
      for (std::size_t k = 0; k < centroid.size(); ++k) centroid[k] += dv[k];
    }
    const double scale = 1.0 / static_cast<double>(docs.size());
    for (auto& x : centroid) x *= scale;
    report.names.push_back(name);
    centroids.push_back(std::move(centroid));
  }
  const std::size_t n = centroids.size();
  report.matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    report.matrix[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = cosine(centroids[i], centroids[j]);
      report.matrix[i][j] = c;
      report.matrix[j][i] = c;
    }
  }
  return report;
}

}  // namespace biasline::embed
