#include "biasline/tfidf.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace biasline::tfidf {

EntityVocab build_vocab(const std::vector<corpus::Post>& posts,
                        const textproc::EntityRules& rules,
                        std::size_t min_forum_freq) {
  if (min_forum_freq < 1) throw std::invalid_argument("min_forum_freq must be >= 1");

  // entity -> forum -> token-level occurrence count
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& post : posts) {
    auto entities = textproc::extract_entities(post.text, rules);
    if (entities.empty()) continue;
    // Occurrences counted over the candidate token stream, not per post.
    for (const auto& token : textproc::preprocess(post.text, rules.stopwords)) {
      if (entities.contains(token)) ++counts[token][post.forum.name];
    }
  }

  EntityVocab vocab;
  for (auto& [entity, per_forum] : counts) {
    bool keep = false;
    for (auto& [forum, n] : per_forum)
      if (n >= min_forum_freq) keep = true;
    if (keep) vocab.forum_counts.emplace(entity, per_forum);
  }
  std::size_t next_id = 0;
  for (auto& [entity, per_forum] : vocab.forum_counts) vocab.ids[entity] = next_id++;
  return vocab;
}

double PartyTfidf::weight_d(const std::string& entity) const {
  auto it = tf_d.find(entity);
  return it == tf_d.end() ? 0.0 : it->second;
}

double PartyTfidf::weight_r(const std::string& entity) const {
  auto it = tf_r.find(entity);
  return it == tf_r.end() ? 0.0 : it->second;
}

PartyTfidf compute_party_tfidf(const std::vector<corpus::Speech>& speeches,
                               const EntityVocab& vocab,
                               const textproc::StopwordSet& stopwords) {
  PartyTfidf result;

  std::map<std::string, std::size_t> count_d, count_r;  // occurrences per party
  std::map<std::string, std::size_t> df;                // speeches containing entity
  std::size_t total_d = 0, total_r = 0;

  for (const auto& speech : speeches) {
    const bool dem = speech.party == corpus::Party::Democrat;
    (dem ? result.doc_count_d : result.doc_count_r) += 1;
    std::set<std::string> present;
    for (const auto& token : textproc::preprocess(speech.text, stopwords)) {
      if (!vocab.contains(token)) continue;
      present.insert(token);
      if (dem) {
        ++count_d[token];
        ++total_d;
      } else {
        ++count_r[token];
        ++total_r;
      }
    }
    for (const auto& e : present) ++df[e];
  }

  if (result.doc_count_d == 0) throw std::runtime_error("empty party corpus: Democrat");
  if (result.doc_count_r == 0) throw std::runtime_error("empty party corpus: Republican");

  const double n_docs = static_cast<double>(speeches.size());
  for (const auto& [entity, id] : vocab.ids) {
    auto df_it = df.find(entity);
    const double df_e = df_it == df.end() ? 0.0 : static_cast<double>(df_it->second);
    const double idf = std::log((1.0 + n_docs) / (1.0 + df_e)) + 1.0;
    result.idf[entity] = idf;

    auto d_it = count_d.find(entity);
    if (d_it != count_d.end() && total_d > 0)
      result.tf_d[entity] =
          (static_cast<double>(d_it->second) / static_cast<double>(total_d)) * idf;
    auto r_it = count_r.find(entity);
    if (r_it != count_r.end() && total_r > 0)
      result.tf_r[entity] =
          (static_cast<double>(r_it->second) / static_cast<double>(total_r)) * idf;
  }
  return result;
}

void export_tsv(const PartyTfidf& weights, std::ostream& out) {
  std::set<std::string> entities;
  for (const auto& [e, _] : weights.idf) entities.insert(e);
  char buf[96];
  for (const auto& e : entities) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g", weights.weight_d(e),
                  weights.weight_r(e), weights.idf.at(e));
    out << e << '\t' << buf << '\n';
  }
}

}  // namespace biasline::tfidf
