#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "biasline/corpus.hpp"
#include "biasline/textproc.hpp"

namespace biasline::tfidf {

/// Entity vocabulary built from the post corpora. Occurrence counts are
/// token-level per forum; an entity survives the frequency filter when its
/// count reaches min_forum_freq in at least one forum. Ids are dense and
/// assigned in lexicographic entity order.
struct EntityVocab {
  std::map<std::string, std::size_t> ids;
  std::map<std::string, std::map<std::string, std::size_t>> forum_counts;  // entity -> forum -> n

  bool contains(const std::string& entity) const { return ids.contains(entity); }
  std::size_t size() const { return ids.size(); }
};

EntityVocab build_vocab(const std::vector<corpus::Post>& posts,
                        const textproc::EntityRules& rules,
                        std::size_t min_forum_freq);

/// Per-party TF-IDF weights over the speech corpus. For entity e and party p:
///   TF_p(e)  = occurrences of e in party-p speeches / total vocab-entity
///              occurrences in party-p speeches
///   IDF(e)   = ln((1 + N) / (1 + df(e))) + 1 over all N speeches
///   weight_p = TF_p * IDF
/// Entities absent from a party's corpus weigh 0 for that party.
struct PartyTfidf {
  std::map<std::string, double> tf_d;  // final weights (TF * IDF)
  std::map<std::string, double> tf_r;
  std::map<std::string, double> idf;
  std::size_t doc_count_d{0};
  std::size_t doc_count_r{0};

  double weight_d(const std::string& entity) const;
  double weight_r(const std::string& entity) const;
};

PartyTfidf compute_party_tfidf(const std::vector<corpus::Speech>& speeches,
                               const EntityVocab& vocab,
                               const textproc::StopwordSet& stopwords);

/// Diffable snapshot: `entity<TAB>tf_d<TAB>tf_r<TAB>idf`, sorted by entity.
void export_tsv(const PartyTfidf& weights, std::ostream& out);

}  // namespace biasline::tfidf
