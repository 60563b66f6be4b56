#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace biasline::textproc {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;
using EntitySet = std::set<std::string>;  // ordered: deterministic iteration

/// token -> (polarity in [-1,1], subjectivity in [0,1]) plus the negator set.
struct SentimentLexicon {
  struct Entry {
    double polarity{0};
    double subjectivity{0};
  };
  std::unordered_map<std::string, Entry> entries;
  std::unordered_set<std::string> negators;
};

/// Context for the entity heuristic: stopwords plus an optional gazetteer of
/// always-entity tokens.
struct EntityRules {
  StopwordSet stopwords;
  std::unordered_set<std::string> gazetteer;
};

StopwordSet load_stopwords(const std::string& path);
std::unordered_set<std::string> load_gazetteer(const std::string& path);
SentimentLexicon load_lexicon(const std::string& tsv_path,
                              const std::string& negators_path = "");

/// Lower-cased tokens with punctuation stripped (hashtags keep their '#'),
/// URLs removed entirely, stopwords filtered out.
TokenList preprocess(std::string_view text, const StopwordSet& stopwords);

/// Entity heuristic over the raw text: every hashtag; every non-stopword
/// token that starts uppercase away from a sentence start (sentence-initial
/// tokens still qualify when strictly title-cased, so "Obama visited ..."
/// keeps its subject while "RUNNING quickly" yields nothing); every
/// non-stopword gazetteer hit. Results are lower-cased.
EntitySet extract_entities(std::string_view text, const EntityRules& rules);

/// Mean lexicon polarity over matched tokens; a match directly preceded by a
/// negator contributes its negated polarity. 0 when nothing matches.
double sentiment(std::string_view text, const SentimentLexicon& lexicon);

/// Mean lexicon subjectivity over matched tokens; 0 when nothing matches.
double subjectivity(std::string_view text, const SentimentLexicon& lexicon);

/// Stylistic feature row: counts, length averages and lexicon scores.
/// party_flag is meaningful only for transcript-derived rows (0 = Democrat,
/// 1 = Republican); posts carry a constant 0.
struct StyleFeatures {
  double party_flag{0};
  double n_sen{0};
  double n_word{0};
  double n_char{0};
  double avg_sentence_len{0};
  double avg_word_len{0};
  double polarity{0};
  double subjectivity{0};

  static constexpr std::size_t kCount = 8;
  std::array<double, kCount> as_array() const;
  static const std::array<std::string, kCount>& names();
};

StyleFeatures style_features(std::string_view text, const SentimentLexicon& lexicon);

namespace detail {

/// One raw-text token with everything the heuristics need.
struct RawToken {
  std::string lower;         // normalized token ('#'-prefixed for hashtags)
  bool hashtag{false};
  bool uppercase_start{false};   // raw form starts with an uppercase letter
  bool titlecase{false};         // uppercase start, all later cased chars lower
  bool sentence_initial{false};  // first word of the text or after [.?!]
};

/// Shared tokenizer: splits on whitespace, drops URLs, strips punctuation
/// (keeping leading '#'), lower-cases, and records casing/position metadata.
/// Does not filter stopwords.
std::vector<RawToken> tokenize(std::string_view text);

}  // namespace detail

}  // namespace biasline::textproc
