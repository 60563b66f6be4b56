#include "biasline/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace biasline::textproc {

namespace {

bool is_word_char(unsigned char c) {
  // Bytes >= 0x80 (UTF-8 continuations and leads) count as letters.
  return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_url_chunk(std::string_view chunk) {
  auto starts_with_ci = [&](std::string_view prefix) {
    if (chunk.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(chunk[i])) != prefix[i]) return false;
    }
    return true;
  };
  return starts_with_ci("http://") || starts_with_ci("https://") || starts_with_ci("www.");
}

bool ends_sentence(std::string_view chunk) {
  for (auto it = chunk.rbegin(); it != chunk.rend(); ++it) {
    unsigned char c = static_cast<unsigned char>(*it);
    if (c == '.' || c == '?' || c == '!') return true;
    if (is_word_char(c)) return false;
  }
  return false;
}

}  // namespace

namespace detail {

std::vector<RawToken> tokenize(std::string_view text) {
  std::vector<RawToken> tokens;
  bool sentence_start = true;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t begin = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view chunk = text.substr(begin, i - begin);
    if (is_url_chunk(chunk)) continue;  // URLs vanish; sentence state unchanged

    RawToken tok;
    std::size_t j = 0;
    while (j < chunk.size() && !is_word_char(static_cast<unsigned char>(chunk[j])) &&
           chunk[j] != '#')
      ++j;
    if (j < chunk.size() && chunk[j] == '#') {
      tok.hashtag = true;
      tok.lower.push_back('#');
      ++j;
      for (; j < chunk.size() && is_word_char(static_cast<unsigned char>(chunk[j])); ++j)
        tok.lower.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(chunk[j]))));
      if (tok.lower.size() == 1) tok.lower.clear();  // bare '#'
    } else {
      bool first_alpha_seen = false;
      bool later_upper = false;
      for (char raw : chunk) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (!is_word_char(c)) continue;
        if (std::isalpha(c)) {
          if (!first_alpha_seen) {
            first_alpha_seen = true;
            tok.uppercase_start = std::isupper(c) != 0;
          } else if (std::isupper(c)) {
            later_upper = true;
          }
        }
        tok.lower.push_back(static_cast<char>(std::tolower(c)));
      }
      tok.titlecase = tok.uppercase_start && !later_upper;
    }

    if (!tok.lower.empty()) {
      tok.sentence_initial = sentence_start;
      sentence_start = false;
      tokens.push_back(std::move(tok));
    }
    if (ends_sentence(chunk)) sentence_start = true;
  }
  return tokens;
}

}  // namespace detail

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file " + path);
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) set.insert(line);
  }
  return set;
}

std::unordered_set<std::string> load_gazetteer(const std::string& path) {
  return load_stopwords(path);  // same one-token-per-line format
}

SentimentLexicon load_lexicon(const std::string& tsv_path, const std::string& negators_path) {
  std::ifstream in(tsv_path);
  if (!in) throw std::runtime_error("cannot open lexicon file " + tsv_path);
  SentimentLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::runtime_error(tsv_path + " line " + std::to_string(lineno) +
                               ": expected 'token<TAB>polarity<TAB>subjectivity'");
    std::string token = line.substr(0, t1);
    double polarity = std::stod(line.substr(t1 + 1, t2 - t1 - 1));
    double subj = std::stod(line.substr(t2 + 1));
    if (polarity < -1.0 || polarity > 1.0)
      throw std::runtime_error(tsv_path + " line " + std::to_string(lineno) +
                               ": polarity out of [-1,1]");
    if (subj < 0.0 || subj > 1.0)
      throw std::runtime_error(tsv_path + " line " + std::to_string(lineno) +
                               ": subjectivity out of [0,1]");
    lex.entries[token] = {polarity, subj};
  }
  if (!negators_path.empty()) {
    for (auto& n : load_stopwords(negators_path)) lex.negators.insert(n);
  }
  return lex;
}

TokenList preprocess(std::string_view text, const StopwordSet& stopwords) {
  TokenList out;
  for (auto& tok : detail::tokenize(text)) {
    if (stopwords.contains(tok.lower)) continue;
    out.push_back(std::move(tok.lower));
  }
  return out;
}

EntitySet extract_entities(std::string_view text, const EntityRules& rules) {
  EntitySet entities;
  for (const auto& tok : detail::tokenize(text)) {
    if (tok.hashtag) {
      entities.insert(tok.lower);
      continue;
    }
    if (rules.stopwords.contains(tok.lower)) continue;
    if (rules.gazetteer.contains(tok.lower)) {
      entities.insert(tok.lower);
      continue;
    }
    if (tok.uppercase_start && (!tok.sentence_initial || tok.titlecase))
      entities.insert(tok.lower);
  }
  return entities;
}

double sentiment(std::string_view text, const SentimentLexicon& lexicon) {
  auto tokens = detail::tokenize(text);
  double sum = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.entries.find(tokens[i].lower);
    if (it == lexicon.entries.end()) continue;
    double value = it->second.polarity;
    if (i > 0 && lexicon.negators.contains(tokens[i - 1].lower)) value = -value;
    sum += value;
    ++matched;
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

double subjectivity(std::string_view text, const SentimentLexicon& lexicon) {
  auto tokens = detail::tokenize(text);
  double sum = 0;
  std::size_t matched = 0;
  for (const auto& tok : tokens) {
    auto it = lexicon.entries.find(tok.lower);
    if (it == lexicon.entries.end()) continue;
    sum += it->second.subjectivity;
    ++matched;
  }
  return matched == 0 ? 0.0 : sum / static_cast<double>(matched);
}

StyleFeatures style_features(std::string_view text, const SentimentLexicon& lexicon) {
  StyleFeatures f;

  // Words: whitespace chunks that still contain a word character.
  // Sentences: [.?!]-terminated segments holding at least one word.
  std::size_t n_word = 0;
  std::size_t n_sen = 0;
  std::size_t words_in_segment = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t begin = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view chunk = text.substr(begin, i - begin);
    bool has_word = std::any_of(chunk.begin(), chunk.end(), [](char c) {
      return is_word_char(static_cast<unsigned char>(c));
    });
    if (has_word) {
      ++n_word;
      ++words_in_segment;
    }
    if (ends_sentence(chunk) && words_in_segment > 0) {
      ++n_sen;
      words_in_segment = 0;
    }
  }
  if (words_in_segment > 0) ++n_sen;  // trailing sentence without terminator

  std::size_t n_char = 0;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) ++n_char;

  f.n_sen = static_cast<double>(n_sen);
  f.n_word = static_cast<double>(n_word);
  f.n_char = static_cast<double>(n_char);
  f.avg_sentence_len = n_sen == 0 ? 0.0 : f.n_word / f.n_sen;
  f.avg_word_len = n_word == 0 ? 0.0 : f.n_char / f.n_word;
  f.polarity = sentiment(text, lexicon);
  f.subjectivity = subjectivity(text, lexicon);
  return f;
}

std::array<double, StyleFeatures::kCount> StyleFeatures::as_array() const {
  return {party_flag, n_sen,            n_word,       n_char,
          avg_sentence_len, avg_word_len, polarity, subjectivity};
}

const std::array<std::string, StyleFeatures::kCount>& StyleFeatures::names() {
  static const std::array<std::string, kCount> kNames = {
      "party",        "n_sen",    "n_word",    "n_char",
      "avg_sentence", "avg_word", "sentiment", "subjectivity"};
  return kNames;
}

}  // namespace biasline::textproc
