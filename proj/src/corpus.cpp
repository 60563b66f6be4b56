#include "biasline/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace biasline::corpus {

using nlohmann::json;

std::string to_string(Party p) {
  return p == Party::Democrat ? "Democrat" : "Republican";
}

Forum Forum::other(std::string n) {
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return {std::move(n)};
}

std::string to_string(BiasBucket b) {
  switch (b) {
    case BiasBucket::FarLeft: return "far-left";
    case BiasBucket::Left: return "left";
    case BiasBucket::Center: return "center";
    case BiasBucket::Right: return "right";
    case BiasBucket::FarRight: return "far-right";
    case BiasBucket::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<BiasBucket> parse_bias_bucket(const std::string& s) {
  if (s == "far-left") return BiasBucket::FarLeft;
  if (s == "left") return BiasBucket::Left;
  if (s == "center") return BiasBucket::Center;
  if (s == "right") return BiasBucket::Right;
  if (s == "far-right") return BiasBucket::FarRight;
  return std::nullopt;
}

namespace {

std::optional<Party> parse_party(const std::string& s) {
  if (s == "D" || s == "Democrat") return Party::Democrat;
  if (s == "R" || s == "Republican") return Party::Republican;
  return std::nullopt;
}

bool whitespace_only(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw CorpusError("line " + std::to_string(line) + ": " + what);
}

Speech parse_speech_line(const json& j, std::size_t line) {
  Speech s;
  if (!j.contains("id") || !j["id"].is_string()) fail(line, "missing or non-string field 'id'");
  s.id = j["id"].get<std::string>();
  if (!j.contains("party") || !j["party"].is_string()) fail(line, "missing or non-string field 'party'");
  auto party = parse_party(j["party"].get<std::string>());
  if (!party) fail(line, "unknown party \"" + j["party"].get<std::string>() + "\"");
  s.party = *party;
  if (!j.contains("text") || !j["text"].is_string()) fail(line, "missing or non-string field 'text'");
  s.text = j["text"].get<std::string>();
  if (s.text.empty() || whitespace_only(s.text)) fail(line, "empty field 'text'");
  if (j.contains("date")) {
    if (!j["date"].is_string()) fail(line, "non-string field 'date'");
    s.date = j["date"].get<std::string>();
  }
  return s;
}

Post parse_post_line(const json& j, std::size_t line) {
  Post p;
  if (!j.contains("id") || !j["id"].is_string()) fail(line, "missing or non-string field 'id'");
  p.id = j["id"].get<std::string>();
  if (!j.contains("forum") || !j["forum"].is_string()) fail(line, "missing or non-string field 'forum'");
  p.forum = Forum::other(j["forum"].get<std::string>());
  if (!j.contains("author") || !j["author"].is_string()) fail(line, "missing or non-string field 'author'");
  p.author = j["author"].get<std::string>();
  if (!j.contains("timestamp") || !j["timestamp"].is_number_integer())
    fail(line, "missing or non-integer field 'timestamp'");
  p.timestamp = j["timestamp"].get<std::int64_t>();
  if (p.timestamp < 0) fail(line, "negative field 'timestamp'");
  if (!j.contains("text") || !j["text"].is_string()) fail(line, "missing or non-string field 'text'");
  p.text = j["text"].get<std::string>();
  if (j.contains("parent_id")) {
    if (!j["parent_id"].is_string()) fail(line, "non-string field 'parent_id'");
    p.parent_id = j["parent_id"].get<std::string>();
    if (*p.parent_id == p.id) fail(line, "post is its own parent ('parent_id' == 'id')");
  }
  if (j.contains("followers")) {
    if (!j["followers"].is_number_integer()) fail(line, "non-integer field 'followers'");
    p.follower_count = j["followers"].get<std::int64_t>();
    if (*p.follower_count < 0) fail(line, "negative field 'followers'");
  }
  if (j.contains("reshares")) {
    if (!j["reshares"].is_number_integer()) fail(line, "non-integer field 'reshares'");
    p.reshare_count = j["reshares"].get<std::int64_t>();
    if (*p.reshare_count < 0) fail(line, "negative field 'reshares'");
  }
  if (j.contains("urls")) {
    if (!j["urls"].is_array()) fail(line, "non-array field 'urls'");
    for (const auto& u : j["urls"]) {
      if (!u.is_string()) fail(line, "non-string entry in 'urls'");
      p.urls.push_back(u.get<std::string>());
    }
  }
  return p;
}

template <typename T, typename ParseFn>
LoadResult<T> load_jsonl(const std::string& path, bool strict, ParseFn parse) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path);
  LoadResult<T> result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || whitespace_only(line)) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) fail(lineno, "record is not a JSON object");
      result.items.push_back(parse(j, lineno));
    } catch (const json::parse_error& e) {
      if (strict) fail(lineno, std::string("invalid JSON: ") + e.what());
      result.warnings.push_back({lineno, std::string("invalid JSON: ") + e.what()});
    } catch (const CorpusError& e) {
      if (strict) throw;
      result.warnings.push_back({lineno, e.what()});
    }
  }
  return result;
}

}  // namespace

LoadResult<Speech> load_speeches(const std::string& path, bool strict) {
  return load_jsonl<Speech>(path, strict, parse_speech_line);
}

LoadResult<Post> load_posts(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path);
  LoadResult<Post> result;
  std::unordered_map<std::string, std::size_t> seen;  // id -> first line
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || whitespace_only(line)) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) fail(lineno, "record is not a JSON object");
      Post p = parse_post_line(j, lineno);
      auto [it, inserted] = seen.emplace(p.id, lineno);
      if (!inserted)
        fail(lineno, "duplicate post id \"" + p.id + "\" (first seen at line " +
                         std::to_string(it->second) + ")");
      result.items.push_back(std::move(p));
    } catch (const json::parse_error& e) {
      if (strict) fail(lineno, std::string("invalid JSON: ") + e.what());
      result.warnings.push_back({lineno, std::string("invalid JSON: ") + e.what()});
    } catch (const CorpusError& e) {
      if (strict) throw;
      result.warnings.push_back({lineno, e.what()});
    }
  }
  return result;
}

MediaBiasTable load_media_bias(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path);
  MediaBiasTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || whitespace_only(line) || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) fail(lineno, "expected 'domain<TAB>bucket'");
    std::string domain = url_domain(line.substr(0, tab));
    std::string bucket_str = line.substr(tab + 1);
    while (!bucket_str.empty() && (bucket_str.back() == '\r' || bucket_str.back() == ' '))
      bucket_str.pop_back();
    auto bucket = parse_bias_bucket(bucket_str);
    if (!bucket) fail(lineno, "unknown bias bucket \"" + bucket_str + "\"");
    table.by_domain[domain] = *bucket;
  }
  return table;
}

std::string to_jsonl(const Speech& s) {
  json j;
  j["id"] = s.id;
  j["party"] = to_string(s.party);
  j["text"] = s.text;
  if (s.date) j["date"] = *s.date;
  return j.dump();
}

std::string to_jsonl(const Post& p) {
  json j;
  j["id"] = p.id;
  j["forum"] = p.forum.name;
  j["author"] = p.author;
  j["timestamp"] = p.timestamp;
  j["text"] = p.text;
  if (p.parent_id) j["parent_id"] = *p.parent_id;
  if (p.follower_count) j["followers"] = *p.follower_count;
  if (p.reshare_count) j["reshares"] = *p.reshare_count;
  if (!p.urls.empty()) j["urls"] = p.urls;
  return j.dump();
}

std::string url_domain(const std::string& url) {
  std::string s = url;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto scheme = s.find("://");
  if (scheme != std::string::npos) s = s.substr(scheme + 3);
  if (s.rfind("www.", 0) == 0) s = s.substr(4);
  auto end = s.find_first_of("/?#:");
  if (end != std::string::npos) s = s.substr(0, end);
  return s;
}

std::string utc_date(std::int64_t timestamp) {
  using namespace std::chrono;
  const auto days_since_epoch =
      floor<days>(sys_seconds(seconds(timestamp)));
  const year_month_day ymd(days_since_epoch);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::map<std::string, std::size_t> posts_per_day(const std::vector<Post>& posts) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : posts) ++counts[utc_date(p.timestamp)];
  return counts;
}

std::map<BiasBucket, std::size_t> media_bias_histogram(const std::vector<Post>& posts,
                                                       const MediaBiasTable& table) {
  std::map<BiasBucket, std::size_t> hist;
  for (const auto& p : posts) {
    std::set<std::string> domains;
    for (const auto& u : p.urls) {
      auto d = url_domain(u);
      if (!d.empty()) domains.insert(d);
    }
    for (const auto& d : domains) {
      auto it = table.by_domain.find(d);
      ++hist[it == table.by_domain.end() ? BiasBucket::Unknown : it->second];
    }
  }
  return hist;
}

}  // namespace biasline::corpus
