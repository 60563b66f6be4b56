#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace biasline::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Party { Democrat, Republican };

std::string to_string(Party p);

/// A party-labeled congressional transcript document.
struct Speech {
  std::string id;
  Party party{Party::Democrat};
  std::string text;
  std::optional<std::string> date;  // ISO-8601 calendar date
};

/// Forum tag for a post. "twitter" and "gab" are the canonical names;
/// anything else is kept verbatim (lower-cased).
struct Forum {
  std::string name;

  static Forum twitter() { return {"twitter"}; }
  static Forum gab() { return {"gab"}; }
  static Forum other(std::string n);

  bool is_twitter() const { return name == "twitter"; }
  bool is_gab() const { return name == "gab"; }
  bool operator==(const Forum&) const = default;
  auto operator<=>(const Forum&) const = default;
};

/// A social-media message. parent_id links replies to the post they answer.
struct Post {
  std::string id;
  Forum forum;
  std::string author;
  std::int64_t timestamp{0};  // seconds since epoch, UTC
  std::string text;
  std::optional<std::string> parent_id;
  std::optional<std::int64_t> follower_count;
  std::optional<std::int64_t> reshare_count;
  std::vector<std::string> urls;
};

enum class BiasBucket { FarLeft, Left, Center, Right, FarRight, Unknown };

std::string to_string(BiasBucket b);
std::optional<BiasBucket> parse_bias_bucket(const std::string& s);

/// news-domain -> bias bucket; domains are lower-cased, scheme-stripped hostnames.
struct MediaBiasTable {
  std::map<std::string, BiasBucket> by_domain;
};

struct LoadWarning {
  std::size_t line{0};
  std::string message;
};

template <typename T>
struct LoadResult {
  std::vector<T> items;
  std::vector<LoadWarning> warnings;
};

/// Loaders for the line-delimited JSON inputs. In strict mode (default) any
/// malformed line throws CorpusError naming the line and field; in lenient
/// mode bad lines are skipped and reported as warnings. Duplicate post ids
/// and self-parent links are rejected in both modes (strict: error, lenient:
/// warning + skip).
LoadResult<Speech> load_speeches(const std::string& path, bool strict = true);
LoadResult<Post> load_posts(const std::string& path, bool strict = true);
MediaBiasTable load_media_bias(const std::string& path);

std::string to_jsonl(const Speech& s);
std::string to_jsonl(const Post& p);

/// Lower-cased, scheme-stripped hostname of a URL ("" when none can be found).
std::string url_domain(const std::string& url);

/// UTC calendar date "YYYY-MM-DD" for an epoch-seconds timestamp.
std::string utc_date(std::int64_t timestamp);

/// Posts bucketed by UTC day; counts sum to |posts|.
std::map<std::string, std::size_t> posts_per_day(const std::vector<Post>& posts);

/// Shared-news histogram: one count per distinct matched domain per post;
/// domains missing from the table land in BiasBucket::Unknown.
std::map<BiasBucket, std::size_t> media_bias_histogram(const std::vector<Post>& posts,
                                                       const MediaBiasTable& table);

}  // namespace biasline::corpus
