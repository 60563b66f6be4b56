#include "biasline/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace biasline::cascade {

std::size_t Cascade::level_count() const {
  std::size_t max_level = 0;
  for (const auto& n : nodes) max_level = std::max(max_level, n.level);
  return nodes.empty() ? 0 : max_level + 1;
}

std::size_t Cascade::edge_count() const {
  std::size_t edges = 0;
  for (const auto& n : nodes) edges += n.parent.has_value();
  return edges;
}

namespace {

// Follows raw parent links from every post; revisiting a post on the current
// chain is corrupt input.
void detect_cycles(const std::vector<corpus::Post>& posts,
                   const std::unordered_map<std::string, std::size_t>& by_id) {
  std::vector<int> state(posts.size(), 0);  // 0 new, 1 on chain, 2 done
  std::vector<std::size_t> chain;
  for (std::size_t start = 0; start < posts.size(); ++start) {
    if (state[start] != 0) continue;
    chain.clear();
    std::size_t cur = start;
    while (true) {
      if (state[cur] == 1) {
        std::string msg = "cycle detected in parent links: ";
        auto it = std::find(chain.begin(), chain.end(), cur);
        for (; it != chain.end(); ++it) msg += posts[*it].id + " -> ";
        msg += posts[cur].id;
        throw std::runtime_error(msg);
      }
      if (state[cur] == 2) break;
      state[cur] = 1;
      chain.push_back(cur);
      if (!posts[cur].parent_id) break;
      auto it = by_id.find(*posts[cur].parent_id);
      if (it == by_id.end()) break;
      cur = it->second;
    }
    for (auto i : chain) state[i] = 2;
  }
}

}  // namespace

BuildResult build_cascades(const std::vector<corpus::Post>& posts) {
  BuildResult result;
  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) by_id.emplace(posts[i].id, i);

  detect_cycles(posts, by_id);

  // Effective parent per post after existence + timestamp checks.
  std::vector<std::optional<std::size_t>> parent(posts.size());
  std::vector<bool> orphan(posts.size(), false);
  std::vector<std::vector<std::size_t>> children(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!posts[i].parent_id) continue;
    auto it = by_id.find(*posts[i].parent_id);
    if (it == by_id.end()) {
      orphan[i] = true;
      continue;
    }
    const std::size_t p = it->second;
    if (posts[i].timestamp <= posts[p].timestamp) {
      result.warnings.push_back("edge rejected: post " + posts[i].id +
                                " does not strictly follow its parent " +
                                posts[p].id + " in time; re-rooted");
      orphan[i] = true;
      continue;
    }
    parent[i] = p;
    children[p].push_back(i);
  }

  // Deterministic sibling order.
  for (auto& ch : children)
    std::sort(ch.begin(), ch.end(), [&](std::size_t a, std::size_t b) {
      if (posts[a].timestamp != posts[b].timestamp)
        return posts[a].timestamp < posts[b].timestamp;
      return posts[a].id < posts[b].id;
    });

  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (parent[i]) continue;  // roots only
    Cascade cascade;
    cascade.root_id = posts[i].id;
    cascade.orphan_root = orphan[i];

    // BFS: deterministic node indices, level = parent level + 1.
    std::vector<std::pair<std::size_t, std::optional<std::size_t>>> queue;
    queue.emplace_back(i, std::nullopt);
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const auto [post_idx, parent_node] = queue[q];
      Node node;
      node.post = posts[post_idx];
      node.parent = parent_node;
      node.level = parent_node ? cascade.nodes[*parent_node].level + 1 : 0;
      const std::size_t node_idx = cascade.nodes.size();
      if (parent_node) cascade.nodes[*parent_node].children.push_back(node_idx);
      cascade.nodes.push_back(std::move(node));
      for (auto child : children[post_idx]) queue.emplace_back(child, node_idx);
    }
    result.cascades.push_back(std::move(cascade));
  }
  return result;
}

std::vector<Cascade> filter_min_levels(std::vector<Cascade> cascades,
                                       std::size_t min_levels) {
  if (min_levels < 1) throw std::invalid_argument("min_levels must be >= 1");
  std::erase_if(cascades,
                [&](const Cascade& c) { return c.level_count() < min_levels; });
  return cascades;
}

void annotate(Cascade& cascade, const AnnotateContext& ctx) {
  if (!ctx.lexicon || !ctx.rules || !ctx.model || !ctx.weights)
    throw std::invalid_argument("annotate: incomplete context");
  for (auto& node : cascade.nodes) {
    node.z = textproc::sentiment(node.post.text, *ctx.lexicon);
    node.doc_vec =
        ctx.model->doc_vector(textproc::preprocess(node.post.text, ctx.rules->stopwords));
    node.gamma = bias::bias_score(textproc::extract_entities(node.post.text, *ctx.rules),
                                  *ctx.weights, ctx.bias_options);
  }
  for (auto& node : cascade.nodes) {
    if (!node.parent) continue;
    const Node& parent = cascade.nodes[*node.parent];
    double w = embed::cosine(node.doc_vec, parent.doc_vec);
    if (node.z * parent.z < 0) w = -w;  // strictly opposite sentiment signs
    node.stance = std::clamp(w, -1.0, 1.0);
  }
  cascade.annotated = true;
}

BiasState theta(const Cascade& cascade, std::size_t upto_level) {
  if (!cascade.annotated) throw std::logic_error("theta: cascade not annotated");
  if (upto_level < 1) throw std::invalid_argument("theta: upto_level must be >= 1");
  BiasState state;
  double sum = 0;
  for (const auto& node : cascade.nodes) {
    if (node.level >= upto_level || node.gamma.no_scoreable) continue;
    sum += node.gamma.gamma;
    ++state.n_scored;
  }
  if (state.n_scored == 0) {
    state.none_scored = true;
  } else {
    state.theta = sum / static_cast<double>(state.n_scored);
  }
  return state;
}

void ForecastConfig::validate() const {
  if (train_levels < 1) throw std::invalid_argument("train_levels must be >= 1");
  if (train_levels >= min_levels)
    throw std::invalid_argument("train_levels must be < min_levels");
  if (!(shift_epsilon >= 0) || !std::isfinite(shift_epsilon))
    throw std::invalid_argument("shift_epsilon must be finite and >= 0");
}

namespace {

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

ShiftResult shift_label(const Cascade& cascade, std::size_t d, double epsilon) {
  ShiftResult result;
  if (cascade.level_count() <= d) return result;  // no arrival tier: ineligible
  result.eligible = true;
  const auto before = theta(cascade, d);
  const auto after = theta(cascade, d + 1);
  const bool sign_change = sign_of(before.theta) != sign_of(after.theta);
  const bool magnitude =
      epsilon > 0 && std::abs(after.theta - before.theta) > epsilon;
  result.label = sign_change || magnitude ? 1 : 0;
  return result;
}

const std::vector<std::string>& engineered_feature_names() {
  static const std::vector<std::string> kNames = {
      // user
      "user.root_influence", "user.border_influence", "user.distinct_authors",
      "user.author_post_ratio", "user.mean_author_followers",
      "user.max_author_followers", "user.repeat_author_fraction",
      "user.root_author_reply_share",
      // polarity
      "polarity.positive_influence", "polarity.negative_influence",
      "polarity.mean_sentiment", "polarity.var_sentiment",
      "polarity.positive_fraction", "polarity.negative_fraction",
      // cascade
      "cascade.node_count", "cascade.level_count", "cascade.max_branching",
      "cascade.mean_branching", "cascade.leaf_fraction",
      "cascade.sentiment_reshares", "cascade.stance_reshares",
      "cascade.mean_stance", "cascade.var_stance",
      "cascade.negative_stance_fraction", "cascade.max_subtree_depth",
      // temporal
      "temporal.root_activity", "temporal.root_response",
      "temporal.mean_interpost_gap", "temporal.time_span",
      "temporal.mean_level_gap"};
  return kNames;
}

std::vector<double> engineered_features(const Cascade& cascade, std::size_t d) {
  if (!cascade.annotated)
    throw std::logic_error("engineered_features: cascade not annotated");
  if (d < 1) throw std::invalid_argument("engineered_features: d must be >= 1");

  // Prefix = nodes at levels 0..d-1; nothing beyond is read.
  std::vector<std::size_t> prefix;
  for (std::size_t i = 0; i < cascade.nodes.size(); ++i)
    if (cascade.nodes[i].level < d) prefix.push_back(i);
  const double n = static_cast<double>(prefix.size());

  auto ratio = [](double num, double den) { return den != 0 ? num / den : 0.0; };
  std::vector<double> f;
  f.reserve(kEngineeredFeatureCount);

  const Node& root = cascade.nodes[0];
  const std::string& root_author = root.post.author;

  // --- user ---
  std::size_t root_children_in_prefix = 0;
  for (auto c : root.children)
    if (cascade.nodes[c].level < d) ++root_children_in_prefix;
  const double root_followers =
      static_cast<double>(root.post.follower_count.value_or(0));
  f.push_back(ratio(static_cast<double>(root_children_in_prefix), root_followers));

  // First post per author decides that author's follower count.
  std::map<std::string, double> author_followers;
  std::map<std::string, std::size_t> author_posts;
  for (auto i : prefix) {
    const auto& node = cascade.nodes[i];
    author_followers.emplace(node.post.author,
                             static_cast<double>(node.post.follower_count.value_or(0)));
    ++author_posts[node.post.author];
  }
  double followers_total = 0, followers_max = 0;
  for (const auto& [author, followers] : author_followers) {
    followers_total += followers;
    followers_max = std::max(followers_max, followers);
  }
  const double author_count = static_cast<double>(author_followers.size());
  f.push_back(ratio(std::max(followers_total - author_count, 0.0), followers_total));
  f.push_back(author_count);
  f.push_back(ratio(author_count, n));
  f.push_back(ratio(followers_total, author_count));
  f.push_back(followers_max);
  std::size_t repeaters = 0;
  for (const auto& [author, count] : author_posts) repeaters += count > 1;
  f.push_back(ratio(static_cast<double>(repeaters), author_count));
  std::size_t replies = 0, root_author_replies = 0;
  for (auto i : prefix) {
    if (cascade.nodes[i].level == 0) continue;
    ++replies;
    root_author_replies += cascade.nodes[i].post.author == root_author;
  }
  f.push_back(ratio(static_cast<double>(root_author_replies),
                    static_cast<double>(replies)));

  // --- polarity ---
  double pos_sum = 0, neg_sum = 0, z_sum = 0, z_sq = 0;
  std::size_t pos_n = 0, neg_n = 0;
  for (auto i : prefix) {
    const double z = cascade.nodes[i].z;
    z_sum += z;
    z_sq += z * z;
    if (z > 0) {
      pos_sum += z;
      ++pos_n;
    } else if (z < 0) {
      neg_sum += z;
      ++neg_n;
    }
  }
  f.push_back(ratio(pos_sum, static_cast<double>(pos_n)));
  f.push_back(ratio(neg_sum, static_cast<double>(neg_n)));
  const double z_mean = ratio(z_sum, n);
  f.push_back(z_mean);
  f.push_back(ratio(z_sq, n) - z_mean * z_mean);
  f.push_back(ratio(static_cast<double>(pos_n), n));
  f.push_back(ratio(static_cast<double>(neg_n), n));

  // --- cascade ---
  f.push_back(n);
  std::size_t max_level = 0;
  for (auto i : prefix) max_level = std::max(max_level, cascade.nodes[i].level);
  f.push_back(static_cast<double>(max_level + 1));

  std::vector<std::size_t> prefix_child_count(cascade.nodes.size(), 0);
  for (auto i : prefix)
    if (auto p = cascade.nodes[i].parent) ++prefix_child_count[*p];
  double max_branch = 0, branch_sum = 0;
  std::size_t internal = 0, leaves = 0;
  for (auto i : prefix) {
    const double b = static_cast<double>(prefix_child_count[i]);
    max_branch = std::max(max_branch, b);
    if (b > 0) {
      branch_sum += b;
      ++internal;
    } else {
      ++leaves;
    }
  }
  f.push_back(max_branch);
  f.push_back(ratio(branch_sum, static_cast<double>(internal)));
  f.push_back(ratio(static_cast<double>(leaves), n));

  auto reshares_of = [&](std::size_t i) {
    return static_cast<double>(cascade.nodes[i].post.reshare_count.value_or(0));
  };
  double pos_resh = 0, neg_resh = 0;
  std::size_t pos_resh_n = 0, neg_resh_n = 0;
  for (auto i : prefix) {
    if (cascade.nodes[i].z > 0) {
      pos_resh += reshares_of(i);
      ++pos_resh_n;
    } else if (cascade.nodes[i].z < 0) {
      neg_resh += reshares_of(i);
      ++neg_resh_n;
    }
  }
  f.push_back(ratio(pos_resh, static_cast<double>(pos_resh_n)) -
              ratio(neg_resh, static_cast<double>(neg_resh_n)));

  double pos_stance_resh = 0, neg_stance_resh = 0, w_sum = 0, w_sq = 0;
  std::size_t pos_stance_n = 0, neg_stance_n = 0, edge_n = 0, neg_edges = 0;
  for (auto i : prefix) {
    if (!cascade.nodes[i].parent) continue;
    const double w = cascade.nodes[i].stance;
    ++edge_n;
    w_sum += w;
    w_sq += w * w;
    if (w < 0) ++neg_edges;
    if (w > 0) {
      pos_stance_resh += reshares_of(i);
      ++pos_stance_n;
    } else if (w < 0) {
      neg_stance_resh += reshares_of(i);
      ++neg_stance_n;
    }
  }
  f.push_back(ratio(pos_stance_resh, static_cast<double>(pos_stance_n)) -
              ratio(neg_stance_resh, static_cast<double>(neg_stance_n)));
  const double w_mean = ratio(w_sum, static_cast<double>(edge_n));
  f.push_back(w_mean);
  f.push_back(ratio(w_sq, static_cast<double>(edge_n)) - w_mean * w_mean);
  f.push_back(ratio(static_cast<double>(neg_edges), static_cast<double>(edge_n)));

  // Level of the non-root node with the largest prefix subtree.
  std::vector<std::size_t> subtree(cascade.nodes.size(), 0);
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
    subtree[*it] += 1;  // BFS order: children come later, already accumulated
    if (auto p = cascade.nodes[*it].parent) subtree[*p] += subtree[*it];
  }
  std::size_t best_size = 0, best_level = 0;
  for (auto i : prefix) {
    if (cascade.nodes[i].level == 0) continue;
    if (subtree[i] > best_size) {
      best_size = subtree[i];
      best_level = cascade.nodes[i].level;
    }
  }
  f.push_back(static_cast<double>(best_level));

  // --- temporal ---
  auto mean_gap = [](std::vector<double> times) {
    if (times.size() < 2) return 0.0;
    std::sort(times.begin(), times.end());
    double sum = 0;
    for (std::size_t i = 1; i < times.size(); ++i) sum += times[i] - times[i - 1];
    return sum / static_cast<double>(times.size() - 1);
  };
  std::vector<double> root_times, all_times;
  double root_response_sum = 0;
  std::size_t root_response_n = 0;
  std::map<std::size_t, double> first_arrival;  // level -> earliest timestamp
  for (auto i : prefix) {
    const auto& node = cascade.nodes[i];
    const double t = static_cast<double>(node.post.timestamp);
    all_times.push_back(t);
    if (node.post.author == root_author) root_times.push_back(t);
    if (node.level > 0 && node.post.author == root_author && node.parent) {
      root_response_sum +=
          t - static_cast<double>(cascade.nodes[*node.parent].post.timestamp);
      ++root_response_n;
    }
    auto [it, inserted] = first_arrival.emplace(node.level, t);
    if (!inserted) it->second = std::min(it->second, t);
  }
  f.push_back(mean_gap(root_times));
  f.push_back(ratio(root_response_sum, static_cast<double>(root_response_n)));
  f.push_back(mean_gap(all_times));
  const auto [t_min, t_max] = std::minmax_element(all_times.begin(), all_times.end());
  f.push_back(all_times.empty() ? 0.0 : *t_max - *t_min);
  double level_gap_sum = 0;
  std::size_t level_gaps = 0;
  for (auto it = first_arrival.begin(); it != first_arrival.end(); ++it) {
    auto next = std::next(it);
    if (next == first_arrival.end()) break;
    level_gap_sum += next->second - it->second;
    ++level_gaps;
  }
  f.push_back(ratio(level_gap_sum, static_cast<double>(level_gaps)));

  return f;
}

std::vector<double> prefix_embedding(const Cascade& cascade, std::size_t d) {
  if (!cascade.annotated)
    throw std::logic_error("prefix_embedding: cascade not annotated");
  std::vector<double> mean;
  std::size_t count = 0;
  for (const auto& node : cascade.nodes) {
    if (node.level >= d) continue;
    if (mean.empty()) mean.assign(node.doc_vec.size(), 0.0);
    for (std::size_t k = 0; k < node.doc_vec.size(); ++k) mean[k] += node.doc_vec[k];
    ++count;
  }
  if (count > 0)
    for (auto& x : mean) x /= static_cast<double>(count);
  return mean;
}

std::string to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::Engineered: return "engineered";
    case FeatureSet::Text: return "text";
    case FeatureSet::Combined: return "combined";
  }
  return "?";
}

AssembleResult assemble_forecast_dataset(const std::vector<Cascade>& cascades,
                                         const ForecastConfig& config,
                                         FeatureSet feature_set) {
  config.validate();
  const std::size_t d = config.train_levels;

  std::size_t embed_dim = 0;
  for (const auto& c : cascades) {
    if (!c.annotated)
      throw std::logic_error("assemble_forecast_dataset: cascade not annotated");
    if (!c.nodes.empty()) embed_dim = c.nodes[0].doc_vec.size();
  }

  std::vector<std::string> names;
  if (feature_set != FeatureSet::Text)
    names = engineered_feature_names();
  if (feature_set != FeatureSet::Engineered)
    for (std::size_t k = 0; k < embed_dim; ++k)
      names.push_back("embed_" + std::to_string(k));

  AssembleResult result;
  result.dataset = ml::Dataset::with_features(std::move(names));
  for (const auto& c : cascades) {
    if (c.level_count() < config.min_levels) {
      ++result.below_min_levels;
      continue;
    }
    const auto shift = shift_label(c, d, config.shift_epsilon);
    if (!shift.eligible) {
      ++result.excluded;
      continue;
    }
    std::vector<double> row;
    if (feature_set != FeatureSet::Text) row = engineered_features(c, d);
    if (feature_set != FeatureSet::Engineered) {
      auto emb = prefix_embedding(c, d);
      emb.resize(embed_dim, 0.0);
      row.insert(row.end(), emb.begin(), emb.end());
    }
    result.dataset.add_row(row, shift.label);
  }
  if (result.dataset.rows == 0)
    throw std::runtime_error("assemble_forecast_dataset: zero eligible cascades");
  return result;
}

SyntheticCorpus generate_synthetic_cascades(const SyntheticConfig& config) {
  SyntheticCorpus corpus;

  // Speech corpus fixing the entity weights: #redpolicy is republican-only,
  // #bluepolicy democrat-only, so their per-entity ratios are exactly +1/-1.
  for (int i = 0; i < 2; ++i) {
    corpus::Speech dem;
    dem.id = "synth_d" + std::to_string(i);
    dem.party = corpus::Party::Democrat;
    dem.text = "we support #bluepolicy because #bluepolicy helps families";
    corpus.speeches.push_back(dem);
    corpus::Speech rep;
    rep.id = "synth_r" + std::to_string(i);
    rep.party = corpus::Party::Republican;
    rep.text = "we stand for #redpolicy and #redpolicy secures jobs";
    corpus.speeches.push_back(rep);
  }

  std::mt19937_64 rng(config.seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const char* kNeutral = "people argue #redpolicy #bluepolicy all day";
  const std::vector<std::string> kFiller = {"great news today", "such a terrible idea",
                                            "just watching this", "awful take honestly"};

  for (std::size_t c = 0; c < config.cascades; ++c) {
    const bool shift = unit() < config.shift_fraction;
    const bool noisy = unit() < config.noise_fraction;
    const bool high_profile = shift != noisy;  // structural class seen by models
    corpus.planted_shift.push_back(shift ? 1 : 0);

    const std::size_t extra = config.extra_replies_max == 0
                                  ? 0
                                  : static_cast<std::size_t>(
                                        unit() * static_cast<double>(
                                                     config.extra_replies_max + 1));
    const std::size_t direct = (high_profile ? 4 : 2) + extra;
    const std::int64_t followers = high_profile ? 20 : 40;
    const std::int64_t base = 1600000000LL + static_cast<std::int64_t>(c) * 100000;
    const std::string tag = "c" + std::to_string(c);
    std::int64_t t = base;
    auto add_post = [&](const std::string& id, const std::string& author,
                        const std::string& text,
                        std::optional<std::string> parent) {
      corpus::Post p;
      p.id = tag + "_" + id;
      p.forum = corpus::Forum::gab();
      p.author = author;
      p.timestamp = t;
      t += 60;
      p.text = text;
      if (parent) p.parent_id = tag + "_" + *parent;
      p.follower_count = followers;
      p.reshare_count = static_cast<std::int64_t>(unit() * 6.0);
      corpus.posts.push_back(std::move(p));
    };

    add_post("root", tag + "_root_user", "citizens rally behind #redpolicy now",
             std::nullopt);
    for (std::size_t r = 0; r < direct; ++r)
      add_post("l1_" + std::to_string(r), tag + "_u" + std::to_string(r),
               std::string(kNeutral) + " " + kFiller[(c + r) % kFiller.size()], "root");
    add_post("l2", tag + "_u_l2", kNeutral, "l1_0");
    // Arrival tier (level d = 3): flips theta negative on shift cascades.
    if (shift) {
      for (int k = 0; k < 3; ++k)
        add_post("l3_" + std::to_string(k), tag + "_v" + std::to_string(k),
                 "march against it with #bluepolicy", "l2");
    } else {
      add_post("l3_0", tag + "_v0", "more wins for #redpolicy", "l2");
    }
    add_post("l4", tag + "_u_l4", kNeutral, "l3_0");
  }
  return corpus;
}

}  // namespace biasline::cascade
