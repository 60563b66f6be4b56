#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ml_internal.hpp"

namespace biasline::ml::detail {

namespace {

double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SplitChoice {
  bool found{false};
  std::size_t feature{0};
  double threshold{0};
  double gain{-1};
};

struct TreeBuilder {
  const Dataset& data;
  std::size_t max_depth;
  std::size_t min_samples_leaf;
  FeatureSampling sampling;
  std::mt19937_64* rng;  // null when sampling == All
  TreeModel tree;

  // Candidate features for one node: every index, or a sqrt-sized sample
  // (sorted so tie-breaking stays "lowest feature index wins").
  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(data.cols);
    std::iota(all.begin(), all.end(), 0);
    if (sampling == FeatureSampling::All || data.cols <= 1) return all;
    const auto k = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(data.cols))));
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(*rng)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  SplitChoice best_split(std::vector<std::size_t>& indices, std::size_t pos_total) {
    SplitChoice best;
    const std::size_t n = indices.size();
    const double parent = gini(pos_total, n);
    std::vector<std::pair<double, int>> values(n);  // (feature value, label)

    for (std::size_t f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i)
        values[i] = {data.at(indices[i], f), data.y[indices[i]]};
      std::sort(values.begin(), values.end());
      std::size_t pos_left = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        pos_left += values[i].second;
        if (values[i].first == values[i + 1].first) continue;  // no boundary here
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
        const double threshold = 0.5 * (values[i].first + values[i + 1].first);
        const double gain =
            parent - (static_cast<double>(n_left) / n) * gini(pos_left, n_left) -
            (static_cast<double>(n_right) / n) * gini(pos_total - pos_left, n_right);
        // Strict improvement over the running best keeps the first (lowest
        // feature, smallest threshold) winner on ties.
        if (gain > best.gain) {
          best = {true, f, threshold, gain};
        }
      }
    }
    return best;
  }

  std::size_t build(std::vector<std::size_t> indices, std::size_t depth) {
    const std::size_t node_id = tree.nodes.size();
    tree.nodes.emplace_back();
    const std::size_t n = indices.size();
    std::size_t pos = 0;
    for (auto i : indices) pos += data.y[i];
    tree.nodes[node_id].prob = static_cast<double>(pos) / static_cast<double>(n);

    // Split while impure and within depth; zero-gain splits are allowed so
    // parity-style targets (XOR) still resolve at deeper levels.
    if (pos == 0 || pos == n || depth >= max_depth || n < 2) return node_id;
    SplitChoice split = best_split(indices, pos);
    if (!split.found) return node_id;

    std::vector<std::size_t> left, right;
    for (auto i : indices)
      (data.at(i, split.feature) < split.threshold ? left : right).push_back(i);
    indices.clear();
    indices.shrink_to_fit();

    const std::size_t left_id = build(std::move(left), depth + 1);
    const std::size_t right_id = build(std::move(right), depth + 1);
    auto& node = tree.nodes[node_id];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
  }
};

TreeModel build_tree(const Dataset& data, std::vector<std::size_t> indices,
                     std::size_t max_depth, std::size_t min_samples_leaf,
                     FeatureSampling sampling, std::mt19937_64* rng) {
  TreeBuilder builder{data, max_depth, min_samples_leaf, sampling, rng, {}};
  builder.build(std::move(indices), 0);
  return std::move(builder.tree);
}

}  // namespace

TreeModel fit_decision_tree(const DecisionTreeParams& params, const Dataset& data) {
  std::vector<std::size_t> all(data.rows);
  std::iota(all.begin(), all.end(), 0);
  return build_tree(data, std::move(all), params.max_depth, params.min_samples_leaf,
                    FeatureSampling::All, nullptr);
}

ForestModel fit_random_forest(const RandomForestParams& params, const Dataset& data,
                              std::uint64_t seed) {
  ForestModel forest;
  forest.trees.resize(params.n_trees);

  auto build_one = [&](std::size_t t) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(t)));
    std::vector<std::size_t> indices(data.rows);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, data.rows - 1);
      for (auto& i : indices) i = pick(rng);
    } else {
      std::iota(indices.begin(), indices.end(), 0);
    }
    forest.trees[t] = build_tree(data, std::move(indices), params.max_depth,
                                 params.min_samples_leaf, params.feature_sampling, &rng);
  };

  if (params.threads <= 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build_one(t);
  } else {
    // Per-tree RNG streams: the result is identical regardless of scheduling.
    std::vector<std::future<void>> jobs;
    std::size_t next = 0;
    while (next < params.n_trees) {
      jobs.clear();
      const std::size_t batch = std::min(params.threads, params.n_trees - next);
      for (std::size_t k = 0; k < batch; ++k)
        jobs.push_back(std::async(std::launch::async, build_one, next + k));
      for (auto& j : jobs) j.get();
      next += batch;
    }
  }
  return forest;
}

AdaBoostModel fit_adaboost(const AdaBoostParams& params, const Dataset& data) {
  const std::size_t n = data.rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  AdaBoostModel model;

  // Sorted sample order per feature, computed once.
  std::vector<std::vector<std::size_t>> order(data.cols);
  for (std::size_t f = 0; f < data.cols; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) {
      return data.at(a, f) < data.at(b, f);
    });
  }

  std::vector<double> margin(n, 0.0);  // running weighted vote, for train_errors
  double alpha_total = 0;

  for (std::size_t round = 0; round < params.rounds; ++round) {
    // Best stump: scan thresholds below the minimum (constant predictor) and
    // at midpoints between distinct values; both orientations via symmetry.
    Stump best;
    double best_err = 1.0;
    for (std::size_t f = 0; f < data.cols; ++f) {
      const auto& idx = order[f];
      // err of "predict 1 on x >= t": start with t below everything.
      double err_ge = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (data.y[i] == 0) err_ge += w[i];
      auto consider = [&](double threshold, double err) {
        if (err < best_err) {
          best_err = err;
          best = {f, threshold, true, 0};
        }
        if (1.0 - err < best_err) {
          best_err = 1.0 - err;
          best = {f, threshold, false, 0};
        }
      };
      consider(data.at(idx[0], f) - 1.0, err_ge);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        // Moving sample idx[i] to the "< t" side flips its prediction to 0.
        err_ge += data.y[idx[i]] == 1 ? w[idx[i]] : -w[idx[i]];
        if (data.at(idx[i], f) == data.at(idx[i + 1], f)) continue;
        consider(0.5 * (data.at(idx[i], f) + data.at(idx[i + 1], f)), err_ge);
      }
    }

    if (best_err >= 0.5 - 1e-12) break;  // no weak learner left
    const double err = std::max(best_err, 1e-12);
    best.alpha = std::log((1.0 - err) / err);
    model.stumps.push_back(best);

    double w_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int pred = best.predict_row(data.row(i));
      if (pred != data.y[i]) w[i] *= std::exp(best.alpha);
      w_sum += w[i];
      margin[i] += best.alpha * pred;
    }
    for (auto& wi : w) wi /= w_sum;
    alpha_total += best.alpha;

    std::size_t mistakes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int pred = margin[i] / alpha_total > 0.5 ? 1 : 0;
      mistakes += pred != data.y[i];
    }
    model.train_errors.push_back(static_cast<double>(mistakes) /
                                 static_cast<double>(n));
    if (best_err <= 1e-12) break;  // perfect stump dominates from here on
  }

  if (model.stumps.empty())
    throw std::runtime_error("fit_adaboost: no stump beats random guessing");
  return model;
}

}  // namespace biasline::ml::detail
