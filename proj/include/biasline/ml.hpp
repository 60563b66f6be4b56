#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace biasline::ml {

/// Row-major design matrix with binary labels and named columns.
struct Dataset {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<double> x;  // rows * cols
  std::vector<int> y;     // {0,1}
  std::vector<std::string> feature_names;

  static Dataset with_features(std::vector<std::string> names);
  void add_row(std::span<const double> values, int label);
  void add_row(std::initializer_list<double> values, int label) {
    add_row(std::span<const double>(values.begin(), values.size()), label);
  }
  double at(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {x.data() + r * cols, cols}; }
  /// Throws unless shapes agree and every entry is finite.
  void validate() const;
};

// --- model specifications -------------------------------------------------

struct LogisticRegressionParams {
  std::size_t epochs{500};
  double learning_rate{0.1};
  double l2{1e-4};
};

struct DecisionTreeParams {
  std::size_t max_depth{8};
  std::size_t min_samples_leaf{1};
};

enum class FeatureSampling { Sqrt, All };

struct RandomForestParams {
  std::size_t n_trees{100};
  std::size_t max_depth{8};
  std::size_t min_samples_leaf{1};
  bool bootstrap{true};
  FeatureSampling feature_sampling{FeatureSampling::Sqrt};
  std::size_t threads{1};  // per-tree seeds keep results scheduling-independent
};

struct MlpParams {
  std::size_t hidden{32};
  std::size_t epochs{400};
  double learning_rate{0.3};
  double l2{1e-4};
};

struct AdaBoostParams {
  std::size_t rounds{50};
};

struct QdaParams {
  double ridge{1e-6};
};

using ModelParams = std::variant<LogisticRegressionParams, DecisionTreeParams,
                                 RandomForestParams, MlpParams, AdaBoostParams,
                                 QdaParams>;

enum class ModelKind {
  LogisticRegression,
  DecisionTree,
  RandomForest,
  Mlp,
  AdaBoost,
  Qda,
};

struct ModelSpec {
  ModelParams params;
  std::uint64_t seed{0};

  ModelKind kind() const { return static_cast<ModelKind>(params.index()); }
  /// Short table name: LR, DT, RF, MLP, AdaBoost, QDA.
  std::string name() const;
  void validate() const;
};

// --- learned representations ----------------------------------------------

/// Per-column standardization fitted on the training split only.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 where the training column was constant

  static Scaler fit(const Dataset& data);
  void apply(std::span<double> row) const;
};

struct LinearModel {
  Scaler scaler;
  std::vector<double> weights;
  double bias{0};
};

struct TreeNode {
  bool leaf{true};
  std::size_t feature{0};
  double threshold{0};
  std::size_t left{0};
  std::size_t right{0};
  double prob{0};  // positive fraction at this node
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict_row(std::span<const double> row) const;
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

/// MLP parameters in the flat layout shared with the gradient check.
struct MlpState {
  std::size_t in{0};
  std::size_t hidden{0};
  std::vector<double> w1;  // hidden x in, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2{0};
};

struct MlpModel {
  Scaler scaler;
  MlpState state;
};

struct Stump {
  std::size_t feature{0};
  double threshold{0};
  bool ge_is_positive{true};  // predict 1 on x >= threshold when set
  double alpha{0};
  int predict_row(std::span<const double> row) const;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> train_errors;  // 0/1 ensemble error after each round
};

struct QdaClassStats {
  std::vector<double> mean;
  std::vector<double> chol;  // lower-triangular factor of cov + ridge*I
  double log_det{0};
  double log_prior{0};
};

struct QdaModel {
  Scaler scaler;
  QdaClassStats c0, c1;
};

class TrainedModel {
 public:
  using Impl = std::variant<LinearModel, TreeModel, ForestModel, MlpModel,
                            AdaBoostModel, QdaModel>;

  TrainedModel(ModelKind kind, Impl impl, std::vector<std::string> feature_names)
      : kind_(kind), impl_(std::move(impl)), feature_names_(std::move(feature_names)) {}

  ModelKind kind() const { return kind_; }
  const Impl& impl() const { return impl_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Positive-class scores in [0,1], one per row. Throws when the matrix
  /// feature names differ from the training snapshot (message lists the
  /// symmetric difference).
  std::vector<double> predict_proba(const Dataset& data) const;
  /// Hard labels: score > 0.5.
  std::vector<int> predict(const Dataset& data) const;

 private:
  ModelKind kind_;
  Impl impl_;
  std::vector<std::string> feature_names_;
};

/// Deterministic given (spec, seed, data). Requires >= 2 samples, >= 1
/// feature and both classes present (QDA additionally >= 2 per class).
TrainedModel fit(const ModelSpec& spec, const Dataset& data);

// --- evaluation -------------------------------------------------------------

struct Metrics {
  double accuracy{0};
  double precision{0};
  double recall{0};
  double f_score{0};
  std::optional<double> auroc;        // empty when y_true is single-class
  bool no_positive_predictions{false};
};

/// Threshold-0.5 confusion metrics plus pair-counting AUROC (ties count 1/2).
Metrics evaluate(std::span<const int> y_true, std::span<const double> scores);

/// P(score_pos > score_neg) + P(==)/2 over all positive-negative pairs.
double auroc_pair_count(std::span<const int> y_true, std::span<const double> scores);

// --- transfer protocol ------------------------------------------------------

using FitFn = std::function<TrainedModel(const ModelSpec&, const Dataset&)>;

struct ProtocolRow {
  std::string model;
  Metrics metrics;
};

/// Fits every spec on `train` only and evaluates on `test` only. fit_fn
/// defaults to ml::fit; tests inject a recording wrapper to prove that test
/// rows never reach fitting.
std::vector<ProtocolRow> transfer_protocol(const Dataset& train, const Dataset& test,
                                           const std::vector<ModelSpec>& specs,
                                           const FitFn& fit_fn = {});

namespace detail {

/// Full-batch MLP objective: mean binary cross-entropy + (l2/2)*||W||^2
/// (biases excluded). X is standardized row-major input.
double mlp_loss(const MlpState& state, std::span<const double> x, std::size_t rows,
                std::span<const int> y, double l2);

/// Analytic gradient of mlp_loss in the same layout; returns the loss.
double mlp_loss_grad(const MlpState& state, std::span<const double> x, std::size_t rows,
                     std::span<const int> y, double l2, MlpState& grad);

}  // namespace detail

}  // namespace biasline::ml
