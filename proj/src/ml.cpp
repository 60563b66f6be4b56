#include "biasline/ml.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ml_internal.hpp"

namespace biasline::ml {

Dataset Dataset::with_features(std::vector<std::string> names) {
  Dataset d;
  d.cols = names.size();
  d.feature_names = std::move(names);
  return d;
}

void Dataset::add_row(std::span<const double> values, int label) {
  if (values.size() != cols)
    throw std::invalid_argument("Dataset::add_row: expected " + std::to_string(cols) +
                                " values, got " + std::to_string(values.size()));
  x.insert(x.end(), values.begin(), values.end());
  y.push_back(label);
  ++rows;
}

void Dataset::validate() const {
  if (y.size() != rows || x.size() != rows * cols)
    throw std::invalid_argument("Dataset: inconsistent shapes");
  if (feature_names.size() != cols)
    throw std::invalid_argument("Dataset: feature_names length != column count");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite entry");
  for (int label : y)
    if (label != 0 && label != 1)
      throw std::invalid_argument("Dataset: labels must be 0 or 1");
}

std::string ModelSpec::name() const {
  switch (kind()) {
    case ModelKind::LogisticRegression: return "LR";
    case ModelKind::DecisionTree: return "DT";
    case ModelKind::RandomForest: return "RF";
    case ModelKind::Mlp: return "MLP";
    case ModelKind::AdaBoost: return "AdaBoost";
    case ModelKind::Qda: return "QDA";
  }
  return "?";
}

void ModelSpec::validate() const {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticRegressionParams>) {
          if (p.epochs < 1 || p.learning_rate <= 0 || p.l2 < 0)
            throw std::invalid_argument("invalid LogisticRegression hyperparameters");
        } else if constexpr (std::is_same_v<T, DecisionTreeParams>) {
          if (p.max_depth < 1 || p.min_samples_leaf < 1)
            throw std::invalid_argument("invalid DecisionTree hyperparameters");
        } else if constexpr (std::is_same_v<T, RandomForestParams>) {
          if (p.n_trees < 1 || p.max_depth < 1 || p.min_samples_leaf < 1)
            throw std::invalid_argument("invalid RandomForest hyperparameters");
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          if (p.hidden < 1 || p.epochs < 1 || p.learning_rate <= 0 || p.l2 < 0)
            throw std::invalid_argument("invalid MLP hyperparameters");
        } else if constexpr (std::is_same_v<T, AdaBoostParams>) {
          if (p.rounds < 1) throw std::invalid_argument("invalid AdaBoost hyperparameters");
        } else if constexpr (std::is_same_v<T, QdaParams>) {
          if (p.ridge < 0) throw std::invalid_argument("invalid QDA hyperparameters");
        }
      },
      params);
}

Scaler Scaler::fit(const Dataset& data) {
  Scaler s;
  s.mean.assign(data.cols, 0.0);
  s.scale.assign(data.cols, 1.0);
  if (data.rows == 0) return s;
  for (std::size_t r = 0; r < data.rows; ++r)
    for (std::size_t c = 0; c < data.cols; ++c) s.mean[c] += data.at(r, c);
  for (auto& m : s.mean) m /= static_cast<double>(data.rows);
  std::vector<double> var(data.cols, 0.0);
  for (std::size_t r = 0; r < data.rows; ++r)
    for (std::size_t c = 0; c < data.cols; ++c) {
      const double d = data.at(r, c) - s.mean[c];
      var[c] += d * d;
    }
  for (std::size_t c = 0; c < data.cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(data.rows));
    s.scale[c] = sd > 0 ? sd : 1.0;
  }
  return s;
}

void Scaler::apply(std::span<double> row) const {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / scale[c];
}

double TreeModel::predict_row(std::span<const double> row) const {
  std::size_t node = 0;
  while (!nodes[node].leaf)
    node = row[nodes[node].feature] < nodes[node].threshold ? nodes[node].left
                                                            : nodes[node].right;
  return nodes[node].prob;
}

int Stump::predict_row(std::span<const double> row) const {
  const bool ge = row[feature] >= threshold;
  return ge == ge_is_positive ? 1 : 0;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_fit_preconditions(const ModelSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate();
  if (data.rows < 2) throw std::invalid_argument("fit: need at least 2 samples");
  if (data.cols < 1) throw std::invalid_argument("fit: need at least 1 feature");
  std::size_t pos = 0;
  for (int label : data.y) pos += label;
  if (pos == 0 || pos == data.rows)
    throw std::invalid_argument("fit: training data contains a single class");
  if (spec.kind() == ModelKind::Qda && (pos < 2 || data.rows - pos < 2))
    throw std::invalid_argument("fit: QDA needs at least 2 samples per class");
}

std::vector<double> standardized_row(const Scaler& scaler, std::span<const double> row) {
  std::vector<double> z(row.begin(), row.end());
  scaler.apply(z);
  return z;
}

double qda_discriminant(const QdaClassStats& cls, std::span<const double> z) {
  // Forward-substitute L t = (z - mean), then g = -0.5(|t|^2 + log det) + log prior.
  const std::size_t d = cls.mean.size();
  std::vector<double> t(d);
  double quad = 0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = z[i] - cls.mean[i];
    for (std::size_t j = 0; j < i; ++j) s -= cls.chol[i * d + j] * t[j];
    t[i] = s / cls.chol[i * d + i];
    quad += t[i] * t[i];
  }
  return -0.5 * (quad + cls.log_det) + cls.log_prior;
}

}  // namespace

TrainedModel fit(const ModelSpec& spec, const Dataset& data) {
  check_fit_preconditions(spec, data);
  TrainedModel::Impl impl = std::visit(
      [&](const auto& p) -> TrainedModel::Impl {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticRegressionParams>)
          return detail::fit_logistic_regression(p, data);
        else if constexpr (std::is_same_v<T, DecisionTreeParams>)
          return detail::fit_decision_tree(p, data);
        else if constexpr (std::is_same_v<T, RandomForestParams>)
          return detail::fit_random_forest(p, data, spec.seed);
        else if constexpr (std::is_same_v<T, MlpParams>)
          return detail::fit_mlp(p, data, spec.seed);
        else if constexpr (std::is_same_v<T, AdaBoostParams>)
          return detail::fit_adaboost(p, data);
        else
          return detail::fit_qda(p, data);
      },
      spec.params);
  return TrainedModel(spec.kind(), std::move(impl), data.feature_names);
}

std::vector<double> TrainedModel::predict_proba(const Dataset& data) const {
  if (data.feature_names != feature_names_) {
    std::set<std::string> trained(feature_names_.begin(), feature_names_.end());
    std::set<std::string> given(data.feature_names.begin(), data.feature_names.end());
    std::vector<std::string> diff;
    std::set_symmetric_difference(trained.begin(), trained.end(), given.begin(),
                                  given.end(), std::back_inserter(diff));
    std::ostringstream msg;
    msg << "predict_proba: feature names do not match training snapshot;";
    if (diff.empty()) {
      msg << " same names, different order";
    } else {
      msg << " symmetric difference: {";
      for (std::size_t i = 0; i < diff.size(); ++i) msg << (i ? ", " : "") << diff[i];
      msg << "}";
    }
    throw std::invalid_argument(msg.str());
  }

  std::vector<double> scores(data.rows);
  for (std::size_t r = 0; r < data.rows; ++r) {
    const auto row = data.row(r);
    scores[r] = std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearModel>) {
            auto z = standardized_row(m.scaler, row);
            double s = m.bias;
            for (std::size_t c = 0; c < z.size(); ++c) s += m.weights[c] * z[c];
            return sigmoid(s);
          } else if constexpr (std::is_same_v<T, TreeModel>) {
            return m.predict_row(row);
          } else if constexpr (std::is_same_v<T, ForestModel>) {
            double sum = 0;
            for (const auto& tree : m.trees) sum += tree.predict_row(row);
            return sum / static_cast<double>(m.trees.size());
          } else if constexpr (std::is_same_v<T, MlpModel>) {
            auto z = standardized_row(m.scaler, row);
            const auto& st = m.state;
            double out = st.b2;
            for (std::size_t j = 0; j < st.hidden; ++j) {
              double a = st.b1[j];
              for (std::size_t c = 0; c < st.in; ++c) a += st.w1[j * st.in + c] * z[c];
              out += st.w2[j] * std::tanh(a);
            }
            return sigmoid(out);
          } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
            double weighted = 0, total = 0;
            for (const auto& stump : m.stumps) {
              weighted += stump.alpha * stump.predict_row(row);
              total += stump.alpha;
            }
            return total > 0 ? weighted / total : 0.5;
          } else {  // QdaModel
            auto z = standardized_row(m.scaler, row);
            return sigmoid(qda_discriminant(m.c1, z) - qda_discriminant(m.c0, z));
          }
        },
        impl_);
  }
  return scores;
}

std::vector<int> TrainedModel::predict(const Dataset& data) const {
  auto scores = predict_proba(data);
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] > 0.5 ? 1 : 0;
  return labels;
}

double auroc_pair_count(std::span<const int> y_true, std::span<const double> scores) {
  double wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 1) continue;
    for (std::size_t j = 0; j < y_true.size(); ++j) {
      if (y_true[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  if (pairs == 0) throw std::invalid_argument("auroc: need both classes");
  return wins / static_cast<double>(pairs);
}

Metrics evaluate(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size())
    throw std::invalid_argument("evaluate: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("evaluate: empty input");

  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int pred = scores[i] > 0.5 ? 1 : 0;
    if (pred == 1)
      (y_true[i] == 1 ? tp : fp) += 1;
    else
      (y_true[i] == 0 ? tn : fn) += 1;
  }

  Metrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(y_true.size());
  if (tp + fp == 0) {
    m.precision = 0;
    m.no_positive_predictions = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f_score = m.precision + m.recall == 0
                  ? 0.0
                  : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  const bool has_pos = tp + fn > 0;
  const bool has_neg = fp + tn > 0;
  if (has_pos && has_neg) m.auroc = auroc_pair_count(y_true, scores);
  return m;
}

std::vector<ProtocolRow> transfer_protocol(const Dataset& train, const Dataset& test,
                                           const std::vector<ModelSpec>& specs,
                                           const FitFn& fit_fn) {
  if (train.feature_names != test.feature_names)
    throw std::invalid_argument(
        "transfer_protocol: train and test feature names differ");
  const FitFn default_fit = [](const ModelSpec& s, const Dataset& d) { return fit(s, d); };
  const FitFn& fitter = fit_fn ? fit_fn : default_fit;
  std::vector<ProtocolRow> rows;
  rows.reserve(specs.size());
  for (const auto& spec : specs) {
    TrainedModel model = fitter(spec, train);
    auto scores = model.predict_proba(test);
    rows.push_back({spec.name(), evaluate(test.y, scores)});
  }
  return rows;
}

}  // namespace biasline::ml
