#include <cmath>
#include <random>
#include <stdexcept>

#include "ml_internal.hpp"

// Logistic regression, MLP and QDA. All three standardize features with a
// scaler fitted on the training split.
namespace biasline::ml::detail {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Dataset standardize(const Dataset& data, const Scaler& scaler) {
  Dataset z = data;
  for (std::size_t r = 0; r < z.rows; ++r)
    scaler.apply({z.x.data() + r * z.cols, z.cols});
  return z;
}

}  // namespace

LinearModel fit_logistic_regression(const LogisticRegressionParams& params,
                                    const Dataset& data) {
  LinearModel model;
  model.scaler = Scaler::fit(data);
  Dataset z = standardize(data, model.scaler);

  model.weights.assign(z.cols, 0.0);
  model.bias = 0;
  std::vector<double> grad(z.cols);
  const double inv_n = 1.0 / static_cast<double>(z.rows);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0;
    for (std::size_t r = 0; r < z.rows; ++r) {
      double s = model.bias;
      for (std::size_t c = 0; c < z.cols; ++c) s += model.weights[c] * z.at(r, c);
      const double delta = (sigmoid(s) - z.y[r]) * inv_n;
      for (std::size_t c = 0; c < z.cols; ++c) grad[c] += delta * z.at(r, c);
      grad_bias += delta;
    }
    for (std::size_t c = 0; c < z.cols; ++c)
      model.weights[c] -= params.learning_rate * (grad[c] + params.l2 * model.weights[c]);
    model.bias -= params.learning_rate * grad_bias;
  }
  return model;
}

double mlp_loss(const MlpState& state, std::span<const double> x, std::size_t rows,
                std::span<const int> y, double l2) {
  const std::size_t in = state.in, hidden = state.hidden;
  double loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x.data() + r * in;
    double out = state.b2;
    for (std::size_t j = 0; j < hidden; ++j) {
      double a = state.b1[j];
      for (std::size_t c = 0; c < in; ++c) a += state.w1[j * in + c] * row[c];
      out += state.w2[j] * std::tanh(a);
    }
    loss += softplus(out) - y[r] * out;  // = -log p(y | x)
  }
  loss /= static_cast<double>(rows);
  double reg = 0;
  for (double v : state.w1) reg += v * v;
  for (double v : state.w2) reg += v * v;
  return loss + 0.5 * l2 * reg;
}

double mlp_loss_grad(const MlpState& state, std::span<const double> x, std::size_t rows,
                     std::span<const int> y, double l2, MlpState& grad) {
  const std::size_t in = state.in, hidden = state.hidden;
  grad.in = in;
  grad.hidden = hidden;
  grad.w1.assign(in * hidden, 0.0);
  grad.b1.assign(hidden, 0.0);
  grad.w2.assign(hidden, 0.0);
  grad.b2 = 0;

  std::vector<double> h(hidden);
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x.data() + r * in;
    double out = state.b2;
    for (std::size_t j = 0; j < hidden; ++j) {
      double a = state.b1[j];
      for (std::size_t c = 0; c < in; ++c) a += state.w1[j * in + c] * row[c];
      h[j] = std::tanh(a);
      out += state.w2[j] * h[j];
    }
    loss += softplus(out) - y[r] * out;
    const double dz = (sigmoid(out) - y[r]) * inv_n;
    grad.b2 += dz;
    for (std::size_t j = 0; j < hidden; ++j) {
      grad.w2[j] += dz * h[j];
      const double da = dz * state.w2[j] * (1.0 - h[j] * h[j]);
      grad.b1[j] += da;
      for (std::size_t c = 0; c < in; ++c) grad.w1[j * in + c] += da * row[c];
    }
  }
  for (std::size_t i = 0; i < grad.w1.size(); ++i) grad.w1[i] += l2 * state.w1[i];
  for (std::size_t j = 0; j < hidden; ++j) grad.w2[j] += l2 * state.w2[j];

  double reg = 0;
  for (double v : state.w1) reg += v * v;
  for (double v : state.w2) reg += v * v;
  return loss * inv_n + 0.5 * l2 * reg;
}

MlpModel fit_mlp(const MlpParams& params, const Dataset& data, std::uint64_t seed) {
  MlpModel model;
  model.scaler = Scaler::fit(data);
  Dataset z = standardize(data, model.scaler);

  auto& st = model.state;
  st.in = z.cols;
  st.hidden = params.hidden;
  st.w1.resize(st.in * st.hidden);
  st.b1.assign(st.hidden, 0.0);
  st.w2.resize(st.hidden);
  st.b2 = 0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init1(0.0, 1.0 / std::sqrt(static_cast<double>(st.in)));
  std::normal_distribution<double> init2(0.0,
                                         1.0 / std::sqrt(static_cast<double>(st.hidden)));
  for (auto& v : st.w1) v = init1(rng);
  for (auto& v : st.w2) v = init2(rng);

  MlpState grad;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    mlp_loss_grad(st, z.x, z.rows, z.y, params.l2, grad);
    for (std::size_t i = 0; i < st.w1.size(); ++i)
      st.w1[i] -= params.learning_rate * grad.w1[i];
    for (std::size_t j = 0; j < st.hidden; ++j) {
      st.b1[j] -= params.learning_rate * grad.b1[j];
      st.w2[j] -= params.learning_rate * grad.w2[j];
    }
    st.b2 -= params.learning_rate * grad.b2;
  }
  return model;
}

QdaModel fit_qda(const QdaParams& params, const Dataset& data) {
  QdaModel model;
  model.scaler = Scaler::fit(data);
  Dataset z = standardize(data, model.scaler);
  const std::size_t d = z.cols;

  auto fit_class = [&](int label) {
    QdaClassStats stats;
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < z.rows; ++r)
      if (z.y[r] == label) idx.push_back(r);
    const auto n = static_cast<double>(idx.size());

    stats.mean.assign(d, 0.0);
    for (auto r : idx)
      for (std::size_t c = 0; c < d; ++c) stats.mean[c] += z.at(r, c);
    for (auto& m : stats.mean) m /= n;

    std::vector<double> cov(d * d, 0.0);
    for (auto r : idx)
      for (std::size_t i = 0; i < d; ++i) {
        const double di = z.at(r, i) - stats.mean[i];
        for (std::size_t j = 0; j <= i; ++j)
          cov[i * d + j] += di * (z.at(r, j) - stats.mean[j]);
      }
    for (auto& v : cov) v /= (n - 1.0);
    for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += params.ridge;

    // In-place lower Cholesky.
    stats.chol.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = cov[i * d + j];
        for (std::size_t k = 0; k < j; ++k)
          s -= stats.chol[i * d + k] * stats.chol[j * d + k];
        if (i == j) {
          if (s <= 0)
            throw std::runtime_error("fit_qda: singular covariance after ridge");
          stats.chol[i * d + i] = std::sqrt(s);
        } else {
          stats.chol[i * d + j] = s / stats.chol[j * d + j];
        }
      }
      stats.log_det += 2.0 * std::log(stats.chol[i * d + i]);
    }
    stats.log_prior = std::log(n / static_cast<double>(z.rows));
    return stats;
  };

  model.c0 = fit_class(0);
  model.c1 = fit_class(1);
  return model;
}

}  // namespace biasline::ml::detail
