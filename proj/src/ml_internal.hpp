#pragma once

#include "biasline/ml.hpp"

// Per-kind training routines, shared between ml.cpp's dispatch and the tests
// only through ml::fit.
namespace biasline::ml::detail {

LinearModel fit_logistic_regression(const LogisticRegressionParams& params,
                                    const Dataset& data);
TreeModel fit_decision_tree(const DecisionTreeParams& params, const Dataset& data);
ForestModel fit_random_forest(const RandomForestParams& params, const Dataset& data,
                              std::uint64_t seed);
MlpModel fit_mlp(const MlpParams& params, const Dataset& data, std::uint64_t seed);
AdaBoostModel fit_adaboost(const AdaBoostParams& params, const Dataset& data);
QdaModel fit_qda(const QdaParams& params, const Dataset& data);

}  // namespace biasline::ml::detail
