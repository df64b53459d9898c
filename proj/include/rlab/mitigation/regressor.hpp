#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/mitigation/features.hpp"

namespace rlab::mitigation {

struct RegressionMetrics {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
};

// Ridge regression predicting sentence BLEU from pair features. The bias is
// not penalized; predictions are clamped to [0, 1].
class BleuRegressor {
 public:
  BleuRegressor() = default;
  BleuRegressor(std::vector<double> weights, double bias, double lambda, FeaturizerConfig featurizer);

  double predict(std::span<const double> features) const;
  double predict(const PairFeatureVector& f) const { return predict(f.values); }
  // Unclamped linear response.
  double raw(std::span<const double> features) const;

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  double lambda() const { return lambda_; }
  std::size_t width() const { return weights_.size(); }
  const FeaturizerConfig& featurizer() const { return featurizer_; }

  nlohmann::json to_json() const;
  static BleuRegressor from_json(const nlohmann::json& j);

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  double lambda_ = 0.0;
  FeaturizerConfig featurizer_;
};

// Closed-form ridge on centered data over all given rows. Throws
// SingularMatrix when lambda = 0 and the centered design is rank deficient.
BleuRegressor fit_ridge(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                        std::span<const std::size_t> rows, double lambda,
                        const FeaturizerConfig& featurizer = {});

struct RegressorFit {
  BleuRegressor model;
  RegressionMetrics holdout;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Fits on a seeded 80% split and reports metrics on the remaining 20%.
// Throws SizeError below 10 instances, DegenerateInput for labels outside
// [0, 1], ShapeError on ragged widths.
RegressorFit train_bleu_regressor(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                                  double lambda, std::uint64_t seed, const FeaturizerConfig& featurizer = {});

// Picks the grid value with the lowest validation MSE, using a seeded 80/20
// split of the training rows of the outer split. Ties go to the earlier value.
double select_ridge_lambda(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                           std::span<const double> grid, std::uint64_t seed);

RegressionMetrics regression_metrics(std::span<const double> predictions, std::span<const double> labels);

}  // namespace rlab::mitigation
