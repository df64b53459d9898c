#include "rlab/mitigation/regressor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/mitigation/split.hpp"

namespace rlab::mitigation {

namespace {

std::size_t common_width(const std::vector<PairFeatureVector>& features) {
  if (features.empty()) throw EmptyInput("no feature vectors");
  const std::size_t w = features.front().width();
  for (const auto& f : features) {
    if (f.width() != w) throw ShapeError("feature vectors have different widths");
  }
  return w;
}

void check_labels(const std::vector<PairFeatureVector>& features, std::span<const double> labels) {
  if (labels.size() != features.size()) throw AlignmentError("features and labels differ in length");
  for (double y : labels) {
    if (!(y >= 0.0 && y <= 1.0)) throw DegenerateInput("BLEU labels must lie in [0, 1]");
  }
}

}  // namespace

BleuRegressor::BleuRegressor(std::vector<double> weights, double bias, double lambda, FeaturizerConfig featurizer)
    : weights_(std::move(weights)), bias_(bias), lambda_(lambda), featurizer_(featurizer) {}

double BleuRegressor::raw(std::span<const double> features) const {
  if (features.size() != weights_.size()) {
    throw ShapeError("regressor expects width " + std::to_string(weights_.size()) + ", got " +
                     std::to_string(features.size()));
  }
  double y = bias_;
  for (std::size_t i = 0; i < weights_.size(); ++i) y += weights_[i] * features[i];
  return y;
}

double BleuRegressor::predict(std::span<const double> features) const {
  return std::clamp(raw(features), 0.0, 1.0);
}

nlohmann::json BleuRegressor::to_json() const {
  return {{"type", "ridge"},
          {"weights", weights_},
          {"bias", bias_},
          {"lambda", lambda_},
          {"featurizer", featurizer_}};
}

BleuRegressor BleuRegressor::from_json(const nlohmann::json& j) {
  if (j.value("type", "") != "ridge") throw FormatError("not a ridge regressor document");
  BleuRegressor r(j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>(),
                  j.at("lambda").get<double>(), j.at("featurizer").get<FeaturizerConfig>());
  if (r.width() != r.featurizer().width()) throw FormatError("regressor width does not match its featurizer");
  return r;
}

BleuRegressor fit_ridge(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                        std::span<const std::size_t> rows, double lambda, const FeaturizerConfig& featurizer) {
  if (!(lambda >= 0.0)) throw ConfigError("ridge lambda must be nonnegative");
  if (rows.empty()) throw EmptyInput("no training rows");
  const std::size_t d = common_width(features);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& f = features[rows[static_cast<std::size_t>(r)]].values;
    for (std::size_t c = 0; c < d; ++c) x(r, static_cast<Eigen::Index>(c)) = f[c];
    y(r) = labels[rows[static_cast<std::size_t>(r)]];
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  x.rowwise() -= x_mean;
  y.array() -= y_mean;

  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = x.transpose() * y;
  Eigen::VectorXd w;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (qr.rank() < gram.rows()) throw SingularMatrix("design matrix is rank deficient and lambda is 0");
    w = qr.solve(rhs);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw SingularMatrix("ridge system could not be factorized");
    w = ldlt.solve(rhs);
  }
  if (!w.allFinite()) throw NumericError("ridge solution is not finite");
  const double bias = y_mean - x_mean.dot(w);
  return BleuRegressor(std::vector<double>(w.data(), w.data() + w.size()), bias, lambda, featurizer);
}

RegressionMetrics regression_metrics(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) throw AlignmentError("predictions and labels differ in length");
  if (predictions.empty()) throw EmptyInput("no predictions");
  RegressionMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double e = predictions[i] - labels[i];
    m.mse += e * e;
    m.mae += std::abs(e);
  }
  m.mse /= static_cast<double>(labels.size());
  m.mae /= static_cast<double>(labels.size());
  m.rmse = std::sqrt(m.mse);
  return m;
}

RegressorFit train_bleu_regressor(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                                  double lambda, std::uint64_t seed, const FeaturizerConfig& featurizer) {
  if (features.size() < 10) throw SizeError("the regressor needs at least 10 instances");
  common_width(features);
  check_labels(features, labels);
  const auto split = holdout_split(features.size(), 0.8, seed);
  RegressorFit fit;
  fit.model = fit_ridge(features, labels, split.train, lambda, featurizer);
  std::vector<double> pred, gold;
  for (auto i : split.test) {
    pred.push_back(fit.model.predict(features[i]));
    gold.push_back(labels[i]);
  }
  fit.holdout = regression_metrics(pred, gold);
  fit.train_size = split.train.size();
  fit.test_size = split.test.size();
  return fit;
}

double select_ridge_lambda(const std::vector<PairFeatureVector>& features, std::span<const double> labels,
                           std::span<const double> grid, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("empty lambda grid");
  if (features.size() < 10) throw SizeError("the regressor needs at least 10 instances");
  check_labels(features, labels);
  const auto outer = holdout_split(features.size(), 0.8, seed);
  const auto inner = holdout_split(outer.train.size(), 0.8, derive_seed(seed, 1));
  std::vector<std::size_t> fit_rows, val_rows;
  for (auto i : inner.train) fit_rows.push_back(outer.train[i]);
  for (auto i : inner.test) val_rows.push_back(outer.train[i]);
  double best = grid.front();
  double best_mse = INFINITY;
  for (double lambda : grid) {
    const auto model = fit_ridge(features, labels, fit_rows, lambda);
    std::vector<double> pred, gold;
    for (auto i : val_rows) {
      pred.push_back(model.predict(features[i]));
      gold.push_back(labels[i]);
    }
    const double mse = regression_metrics(pred, gold).mse;
    if (mse < best_mse) {
      best_mse = mse;
      best = lambda;
    }
  }
  return best;
}

}  // namespace rlab::mitigation
