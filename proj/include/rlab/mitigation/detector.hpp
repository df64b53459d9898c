#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/corpus/corpus.hpp"
#include "rlab/mitigation/features.hpp"

namespace rlab::mitigation {

// Class 1 is real (human) data, class 0 is generated.
enum class DetectorKind { LogisticRegression, LinearDiscriminant };

std::string detector_kind_name(DetectorKind kind);
DetectorKind parse_detector_kind(const std::string& name);  // "logistic" or "lda"

struct DetectorOptions {
  double l2 = 1.0;             // logistic penalty on standardized weights
  double shrinkage = 0.1;      // LDA covariance shrinkage toward a scaled identity
  std::size_t max_iterations = 50;
  double tolerance = 1e-8;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;      // balancing and split
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  double recall = 0.0;     // of class 1 at threshold 0.5
  double precision = 0.0;  // of class 1 at threshold 0.5
};

class DetectorModel {
 public:
  DetectorModel() = default;
  DetectorModel(DetectorKind kind, std::vector<double> mean, std::vector<double> scale, std::vector<double> weights,
                double bias, FeaturizerConfig featurizer);

  // Class-1 probability in [0, 1].
  double probability(std::span<const double> features) const;
  double probability(const PairFeatureVector& f) const { return probability(f.values); }
  double decision(std::span<const double> features) const;

  DetectorKind kind() const { return kind_; }
  std::size_t width() const { return weights_.size(); }
  const FeaturizerConfig& featurizer() const { return featurizer_; }

  nlohmann::json to_json() const;
  static DetectorModel from_json(const nlohmann::json& j);

 private:
  DetectorKind kind_ = DetectorKind::LogisticRegression;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  FeaturizerConfig featurizer_;
};

struct DetectorFit {
  DetectorModel model;
  ClassificationMetrics holdout;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Balances the classes by seeded downsampling of the larger one, then fits on
// a seeded split and scores the held-out part. Throws EmptyClass when a class
// is missing. When groups is non-empty (one id per row) the split keeps every
// group on one side.
DetectorFit fit_detector(const std::vector<PairFeatureVector>& features, std::span<const int> labels,
                         DetectorKind kind, const DetectorOptions& options = {},
                         const FeaturizerConfig& featurizer = {}, std::span<const std::size_t> groups = {});

// Featurizes real pairs as class 1 and synthetic pairs as class 0. Pairs with
// the same source form one group, so a real pair and its generated twin never
// straddle the train/test split.
DetectorFit train_detector(const corpus::Corpus& real, const corpus::Corpus& synthetic, DetectorKind kind,
                           const DetectorOptions& options = {}, const FeaturizerConfig& featurizer = {});

ClassificationMetrics classification_metrics(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace rlab::mitigation
