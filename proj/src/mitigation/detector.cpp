#include "rlab/mitigation/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/metrics/stats.hpp"
#include "rlab/mitigation/split.hpp"

namespace rlab::mitigation {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Conjugate gradients for a symmetric positive definite operator.
template <typename Op>
VectorXd conjugate_gradient(const Op& apply, const VectorXd& b, std::size_t max_iter, double tol) {
  VectorXd x = VectorXd::Zero(b.size());
  VectorXd r = b;
  VectorXd p = r;
  double rs = r.squaredNorm();
  const double stop = tol * tol * std::max(b.squaredNorm(), 1e-300);
  for (std::size_t it = 0; it < max_iter && rs > stop; ++it) {
    const VectorXd ap = apply(p);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double next = r.squaredNorm();
    p = r + (next / rs) * p;
    rs = next;
  }
  return x;
}

struct Standardized {
  MatrixXd x;
  std::vector<double> mean;
  std::vector<double> scale;
};

Standardized standardize(const std::vector<PairFeatureVector>& features, std::span<const std::size_t> rows) {
  const std::size_t d = features.front().width();
  Standardized s;
  s.x.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = features[rows[r]].values;
    if (f.size() != d) throw ShapeError("feature vectors have different widths");
    for (std::size_t c = 0; c < d; ++c) s.x(static_cast<Index>(r), static_cast<Index>(c)) = f[c];
  }
  s.mean.resize(d);
  s.scale.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    auto col = s.x.col(static_cast<Index>(c));
    const double mu = col.mean();
    const double var = (col.array() - mu).square().mean();
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    col = (col.array() - mu) / sd;
    s.mean[c] = mu;
    s.scale[c] = sd;
  }
  return s;
}

// Penalized logistic regression by truncated Newton steps.
void fit_logistic(const MatrixXd& x, const VectorXd& y, const DetectorOptions& opt, VectorXd& w, double& b) {
  const Index n = x.rows();
  w = VectorXd::Zero(x.cols());
  b = 0.0;
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    VectorXd z = x * w;
    z.array() += b;
    VectorXd p(n), s(n);
    for (Index i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      s(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
    }
    const VectorXd resid = p - y;
    VectorXd grad(x.cols() + 1);
    grad.head(x.cols()) = x.transpose() * resid + opt.l2 * w;
    grad(x.cols()) = resid.sum();
    if (grad.norm() < opt.tolerance * static_cast<double>(n)) break;
    auto hess = [&](const VectorXd& v) {
      VectorXd xv = x * v.head(x.cols());
      xv.array() += v(x.cols());
      xv.array() *= s.array();
      VectorXd out(v.size());
      out.head(x.cols()) = x.transpose() * xv + opt.l2 * v.head(x.cols());
      out(x.cols()) = xv.sum() + 1e-8 * v(x.cols());
      return out;
    };
    const VectorXd step = conjugate_gradient(hess, -grad, 100, 1e-6);
    w += step.head(x.cols());
    b += step(x.cols());
    if (step.norm() < opt.tolerance) break;
  }
}

// Shrinkage LDA with equal priors on balanced data.
void fit_lda(const MatrixXd& x, const VectorXd& y, const DetectorOptions& opt, VectorXd& w, double& b) {
  const Index n = x.rows();
  const Index d = x.cols();
  VectorXd mu1 = VectorXd::Zero(d), mu0 = VectorXd::Zero(d);
  double n1 = 0.0, n0 = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (y(i) > 0.5) {
      mu1 += x.row(i).transpose();
      n1 += 1.0;
    } else {
      mu0 += x.row(i).transpose();
      n0 += 1.0;
    }
  }
  mu1 /= n1;
  mu0 /= n0;
  MatrixXd centered = x;
  for (Index i = 0; i < n; ++i) centered.row(i) -= (y(i) > 0.5 ? mu1 : mu0).transpose();
  const double trace = centered.squaredNorm() / static_cast<double>(n);
  const double ridge = opt.shrinkage * std::max(trace / static_cast<double>(d), 1e-12);
  const double keep = 1.0 - opt.shrinkage;
  auto cov = [&](const VectorXd& v) {
    const VectorXd cv = centered * v;
    VectorXd out = (keep / static_cast<double>(n)) * (centered.transpose() * cv);
    out += ridge * v;
    return out;
  };
  w = conjugate_gradient(cov, mu1 - mu0, 500, 1e-10);
  b = -0.5 * (mu1 + mu0).dot(w);
}

}  // namespace

std::string detector_kind_name(DetectorKind kind) {
  return kind == DetectorKind::LogisticRegression ? "logistic" : "lda";
}

DetectorKind parse_detector_kind(const std::string& name) {
  if (name == "logistic") return DetectorKind::LogisticRegression;
  if (name == "lda") return DetectorKind::LinearDiscriminant;
  throw ConfigError("unknown detector kind '" + name + "' (expected logistic or lda)");
}

DetectorModel::DetectorModel(DetectorKind kind, std::vector<double> mean, std::vector<double> scale,
                             std::vector<double> weights, double bias, FeaturizerConfig featurizer)
    : kind_(kind),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      weights_(std::move(weights)),
      bias_(bias),
      featurizer_(featurizer) {
  if (mean_.size() != weights_.size() || scale_.size() != weights_.size()) {
    throw ShapeError("detector statistics and weights differ in width");
  }
}

double DetectorModel::decision(std::span<const double> features) const {
  if (features.size() != weights_.size()) {
    throw ShapeError("detector expects width " + std::to_string(weights_.size()) + ", got " +
                     std::to_string(features.size()));
  }
  double z = bias_;
  for (std::size_t i = 0; i < weights_.size(); ++i) z += weights_[i] * (features[i] - mean_[i]) / scale_[i];
  return z;
}

double DetectorModel::probability(std::span<const double> features) const { return sigmoid(decision(features)); }

nlohmann::json DetectorModel::to_json() const {
  return {{"type", "detector"}, {"kind", detector_kind_name(kind_)}, {"mean", mean_}, {"scale", scale_},
          {"weights", weights_}, {"bias", bias_}, {"featurizer", featurizer_}};
}

DetectorModel DetectorModel::from_json(const nlohmann::json& j) {
  if (j.value("type", "") != "detector") throw FormatError("not a detector document");
  DetectorModel m(parse_detector_kind(j.at("kind").get<std::string>()), j.at("mean").get<std::vector<double>>(),
                  j.at("scale").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>(),
                  j.at("bias").get<double>(), j.at("featurizer").get<FeaturizerConfig>());
  if (m.width() != m.featurizer().width()) throw FormatError("detector width does not match its featurizer");
  return m;
}

ClassificationMetrics classification_metrics(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) throw AlignmentError("probabilities and labels differ in length");
  ClassificationMetrics m;
  m.auc = metrics::roc_auc(probabilities, labels);
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= 0.5;
    const bool actual = labels[i] == 1;
    if (predicted == actual) ++correct;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  return m;
}

DetectorFit fit_detector(const std::vector<PairFeatureVector>& features, std::span<const int> labels,
                         DetectorKind kind, const DetectorOptions& options, const FeaturizerConfig& featurizer,
                         std::span<const std::size_t> groups) {
  if (features.size() != labels.size()) throw AlignmentError("features and labels differ in length");
  if (!groups.empty() && groups.size() != labels.size()) throw AlignmentError("groups and labels differ in length");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos.push_back(i);
    } else if (labels[i] == 0) {
      neg.push_back(i);
    } else {
      throw ConfigError("detector labels must be 0 or 1");
    }
  }
  if (pos.empty() || neg.empty()) throw EmptyClass("detector training needs both classes");
  Rng rng(derive_seed(options.seed, 11));
  auto& larger = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  if (larger.size() > keep) {
    rng.shuffle(larger);
    larger.resize(keep);
    std::sort(larger.begin(), larger.end());
  }
  std::vector<std::size_t> rows = pos;
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::sort(rows.begin(), rows.end());

  std::vector<std::size_t> row_groups;
  for (auto i : rows) row_groups.push_back(groups.empty() ? i : groups[i]);
  const auto split = grouped_holdout_split(row_groups, options.train_fraction, derive_seed(options.seed, 12));
  std::vector<std::size_t> train_rows, test_rows;
  for (auto i : split.train) train_rows.push_back(rows[i]);
  for (auto i : split.test) test_rows.push_back(rows[i]);

  Standardized s = standardize(features, train_rows);
  VectorXd y(static_cast<Index>(train_rows.size()));
  for (std::size_t r = 0; r < train_rows.size(); ++r) y(static_cast<Index>(r)) = labels[train_rows[r]];
  bool has_pos = false, has_neg = false;
  for (Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw EmptyClass("training split lost a class; supply more data");

  VectorXd w;
  double b = 0.0;
  if (kind == DetectorKind::LogisticRegression) {
    fit_logistic(s.x, y, options, w, b);
  } else {
    fit_lda(s.x, y, options, w, b);
  }
  if (!w.allFinite() || !std::isfinite(b)) throw NumericError("detector fit diverged");

  DetectorFit fit;
  fit.model = DetectorModel(kind, std::move(s.mean), std::move(s.scale), std::vector<double>(w.data(), w.data() + w.size()),
                            b, featurizer);
  std::vector<double> probs;
  std::vector<int> gold;
  for (auto i : test_rows) {
    probs.push_back(fit.model.probability(features[i]));
    gold.push_back(labels[i]);
  }
  fit.train_size = train_rows.size();
  fit.test_size = test_rows.size();
  bool test_pos = false, test_neg = false;
  for (int g : gold) (g == 1 ? test_pos : test_neg) = true;
  if (!test_pos || !test_neg) throw EmptyClass("held-out split lost a class; supply more data");
  fit.holdout = classification_metrics(probs, gold);
  return fit;
}

DetectorFit train_detector(const corpus::Corpus& real, const corpus::Corpus& synthetic, DetectorKind kind,
                           const DetectorOptions& options, const FeaturizerConfig& featurizer) {
  if (real.empty() || synthetic.empty()) throw EmptyClass("detector training needs real and synthetic pairs");
  auto features = featurize_corpus(real, featurizer);
  auto synth = featurize_corpus(synthetic, featurizer);
  std::vector<int> labels(features.size(), 1);
  labels.resize(features.size() + synth.size(), 0);
  features.insert(features.end(), std::make_move_iterator(synth.begin()), std::make_move_iterator(synth.end()));
  std::map<corpus::Tokens, std::size_t> ids;
  std::vector<std::size_t> groups;
  for (const auto* c : {&real, &synthetic}) {
    for (const auto& p : c->pairs()) groups.push_back(ids.try_emplace(p.source(), ids.size()).first->second);
  }
  return fit_detector(features, labels, kind, options, featurizer, groups);
}

}  // namespace rlab::mitigation
