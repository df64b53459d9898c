#pragma once

#include <span>
#include <vector>

namespace rlab::metrics {

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Returns 0 when either side is
// constant. Throws AlignmentError on size mismatch or fewer than two points.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

// Area under the ROC curve via the rank-sum statistic, ties counted as half.
// Throws EmptyClass when either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double mean(std::span<const double> values);

}  // namespace rlab::metrics
