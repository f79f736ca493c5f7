#pragma once

#include <span>
#include <vector>

#include "semipso/tensor.hpp"

namespace semipso {

struct MetricReport {
  double roc_auc = 0;
  double pr_auc = 0;
  double score = 0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Area under the ROC curve by trapezoidal integration over every distinct
/// threshold; tied scores count one half, matching the Mann-Whitney statistic.
/// Labels must be 0/1 with both classes present (kSingleClassLabels otherwise).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Area under the precision-recall curve with step-wise interpolation:
/// sum over distinct thresholds of (recall_k - recall_{k-1}) * precision_k.
/// Requires at least one positive (kNoPositiveLabels otherwise).
double pr_auc(std::span<const double> scores, std::span<const int> labels);

/// Arithmetic mean of the two areas.
double score(double roc, double pr);

MetricReport make_report(std::span<const double> scores, std::span<const int> labels);

/// Pools every pixel of every prediction/mask pair into one list. When
/// `eval_masks` is non-empty only pixels where it is nonzero are kept.
template <Real T>
MetricReport pooled_report(std::span<const Tensor4<T>> predictions,
                           std::span<const Tensor4<T>> masks,
                           std::span<const Tensor4<T>> eval_masks = {});

}  // namespace semipso
