#include "semipso/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semipso/error.hpp"

namespace semipso {
namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts validate(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorCode::kShapeMismatch,
          "scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
              std::to_string(labels.size()) + ")");
  ClassCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(!std::isnan(scores[i]), ErrorCode::kInvalidArgument, "NaN score");
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::kInvalidArgument,
            "labels must be 0 or 1");
    labels[i] == 1 ? ++c.pos : ++c.neg;
  }
  return c;
}

// Indices ordered by descending score.
std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Calls visit(tp, fp) after each block of tied scores, highest threshold first.
template <typename Visit>
void sweep(std::span<const double> scores, std::span<const int> labels, Visit visit) {
  const auto order = rank_descending(scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      labels[order[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    visit(tp, fp);
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = validate(scores, labels);
  require(c.pos > 0 && c.neg > 0, ErrorCode::kSingleClassLabels,
          "roc_auc needs both positive and negative labels");
  double area = 0;
  std::size_t prev_tp = 0;
  std::size_t prev_fp = 0;
  sweep(scores, labels, [&](std::size_t tp, std::size_t fp) {
    area += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp) * 0.5;
    prev_tp = tp;
    prev_fp = fp;
  });
  return area / (static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = validate(scores, labels);
  require(c.pos > 0, ErrorCode::kNoPositiveLabels, "pr_auc needs at least one positive label");
  double area = 0;
  std::size_t prev_tp = 0;
  sweep(scores, labels, [&](std::size_t tp, std::size_t fp) {
    if (tp == prev_tp) return;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += static_cast<double>(tp - prev_tp) / static_cast<double>(c.pos) * precision;
    prev_tp = tp;
  });
  return area;
}

double score(double roc, double pr) { return (roc + pr) / 2.0; }

MetricReport make_report(std::span<const double> scores, std::span<const int> labels) {
  MetricReport r;
  r.roc_auc = roc_auc(scores, labels);
  r.pr_auc = pr_auc(scores, labels);
  r.score = score(r.roc_auc, r.pr_auc);
  return r;
}

template <Real T>
MetricReport pooled_report(std::span<const Tensor4<T>> predictions,
                           std::span<const Tensor4<T>> masks,
                           std::span<const Tensor4<T>> eval_masks) {
  require(predictions.size() == masks.size(), ErrorCode::kShapeMismatch,
          "prediction and mask counts differ");
  require(eval_masks.empty() || eval_masks.size() == masks.size(), ErrorCode::kShapeMismatch,
          "evaluation mask count differs from mask count");
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    require_same_shape(predictions[k].shape(), masks[k].shape(), "pooled_report");
    if (!eval_masks.empty()) require_same_shape(eval_masks[k].shape(), masks[k].shape(), "pooled_report");
    for (std::size_t i = 0; i < masks[k].numel(); ++i) {
      if (!eval_masks.empty() && eval_masks[k][i] == T(0)) continue;
      scores.push_back(static_cast<double>(predictions[k][i]));
      labels.push_back(masks[k][i] > T(0.5) ? 1 : 0);
    }
  }
  return make_report(scores, labels);
}

template MetricReport pooled_report(std::span<const Tensor4<float>>,
                                    std::span<const Tensor4<float>>,
                                    std::span<const Tensor4<float>>);
template MetricReport pooled_report(std::span<const Tensor4<double>>,
                                    std::span<const Tensor4<double>>,
                                    std::span<const Tensor4<double>>);

}  // namespace semipso
