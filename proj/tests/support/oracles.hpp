#pragma once

// Reference implementations used only by tests. Each one is written
// independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "semipso/tensor.hpp"

namespace oracle {

using semipso::Shape4;
using semipso::Tensor4;

/// Cross-correlation by direct summation over every output/kernel index.
inline Tensor4<double> conv2d(const Tensor4<double>& x, const Tensor4<double>& k, int stride,
                              int pad) {
  const Shape4 xs = x.shape();
  const Shape4 ks = k.shape();
  const int oh = (xs.h + 2 * pad - ks.h) / stride + 1;
  const int ow = (xs.w + 2 * pad - ks.w) / stride + 1;
  Tensor4<double> y(Shape4{xs.n, ks.n, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int o = 0; o < ks.n; ++o)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = 0;
          for (int c = 0; c < xs.c; ++c)
            for (int a = 0; a < ks.h; ++a)
              for (int b = 0; b < ks.w; ++b) {
                const int yy = i * stride - pad + a;
                const int xx = j * stride - pad + b;
                if (yy < 0 || yy >= xs.h || xx < 0 || xx >= xs.w) continue;
                acc += x.at(n, c, yy, xx) * k.at(o, c, a, b);
              }
          y.at(n, o, i, j) = acc;
        }
  return y;
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
inline double roc_auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      if (s[i] > s[j]) good += 1;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

/// Enumerates every threshold "score >= t" from high to low and integrates
/// the ROC curve by trapezoids.
inline double roc_auc_thresholds(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> ts(s.begin(), s.end());
  double p = 0;
  double n = 0;
  for (int v : y) (v ? p : n) += 1;
  double prev_tpr = 0;
  double prev_fpr = 0;
  double area = 0;
  for (double t : ts) {
    double tp = 0;
    double fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    }
    const double tpr = tp / p;
    const double fpr = fp / n;
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

/// Step-wise PR area: sum over thresholds of (recall gain) * precision.
inline double pr_auc_thresholds(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> ts(s.begin(), s.end());
  double p = 0;
  for (int v : y) p += v;
  double prev_recall = 0;
  double area = 0;
  for (double t : ts) {
    double tp = 0;
    double pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        pos += 1;
        tp += y[i];
      }
    }
    const double recall = tp / p;
    area += (recall - prev_recall) * (tp / pos);
    prev_recall = recall;
  }
  return area;
}

struct FdResult {
  double max_rel_error = 0;
  std::size_t checked = 0;
  /// Coordinates where the loss is not smooth at the scale of h.
  std::size_t skipped = 0;
};

/// Relative error with a floor on the denominator so that gradients near zero
/// are compared in absolute terms.
inline double rel_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central differences of `f` around `x` at the given coordinates compared with
/// `grad`. A coordinate whose difference quotient changes between h and h/2
/// by more than `smooth_tol` straddles a kink or a jump and is skipped.
inline FdResult check_gradient(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x, const std::vector<double>& grad,
                               const std::vector<std::size_t>& coords, double smooth_tol = 1e-4) {
  FdResult r;
  for (std::size_t i : coords) {
    const double x0 = x[i];
    const double h = 1e-6 * std::max(1.0, std::abs(x0));
    const auto quotient = [&](double step) {
      x[i] = x0 + step;
      const double fp = f(x);
      x[i] = x0 - step;
      const double fm = f(x);
      x[i] = x0;
      return (fp - fm) / (2 * step);
    };
    const double d1 = quotient(h);
    const double d2 = quotient(h / 2);
    if (rel_error(d1, d2) > smooth_tol) {
      ++r.skipped;
      continue;
    }
    r.max_rel_error = std::max(r.max_rel_error, rel_error(grad[i], d1));
    ++r.checked;
  }
  return r;
}

inline Tensor4<double> random_tensor(Shape4 s, std::mt19937_64& rng, double lo = -1,
                                     double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor4<double> t(s);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

inline Tensor4<double> random_binary(Shape4 s, std::mt19937_64& rng, double p = 0.3) {
  std::bernoulli_distribution b(p);
  Tensor4<double> t(s);
  for (auto& v : t.data()) v = b(rng) ? 1.0 : 0.0;
  return t;
}

}  // namespace oracle
