#pragma once

#include "semipso/autodiff.hpp"
#include "semipso/tensor.hpp"

namespace semipso {

/// Every probability is clamped to [kProbEps, 1 - kProbEps] before a log.
inline constexpr double kProbEps = 1e-7;

/// Coefficients of the segmenter objective
///   L_seg = L_bce + l_adv * L_adv + l_semi_adv * L_semi_adv + l_semi_bce * L_semi_bce
/// plus the confidence threshold of the self-training term and its warm-up.
struct LossWeights {
  double lambda_adv = 0.1;
  double lambda_semi_adv = 0.004;
  double lambda_semi_bce = 0.1;
  double t_semi_mask = 0.1;
  long warmup_iters = 0;
  /// Also hold lambda_semi_adv at zero during warm-up.
  bool gate_semi_adv = false;

  /// Rejects negative coefficients, thresholds outside [0,1], negative warm-up.
  void validate() const;
};

/// Unweighted loss components of one segmenter step.
struct LossTerms {
  double bce = 0;
  double adv = 0;
  double semi_adv = 0;
  double semi_bce = 0;
  double masked_pixel_fraction = 0;
};

struct LossBreakdown {
  double bce = 0;
  double adv = 0;
  double semi_adv = 0;
  double semi_bce = 0;
  double total = 0;
  double masked_pixel_fraction = 0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

/// Coefficients in force at `iteration` after the warm-up gate.
struct EffectiveWeights {
  double adv = 0;
  double semi_adv = 0;
  double semi_bce = 0;
};

EffectiveWeights effective_weights(const LossWeights& weights, long iteration);

/// Weighted total with the warm-up gate: lambda_semi_bce counts as 0 while
/// iteration < warmup_iters. Components are reported unweighted.
LossBreakdown seg_total_loss(const LossTerms& terms, const LossWeights& weights, long iteration);

// Value-level losses. All means are over every element of the map (n*h*w for
// single-channel maps).

template <Real T>
T bce_loss(const Tensor4<T>& pred, const Tensor4<T>& target);

template <Real T>
T adv_loss(const Tensor4<T>& d_out);

/// Hard pseudo-labels: 1 where s > 0.5, else 0.
template <Real T>
Tensor4<T> virtual_labels(const Tensor4<T>& s);

/// Indicator of d_out > threshold.
template <Real T>
Tensor4<T> confidence_mask(const Tensor4<T>& d_out, T threshold);

/// Masked self-training BCE against virtual_labels(s), normalised by the
/// total pixel count regardless of how many pixels the mask keeps.
template <Real T>
T semi_bce_loss(const Tensor4<T>& s, const Tensor4<T>& d_out, T threshold);

template <Real T>
T discriminator_loss(const Tensor4<T>& d_fake, const Tensor4<T>& d_real);

// Tape versions. Targets, virtual labels and masks are constants.

template <Real T>
Var<T> bce_loss(Var<T> pred, const Tensor4<T>& target);

template <Real T>
Var<T> adv_loss(Var<T> d_out);

/// Gradient flows only through `s`; `d_out` only selects pixels.
template <Real T>
Var<T> semi_bce_loss(Var<T> s, const Tensor4<T>& d_out, T threshold);

template <Real T>
Var<T> discriminator_loss(Var<T> d_fake, Var<T> d_real);

}  // namespace semipso
