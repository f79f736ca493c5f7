#pragma once

#include <cstdint>

#include "semipso/tensor.hpp"

namespace semipso {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

/// First/second moment accumulators for one parameter tensor.
template <Real T>
struct AdamState {
  Tensor4<T> m;
  Tensor4<T> v;
  std::int64_t t = 0;

  AdamState() = default;
  explicit AdamState(Shape4 shape) : m(shape), v(shape) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of `param` in place; increments state.t.
template <Real T>
void adam_step(Tensor4<T>& param, const Tensor4<T>& grad, AdamState<T>& state,
               const AdamHyper& hyper);

}  // namespace semipso
