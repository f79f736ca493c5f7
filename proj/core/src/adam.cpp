#include "semipso/adam.hpp"

#include <cmath>

#include "semipso/error.hpp"

namespace semipso {

template <Real T>
void adam_step(Tensor4<T>& param, const Tensor4<T>& grad, AdamState<T>& state,
               const AdamHyper& hyper) {
  require_same_shape(param.shape(), grad.shape(), "adam_step");
  require(hyper.beta1 >= 0 && hyper.beta1 < 1 && hyper.beta2 >= 0 && hyper.beta2 < 1,
          ErrorCode::kInvalidArgument, "adam betas must lie in [0, 1)");
  if (state.m.empty() && param.numel() > 0) state = AdamState<T>(param.shape());
  require_same_shape(param.shape(), state.m.shape(), "adam_step state");

  state.t += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(hyper.beta1);
  const T b2 = static_cast<T>(hyper.beta2);
  const T step = static_cast<T>(hyper.lr / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(hyper.eps);
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const T g = grad[i];
    state.m[i] = b1 * state.m[i] + (1 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1 - b2) * g * g;
    // lr * m_hat / (sqrt(v_hat) + eps)
    param[i] -= step * state.m[i] / (std::sqrt(state.v[i]) * inv_sqrt_c2 + eps);
  }
}

template void adam_step(Tensor4<float>&, const Tensor4<float>&, AdamState<float>&,
                        const AdamHyper&);
template void adam_step(Tensor4<double>&, const Tensor4<double>&, AdamState<double>&,
                        const AdamHyper&);

}  // namespace semipso
