#include "semipso/losses.hpp"

#include <algorithm>
#include <cmath>

#include "semipso/error.hpp"

namespace semipso {
namespace {

template <Real T>
struct Clamp {
  T lo = static_cast<T>(kProbEps);
  T hi = static_cast<T>(1.0 - kProbEps);

  [[nodiscard]] T operator()(T p) const { return std::clamp(p, lo, hi); }
  // Derivative of the clamp itself: zero on the saturated parts.
  [[nodiscard]] bool active(T p) const { return p >= lo && p <= hi; }
};

template <Real T>
void require_binary(const Tensor4<T>& t, const char* what) {
  for (T v : t.data()) {
    if (v != T(0) && v != T(1)) {
      fail(ErrorCode::kInvalidArgument, std::string(what) + ": target is not binary (found " +
                                            std::to_string(static_cast<double>(v)) + ")");
    }
  }
}

template <Real T>
T mean_scale(const Tensor4<T>& t) {
  require(t.numel() > 0, ErrorCode::kInvalidArgument, "loss over an empty map");
  return T(1) / static_cast<T>(t.numel());
}

// Log-likelihood of a hard label under probability p, with clamping.
template <Real T>
double label_log_likelihood(T p, bool positive, const Clamp<T>& clamp) {
  const double cp = static_cast<double>(clamp(p));
  return positive ? std::log(cp) : std::log(1.0 - cp);
}

// d/dp of the above.
template <Real T>
T label_log_likelihood_grad(T p, bool positive, const Clamp<T>& clamp) {
  if (!clamp.active(p)) return T(0);
  return positive ? T(1) / p : T(-1) / (T(1) - p);
}

}  // namespace

void LossWeights::validate() const {
  require(lambda_adv >= 0 && lambda_semi_adv >= 0 && lambda_semi_bce >= 0,
          ErrorCode::kInvalidConfig, "loss weights must be nonnegative");
  require(t_semi_mask >= 0 && t_semi_mask <= 1, ErrorCode::kInvalidConfig,
          "t_semi_mask must lie in [0, 1]");
  require(warmup_iters >= 0, ErrorCode::kInvalidConfig, "warmup_iters must be >= 0");
}

EffectiveWeights effective_weights(const LossWeights& weights, long iteration) {
  const bool warming = iteration < weights.warmup_iters;
  return EffectiveWeights{
      weights.lambda_adv,
      warming && weights.gate_semi_adv ? 0.0 : weights.lambda_semi_adv,
      warming ? 0.0 : weights.lambda_semi_bce,
  };
}

LossBreakdown seg_total_loss(const LossTerms& terms, const LossWeights& weights, long iteration) {
  const EffectiveWeights w = effective_weights(weights, iteration);
  LossBreakdown out;
  out.bce = terms.bce;
  out.adv = terms.adv;
  out.semi_adv = terms.semi_adv;
  out.semi_bce = terms.semi_bce;
  out.masked_pixel_fraction = terms.masked_pixel_fraction;
  out.total = terms.bce + w.adv * terms.adv + w.semi_adv * terms.semi_adv +
              w.semi_bce * terms.semi_bce;
  return out;
}

template <Real T>
T bce_loss(const Tensor4<T>& pred, const Tensor4<T>& target) {
  require_same_shape(pred.shape(), target.shape(), "bce_loss");
  require_binary(target, "bce_loss");
  const Clamp<T> clamp;
  double acc = 0;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    acc += label_log_likelihood(pred[i], target[i] != T(0), clamp);
  }
  return static_cast<T>(-acc) * mean_scale(pred);
}

template <Real T>
T adv_loss(const Tensor4<T>& d_out) {
  const Clamp<T> clamp;
  double acc = 0;
  for (T v : d_out.data()) acc += label_log_likelihood(v, true, clamp);
  return static_cast<T>(-acc) * mean_scale(d_out);
}

template <Real T>
Tensor4<T> virtual_labels(const Tensor4<T>& s) {
  Tensor4<T> out(s.shape());
  for (std::size_t i = 0; i < s.numel(); ++i) out[i] = s[i] > T(0.5) ? T(1) : T(0);
  return out;
}

template <Real T>
Tensor4<T> confidence_mask(const Tensor4<T>& d_out, T threshold) {
  require(threshold >= 0 && threshold <= 1, ErrorCode::kInvalidArgument,
          "confidence threshold must lie in [0, 1]");
  Tensor4<T> out(d_out.shape());
  for (std::size_t i = 0; i < d_out.numel(); ++i) out[i] = d_out[i] > threshold ? T(1) : T(0);
  return out;
}

template <Real T>
T semi_bce_loss(const Tensor4<T>& s, const Tensor4<T>& d_out, T threshold) {
  require_same_shape(s.shape(), d_out.shape(), "semi_bce_loss");
  const Tensor4<T> mask = confidence_mask(d_out, threshold);
  const Clamp<T> clamp;
  double acc = 0;
  for (std::size_t i = 0; i < s.numel(); ++i) {
    if (mask[i] == T(0)) continue;
    acc += label_log_likelihood(s[i], s[i] > T(0.5), clamp);
  }
  return static_cast<T>(-acc) * mean_scale(s);
}

template <Real T>
T discriminator_loss(const Tensor4<T>& d_fake, const Tensor4<T>& d_real) {
  require_same_shape(d_fake.shape(), d_real.shape(), "discriminator_loss");
  const Clamp<T> clamp;
  double acc = 0;
  for (std::size_t i = 0; i < d_fake.numel(); ++i) {
    acc += label_log_likelihood(d_fake[i], false, clamp) +
           label_log_likelihood(d_real[i], true, clamp);
  }
  return static_cast<T>(-acc) * mean_scale(d_fake);
}

template <Real T>
Var<T> bce_loss(Var<T> pred, const Tensor4<T>& target) {
  const T value = bce_loss(pred.value(), target);
  const std::size_t pi = pred.id;
  return pred.tape->record(Tensor4<T>::scalar(value), {pred},
                           [pi, target](Tape<T>& t, const Tensor4<T>& gy) {
                             const Tensor4<T>& p = t.value(Var<T>{&t, pi});
                             const Clamp<T> clamp;
                             const T scale = -gy[0] * mean_scale(p);
                             Tensor4<T>& gp = t.grad_buffer(pi);
                             for (std::size_t i = 0; i < p.numel(); ++i) {
                               gp[i] += scale * label_log_likelihood_grad(p[i], target[i] != T(0), clamp);
                             }
                           });
}

template <Real T>
Var<T> adv_loss(Var<T> d_out) {
  const T value = adv_loss(d_out.value());
  const std::size_t di = d_out.id;
  return d_out.tape->record(Tensor4<T>::scalar(value), {d_out},
                            [di](Tape<T>& t, const Tensor4<T>& gy) {
                              const Tensor4<T>& d = t.value(Var<T>{&t, di});
                              const Clamp<T> clamp;
                              const T scale = -gy[0] * mean_scale(d);
                              Tensor4<T>& gd = t.grad_buffer(di);
                              for (std::size_t i = 0; i < d.numel(); ++i) {
                                gd[i] += scale * label_log_likelihood_grad(d[i], true, clamp);
                              }
                            });
}

template <Real T>
Var<T> semi_bce_loss(Var<T> s, const Tensor4<T>& d_out, T threshold) {
  const T value = semi_bce_loss(s.value(), d_out, threshold);
  Tensor4<T> mask = confidence_mask(d_out, threshold);
  Tensor4<T> labels = virtual_labels(s.value());
  const std::size_t si = s.id;
  return s.tape->record(
      Tensor4<T>::scalar(value), {s},
      [si, mask = std::move(mask), labels = std::move(labels)](Tape<T>& t, const Tensor4<T>& gy) {
        const Tensor4<T>& p = t.value(Var<T>{&t, si});
        const Clamp<T> clamp;
        const T scale = -gy[0] * mean_scale(p);
        Tensor4<T>& gp = t.grad_buffer(si);
        for (std::size_t i = 0; i < p.numel(); ++i) {
          if (mask[i] == T(0)) continue;
          gp[i] += scale * label_log_likelihood_grad(p[i], labels[i] != T(0), clamp);
        }
      });
}

template <Real T>
Var<T> discriminator_loss(Var<T> d_fake, Var<T> d_real) {
  const T value = discriminator_loss(d_fake.value(), d_real.value());
  const std::size_t fi = d_fake.id;
  const std::size_t ri = d_real.id;
  const bool f_grad = d_fake.tape->requires_grad(d_fake);
  const bool r_grad = d_fake.tape->requires_grad(d_real);
  return d_fake.tape->record(
      Tensor4<T>::scalar(value), {d_fake, d_real},
      [fi, ri, f_grad, r_grad](Tape<T>& t, const Tensor4<T>& gy) {
        const Clamp<T> clamp;
        if (f_grad) {
          const Tensor4<T>& f = t.value(Var<T>{&t, fi});
          const T scale = -gy[0] * mean_scale(f);
          Tensor4<T>& gf = t.grad_buffer(fi);
          for (std::size_t i = 0; i < f.numel(); ++i) {
            gf[i] += scale * label_log_likelihood_grad(f[i], false, clamp);
          }
        }
        if (r_grad) {
          const Tensor4<T>& r = t.value(Var<T>{&t, ri});
          const T scale = -gy[0] * mean_scale(r);
          Tensor4<T>& gr = t.grad_buffer(ri);
          for (std::size_t i = 0; i < r.numel(); ++i) {
            gr[i] += scale * label_log_likelihood_grad(r[i], true, clamp);
          }
        }
      });
}

#define SEMIPSO_INSTANTIATE_LOSSES(T)                                   \
  template T bce_loss(const Tensor4<T>&, const Tensor4<T>&);            \
  template T adv_loss(const Tensor4<T>&);                               \
  template Tensor4<T> virtual_labels(const Tensor4<T>&);                \
  template Tensor4<T> confidence_mask(const Tensor4<T>&, T);            \
  template T semi_bce_loss(const Tensor4<T>&, const Tensor4<T>&, T);    \
  template T discriminator_loss(const Tensor4<T>&, const Tensor4<T>&);  \
  template Var<T> bce_loss(Var<T>, const Tensor4<T>&);                  \
  template Var<T> adv_loss(Var<T>);                                     \
  template Var<T> semi_bce_loss(Var<T>, const Tensor4<T>&, T);          \
  template Var<T> discriminator_loss(Var<T>, Var<T>);

SEMIPSO_INSTANTIATE_LOSSES(float)
SEMIPSO_INSTANTIATE_LOSSES(double)

}  // namespace semipso
