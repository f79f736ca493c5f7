#include "semipso/tensor.hpp"

#include <cmath>
#include <numeric>

#include "semipso/error.hpp"

namespace semipso {

std::string Shape4::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + "]";
}

void require_same_shape(const Shape4& a, const Shape4& b, const char* what) {
  if (a != b) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
  }
}

template <Real T>
Tensor4<T>::Tensor4(Shape4 shape, T fill) : shape_(shape), data_(shape.numel(), fill) {
  require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          ErrorCode::kInvalidArgument, "negative tensor dimension " + shape.str());
}

template <Real T>
Tensor4<T>::Tensor4(Shape4 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          ErrorCode::kInvalidArgument, "negative tensor dimension " + shape.str());
  require(data_.size() == shape.numel(), ErrorCode::kShapeMismatch,
          "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
              shape.str());
}

template <Real T>
Tensor4<T> Tensor4<T>::item(int index) const {
  require(index >= 0 && index < shape_.n, ErrorCode::kInvalidArgument,
          "batch index " + std::to_string(index) + " out of range for " + shape_.str());
  const std::size_t stride = static_cast<std::size_t>(shape_.c) * shape_.h * shape_.w;
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(stride * index);
  return Tensor4(Shape4{1, shape_.c, shape_.h, shape_.w},
                 std::vector<T>(first, first + static_cast<std::ptrdiff_t>(stride)));
}

template <Real T>
Tensor4<T> Tensor4<T>::reshaped(Shape4 shape) const {
  require(shape.numel() == numel(), ErrorCode::kShapeMismatch,
          "cannot reshape " + shape_.str() + " to " + shape.str());
  return Tensor4(shape, data_);
}

template <Real T>
T Tensor4<T>::sum() const noexcept {
  return std::accumulate(data_.begin(), data_.end(), T(0));
}

template <Real T>
bool Tensor4<T>::all_finite() const noexcept {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <Real T>
Tensor4<T> stack_batch(std::span<const Tensor4<T>> items) {
  require(!items.empty(), ErrorCode::kInvalidArgument, "stack_batch: no items");
  Shape4 one = items.front().shape();
  std::vector<T> out;
  out.reserve(one.numel() * items.size());
  int total = 0;
  for (const auto& it : items) {
    require_same_shape(Shape4{one.n, one.c, one.h, one.w}, it.shape(), "stack_batch");
    out.insert(out.end(), it.data().begin(), it.data().end());
    total += it.shape().n;
  }
  return Tensor4<T>(Shape4{total, one.c, one.h, one.w}, std::move(out));
}

template <Real T>
T dot(const Tensor4<T>& a, const Tensor4<T>& b) {
  require_same_shape(a.shape(), b.shape(), "dot");
  T acc = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += a[i] * b[i];
  return acc;
}

template class Tensor4<float>;
template class Tensor4<double>;
template Tensor4<float> stack_batch(std::span<const Tensor4<float>>);
template Tensor4<double> stack_batch(std::span<const Tensor4<double>>);
template float dot(const Tensor4<float>&, const Tensor4<float>&);
template double dot(const Tensor4<double>&, const Tensor4<double>&);

}  // namespace semipso
