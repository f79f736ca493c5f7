#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace semipso {

/// Dimensions of a rank-4 array in [batch, channel, height, width] order.
struct Shape4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  [[nodiscard]] std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
           static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  [[nodiscard]] std::string str() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

template <typename T>
concept Real = std::same_as<T, float> || std::same_as<T, double>;

/// Dense rank-4 array with row-major [n][c][h][w] storage and value semantics.
template <Real T>
class Tensor4 {
 public:
  using value_type = T;

  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T(0));
  Tensor4(Shape4 shape, std::vector<T> data);

  static Tensor4 zeros(Shape4 shape) { return Tensor4(shape); }
  static Tensor4 full(Shape4 shape, T value) { return Tensor4(shape, value); }
  static Tensor4 scalar(T value) { return Tensor4(Shape4{1, 1, 1, 1}, value); }

  [[nodiscard]] const Shape4& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t numel() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::span<T> data() noexcept { return data_; }
  [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
  [[nodiscard]] const std::vector<T>& vec() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::size_t offset(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  T& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }

  /// Single item of the batch as a [1, c, h, w] tensor.
  [[nodiscard]] Tensor4 item(int index) const;

  /// Same data reinterpreted under a shape of equal element count.
  [[nodiscard]] Tensor4 reshaped(Shape4 shape) const;

  template <Real U>
  [[nodiscard]] Tensor4<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor4<U>(shape_, std::move(out));
  }

  [[nodiscard]] T sum() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{};
  std::vector<T> data_;
};

/// Stacks [1,c,h,w] items (equal shapes) along the batch axis.
template <Real T>
Tensor4<T> stack_batch(std::span<const Tensor4<T>> items);

/// Rejects with ErrorCode::kShapeMismatch, naming both shapes.
void require_same_shape(const Shape4& a, const Shape4& b, const char* what);

template <Real T>
T dot(const Tensor4<T>& a, const Tensor4<T>& b);

extern template class Tensor4<float>;
extern template class Tensor4<double>;

}  // namespace semipso
