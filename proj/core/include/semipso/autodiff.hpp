#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "semipso/tensor.hpp"

namespace semipso {

template <Real T>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
template <Real T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  [[nodiscard]] const Tensor4<T>& value() const;
  [[nodiscard]] const Shape4& shape() const { return value().shape(); }
};

/// Linear record of primitive operations for a single reverse sweep.
///
/// Nodes are appended in forward execution order, so walking the node list
/// backwards visits them in reverse topological order. A node requires a
/// gradient iff it is a parameter leaf or any of its inputs requires one;
/// nodes that do not are never visited by the backward sweep.
template <Real T>
class Tape {
 public:
  /// Propagates the node's output gradient into its inputs' gradient buffers.
  using BackwardFn = std::function<void(Tape&, const Tensor4<T>& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> parameter(Tensor4<T> value);
  Var<T> constant(Tensor4<T> value);
  /// Gradient-stopped copy of `v`.
  Var<T> detach(Var<T> v);

  /// Appends an op node. `backward` is dropped when no input requires a gradient.
  Var<T> record(Tensor4<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward);
  Var<T> record(Tensor4<T> value, const std::vector<Var<T>>& inputs, BackwardFn backward);

  [[nodiscard]] const Tensor4<T>& value(Var<T> v) const { return nodes_[v.id].value; }
  [[nodiscard]] bool requires_grad(Var<T> v) const { return nodes_[v.id].requires_grad; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a scalar root. Rejects non-scalar roots.
  void backward(Var<T> root);

  /// Accumulated gradient; zeros for nodes the sweep never reached.
  [[nodiscard]] Tensor4<T> grad(Var<T> v) const;

  /// Mutable gradient buffer used by backward functions; allocated on first use.
  Tensor4<T>& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor4<T> value;
    Tensor4<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var<T> push(Tensor4<T> value, bool requires_grad, BackwardFn backward);

  std::vector<Node> nodes_;
};

template <Real T>
const Tensor4<T>& Var<T>::value() const {
  return tape->value(*this);
}

extern template class Tape<float>;
extern template class Tape<double>;
extern template struct Var<float>;
extern template struct Var<double>;

}  // namespace semipso
