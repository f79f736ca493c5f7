#include "semipso/autodiff.hpp"

#include "semipso/error.hpp"

namespace semipso {

template <Real T>
Var<T> Tape<T>::push(Tensor4<T> value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Tensor4<T>{}, requires_grad, std::move(backward)});
  return Var<T>{this, nodes_.size() - 1};
}

template <Real T>
Var<T> Tape<T>::parameter(Tensor4<T> value) {
  return push(std::move(value), true, nullptr);
}

template <Real T>
Var<T> Tape<T>::constant(Tensor4<T> value) {
  return push(std::move(value), false, nullptr);
}

template <Real T>
Var<T> Tape<T>::detach(Var<T> v) {
  return constant(nodes_[v.id].value);
}

template <Real T>
Var<T> Tape<T>::record(Tensor4<T> value, std::initializer_list<Var<T>> inputs,
                       BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    require(in.tape == this, ErrorCode::kInvalidArgument, "input recorded on a different tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(backward) : nullptr);
}

template <Real T>
Var<T> Tape<T>::record(Tensor4<T> value, const std::vector<Var<T>>& inputs,
                       BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    require(in.tape == this, ErrorCode::kInvalidArgument, "input recorded on a different tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(backward) : nullptr);
}

template <Real T>
Tensor4<T>& Tape<T>::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty() && node.value.numel() > 0) node.grad = Tensor4<T>(node.value.shape());
  return node.grad;
}

template <Real T>
void Tape<T>::backward(Var<T> root) {
  require(root.tape == this, ErrorCode::kInvalidArgument, "root recorded on a different tape");
  const Shape4& s = nodes_[root.id].value.shape();
  require(s.numel() == 1, ErrorCode::kNonScalarRoot,
          "backward requires a scalar root, got shape " + s.str());
  for (auto& node : nodes_) node.grad = Tensor4<T>{};
  if (!nodes_[root.id].requires_grad) return;
  grad_buffer(root.id)[0] = T(1);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    // No nodes are appended during the sweep, so this reference stays valid.
    node.backward(*this, node.grad);
  }
}

template <Real T>
Tensor4<T> Tape<T>::grad(Var<T> v) const {
  const Node& node = nodes_[v.id];
  if (node.grad.empty()) return Tensor4<T>(node.value.shape());
  return node.grad;
}

template class Tape<float>;
template class Tape<double>;
template struct Var<float>;
template struct Var<double>;

}  // namespace semipso
