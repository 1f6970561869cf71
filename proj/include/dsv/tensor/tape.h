// Copyright (c) 2026 The dsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSV_TENSOR_TAPE_H_
#define DSV_TENSOR_TAPE_H_

#include <functional>
#include <vector>

#include "dsv/tensor/tensor.h"

namespace dsv::tensor {

template <typename T>
class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  size_t id = 0;
  const void* owner = nullptr;
};

// Reverse-mode autodiff tape. Every op appends a node holding its output
// value and, when any input needs a gradient, a closure that pushes the
// node's gradient back to its inputs. A tape belongs to a single thread.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, size_t self)>;

  // With record = false no closures are kept; suitable for inference.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor<T> value) {
    nodes_.push_back(Node{std::move(value), nullptr, false, {}, nullptr, nullptr});
    return Handle(nodes_.size() - 1);
  }

  // Leaf that needs a gradient and owns its value (used by gradient checks).
  Var Leaf(Tensor<T> value) {
    nodes_.push_back(Node{std::move(value), nullptr, record_, {}, nullptr, nullptr});
    return Handle(nodes_.size() - 1);
  }

  // Leaf referencing a parameter's value without copying it. The parameter
  // must outlive the tape and stay unmodified while it is alive.
  Var Watch(Parameter<T>& param) {
    nodes_.push_back(Node{{}, &param.value, record_, {}, nullptr, &param});
    return Handle(nodes_.size() - 1);
  }

  Var Record(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool needs = false;
    for (Var in : inputs) needs = needs || requires_grad(in);
    needs = needs && record_;
    nodes_.push_back(Node{std::move(value), nullptr, needs, {},
                          needs ? std::move(fn) : nullptr, nullptr});
    return Handle(nodes_.size() - 1);
  }

  const Tensor<T>& value(Var v) const {
    const Node& n = nodes_[Check(v)];
    return n.ref ? *n.ref : n.owned;
  }
  bool requires_grad(Var v) const { return nodes_[Check(v)].requires_grad; }
  bool recording() const { return record_; }
  size_t size() const { return nodes_.size(); }

  // Gradient of the last Backward() loss with respect to v.
  const std::vector<T>& grad(Var v) const {
    const Node& n = nodes_[Check(v)];
    if (!n.requires_grad) throw InvalidInput("grad: value does not require a gradient");
    if (n.grad.empty()) throw InvalidInput("grad: no gradient reached this value");
    return n.grad;
  }

  // Zero-initialized on first touch. Only for nodes that require a gradient.
  std::vector<T>& MutableGrad(Var v) { return MutableGrad(Check(v)); }
  std::vector<T>& MutableGrad(size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(ValueOf(n).size(), T(0));
    return n.grad;
  }
  Var Handle(size_t id) const { return Var{id, this}; }

  // Seeds d(loss)/d(loss) = 1 and runs the recorded closures from the newest
  // node back to the oldest; gradients accumulate additively on fan-out.
  void Backward(Var loss) {
    const size_t root = Check(loss);
    if (!record_) throw InvalidInput("Backward: tape is not recording");
    const Node& ln = nodes_[root];
    if (ValueOf(ln).size() != 1) {
      throw InvalidInput("Backward: loss must be a scalar, got shape " +
                         ShapeString(ValueOf(ln).shape));
    }
    if (!ln.requires_grad) throw InvalidInput("Backward: loss does not depend on any leaf");
    for (Node& n : nodes_) n.grad.clear();
    MutableGrad(root)[0] = T(1);
    for (size_t i = root + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward && !n.grad.empty()) n.backward(*this, i);
    }
  }

  // Adds the gradients of watched parameters into Parameter::grad.
  void AccumulateParameterGrads() {
    for (Node& n : nodes_) {
      if (!n.param || n.grad.empty()) continue;
      auto& g = n.param->grad;
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
      n.param->has_grad = true;
    }
  }

  // Gradient for a watched parameter, or empty if none reached it.
  const std::vector<T>* ParameterGrad(const Parameter<T>& param) const {
    for (const Node& n : nodes_) {
      if (n.param == &param && !n.grad.empty()) return &n.grad;
    }
    return nullptr;
  }

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* ref;
    bool requires_grad;
    std::vector<T> grad;
    BackwardFn backward;
    Parameter<T>* param;
  };

  static const Tensor<T>& ValueOf(const Node& n) { return n.ref ? *n.ref : n.owned; }

  size_t Check(Var v) const {
    if (v.owner != this || v.id >= nodes_.size()) {
      throw InvalidInput("value was not recorded on this tape");
    }
    return v.id;
  }

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace dsv::tensor

#endif  // DSV_TENSOR_TAPE_H_
