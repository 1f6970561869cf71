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

#ifndef DSV_TENSOR_TENSOR_H_
#define DSV_TENSOR_TENSOR_H_

#include <cstddef>
#include <string>
#include <vector>

#include "dsv/common/error.h"

namespace dsv::tensor {

using Shape = std::vector<size_t>;

inline size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape);

// Dense row-major array. Feature maps are laid out [height][width][channel]
// with channels innermost; scalars have an empty shape.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape(std::move(s)), data(NumElements(shape), fill) {}
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != NumElements(shape)) {
      throw InvalidInput("Tensor: " + std::to_string(data.size()) +
                         " values do not fill shape " + ShapeString(shape));
    }
  }

  size_t size() const { return data.size(); }
  size_t rank() const { return shape.size(); }
  size_t dim(size_t i) const { return shape.at(i); }
  bool operator==(const Tensor&) const = default;
};

// Trainable weights with their optimizer state. `grad` and `velocity` always
// have the same length as `value`; `has_grad` marks a populated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> grad;
  std::vector<T> velocity;
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.size(), T(0)), velocity(value.size(), T(0)) {}

  void ZeroGrad() {
    std::fill(grad.begin(), grad.end(), T(0));
    has_grad = false;
  }
};

}  // namespace dsv::tensor

#endif  // DSV_TENSOR_TENSOR_H_
