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

#include "dsv/tensor/ops.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace dsv::tensor {

std::string ShapeString(const Shape& shape) {
  std::ostringstream ss;
  ss << '[';
  for (size_t i = 0; i < shape.size(); ++i) ss << (i ? "x" : "") << shape[i];
  ss << ']';
  return ss.str();
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// Rows are output pixels, columns follow the [k][k][Cin] weight layout.
template <typename T>
void Im2Col(const T* x, size_t h, size_t w, size_t c, size_t k, T* cols) {
  const long pad = static_cast<long>(k / 2);
  const size_t kk = k * k * c;
  for (size_t i = 0; i < h; ++i) {
    for (size_t j = 0; j < w; ++j) {
      T* row = cols + (i * w + j) * kk;
      for (size_t dy = 0; dy < k; ++dy) {
        const long y = static_cast<long>(i + dy) - pad;
        for (size_t dx = 0; dx < k; ++dx) {
          const long xx = static_cast<long>(j + dx) - pad;
          T* dst = row + (dy * k + dx) * c;
          if (y < 0 || y >= static_cast<long>(h) || xx < 0 || xx >= static_cast<long>(w)) {
            std::fill(dst, dst + c, T(0));
          } else {
            const T* src = x + (static_cast<size_t>(y) * w + static_cast<size_t>(xx)) * c;
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
}

template <typename T>
void Col2ImAdd(const T* cols, size_t h, size_t w, size_t c, size_t k, T* x) {
  const long pad = static_cast<long>(k / 2);
  const size_t kk = k * k * c;
  for (size_t i = 0; i < h; ++i) {
    for (size_t j = 0; j < w; ++j) {
      const T* row = cols + (i * w + j) * kk;
      for (size_t dy = 0; dy < k; ++dy) {
        const long y = static_cast<long>(i + dy) - pad;
        if (y < 0 || y >= static_cast<long>(h)) continue;
        for (size_t dx = 0; dx < k; ++dx) {
          const long xx = static_cast<long>(j + dx) - pad;
          if (xx < 0 || xx >= static_cast<long>(w)) continue;
          const T* src = row + (dy * k + dx) * c;
          T* dst = x + (static_cast<size_t>(y) * w + static_cast<size_t>(xx)) * c;
          for (size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var Conv2dSame(Tape<T>& tape, Var x, Var weights, Var bias) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(weights);
  const Tensor<T>& bv = tape.value(bias);
  if (xv.rank() != 3) throw InvalidInput("Conv2dSame: input must be [H,W,C], got " + ShapeString(xv.shape));
  if (wv.rank() != 4 || wv.dim(1) != wv.dim(2) || wv.dim(1) % 2 == 0) {
    throw InvalidInput("Conv2dSame: weights must be [Cout,k,k,Cin] with odd k, got " +
                       ShapeString(wv.shape));
  }
  const size_t h = xv.dim(0), w = xv.dim(1), cin = xv.dim(2);
  const size_t cout = wv.dim(0), k = wv.dim(1);
  if (wv.dim(3) != cin) {
    throw InvalidInput("Conv2dSame: channel mismatch, input has " + std::to_string(cin) +
                       " channels, filters expect " + std::to_string(wv.dim(3)));
  }
  if (bv.shape != Shape{cout}) throw InvalidInput("Conv2dSame: bias must be [Cout]");

  const size_t pixels = h * w, kk = k * k * cin;
  std::shared_ptr<std::vector<T>> cols;
  const T* patches = xv.data.data();
  if (k > 1) {
    cols = std::make_shared<std::vector<T>>(pixels * kk);
    Im2Col(xv.data.data(), h, w, cin, k, cols->data());
    patches = cols->data();
  }
  Tensor<T> out({h, w, cout});
  MatMap<T> om(out.data.data(), pixels, cout);
  ConstMatMap<T> pm(patches, pixels, kk);
  ConstMatMap<T> wm(wv.data.data(), cout, kk);
  om.noalias() = pm * wm.transpose();
  om.rowwise() += ConstVecMap<T>(bv.data.data(), cout).transpose();

  return tape.Record(std::move(out), {x, weights, bias},
                     [=](Tape<T>& t, size_t self) {
    const std::vector<T>& g = t.MutableGrad(self);
    ConstMatMap<T> gm(g.data(), pixels, cout);
    const T* p = cols ? cols->data() : t.value(x).data.data();
    if (t.requires_grad(weights)) {
      MatMap<T> gw(t.MutableGrad(weights).data(), cout, kk);
      gw.noalias() += gm.transpose() * ConstMatMap<T>(p, pixels, kk);
    }
    if (t.requires_grad(bias)) {
      // Row-ordered sum. Eigen's colwise reduction varies with buffer alignment.
      std::vector<T> gb(cout, T(0));
      for (size_t r = 0; r < pixels; ++r) {
        const T* row = g.data() + r * cout;
        for (size_t c = 0; c < cout; ++c) gb[c] += row[c];
      }
      std::vector<T>& tb = t.MutableGrad(bias);
      for (size_t c = 0; c < cout; ++c) tb[c] += gb[c];
    }
    if (t.requires_grad(x)) {
      ConstMatMap<T> wmat(t.value(weights).data.data(), cout, kk);
      std::vector<T>& gx = t.MutableGrad(x);
      if (k == 1) {
        MatMap<T>(gx.data(), pixels, kk).noalias() += gm * wmat;
      } else {
        RowMat<T> dcols = gm * wmat;
        Col2ImAdd(dcols.data(), h, w, cin, k, gx.data());
      }
    }
  });
}

template <typename T>
Var MaxPool2x2(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  if (xv.rank() != 3) throw InvalidInput("MaxPool2x2: input must be [H,W,C], got " + ShapeString(xv.shape));
  const size_t h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  if (h % 2 || w % 2) {
    throw InvalidInput("MaxPool2x2: odd spatial dimension in " + ShapeString(xv.shape));
  }
  const size_t oh = h / 2, ow = w / 2;
  Tensor<T> out({oh, ow, c});
  auto argmax = std::make_shared<std::vector<uint32_t>>(out.size());
  for (size_t i = 0; i < oh; ++i) {
    for (size_t j = 0; j < ow; ++j) {
      for (size_t ch = 0; ch < c; ++ch) {
        size_t best = ((2 * i) * w + 2 * j) * c + ch;
        for (size_t dy = 0; dy < 2; ++dy) {
          for (size_t dx = 0; dx < 2; ++dx) {
            const size_t idx = ((2 * i + dy) * w + 2 * j + dx) * c + ch;
            if (xv.data[idx] > xv.data[best]) best = idx;
          }
        }
        const size_t o = (i * ow + j) * c + ch;
        out.data[o] = xv.data[best];
        (*argmax)[o] = static_cast<uint32_t>(best);
      }
    }
  }
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t, size_t self) {
    const std::vector<T>& g = t.MutableGrad(self);
    std::vector<T>& gx = t.MutableGrad(x);
    for (size_t o = 0; o < g.size(); ++o) gx[(*argmax)[o]] += g[o];
  });
}

template <typename T>
Var Mfm(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  if (xv.rank() == 0) throw InvalidInput("Mfm: scalar input");
  const size_t n = xv.shape.back();
  if (n % 2) throw InvalidInput("Mfm: channel count " + std::to_string(n) + " is odd");
  const size_t half = n / 2, outer = xv.size() / n;
  Shape shape = xv.shape;
  shape.back() = half;
  Tensor<T> out(shape);
  auto first = std::make_shared<std::vector<bool>>(out.size());
  for (size_t o = 0; o < outer; ++o) {
    const T* src = xv.data.data() + o * n;
    T* dst = out.data.data() + o * half;
    for (size_t k = 0; k < half; ++k) {
      const bool a = src[k] >= src[k + half];
      (*first)[o * half + k] = a;
      dst[k] = a ? src[k] : src[k + half];
    }
  }
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t, size_t self) {
    const std::vector<T>& g = t.MutableGrad(self);
    std::vector<T>& gx = t.MutableGrad(x);
    for (size_t o = 0; o < outer; ++o) {
      for (size_t k = 0; k < half; ++k) {
        const size_t i = o * half + k;
        gx[o * n + k + ((*first)[i] ? 0 : half)] += g[i];
      }
    }
  });
}

template <typename T>
Var Dense(Tape<T>& tape, Var x, Var weights, std::optional<Var> bias) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& wv = tape.value(weights);
  if (wv.rank() != 2) throw InvalidInput("Dense: weights must be [m,n], got " + ShapeString(wv.shape));
  const size_t m = wv.dim(0), n = wv.dim(1);
  if (xv.size() != n) {
    throw InvalidInput("Dense: dimension mismatch, input has " + std::to_string(xv.size()) +
                       " elements, weights expect " + std::to_string(n));
  }
  Tensor<T> out({m});
  VecMap<T> om(out.data.data(), m);
  ConstMatMap<T> wm(wv.data.data(), m, n);
  om.noalias() = wm * ConstVecMap<T>(xv.data.data(), n);
  if (bias) {
    const Tensor<T>& bv = tape.value(*bias);
    if (bv.shape != Shape{m}) throw InvalidInput("Dense: bias must be [m]");
    om += ConstVecMap<T>(bv.data.data(), m);
  }
  const Var b = bias.value_or(x);
  const bool has_bias = bias.has_value();
  auto backward = [=](Tape<T>& t, size_t self) {
    ConstVecMap<T> g(t.MutableGrad(self).data(), m);
    if (t.requires_grad(weights)) {
      MatMap<T>(t.MutableGrad(weights).data(), m, n).noalias() +=
          g * ConstVecMap<T>(t.value(x).data.data(), n).transpose();
    }
    if (has_bias && t.requires_grad(b)) VecMap<T>(t.MutableGrad(b).data(), m) += g;
    if (t.requires_grad(x)) {
      VecMap<T>(t.MutableGrad(x).data(), n).noalias() +=
          ConstMatMap<T>(t.value(weights).data.data(), m, n).transpose() * g;
    }
  };
  if (has_bias) return tape.Record(std::move(out), {x, weights, b}, backward);
  return tape.Record(std::move(out), {x, weights}, backward);
}

template <typename T>
std::vector<T> Softmax(const std::vector<T>& logits) {
  std::vector<T> p(logits.size());
  if (logits.empty()) return p;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T z = 0;
  for (size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (T& v : p) v /= z;
  return p;
}

template <typename T>
Var SoftmaxXent(Tape<T>& tape, Var logits, size_t label) {
  const Tensor<T>& lv = tape.value(logits);
  if (lv.size() == 0) throw InvalidInput("SoftmaxXent: empty logits");
  if (label >= lv.size()) {
    throw InvalidInput("SoftmaxXent: label " + std::to_string(label) +
                       " out of range for " + std::to_string(lv.size()) + " classes");
  }
  const T mx = *std::max_element(lv.data.begin(), lv.data.end());
  T z = 0;
  for (T v : lv.data) z += std::exp(v - mx);
  const T loss = mx + std::log(z) - lv.data[label];
  return tape.Record(Tensor<T>({}, {std::max(loss, T(0))}), {logits},
                     [=](Tape<T>& t, size_t self) {
    const T g = t.MutableGrad(self)[0];
    std::vector<T> p = Softmax(t.value(logits).data);
    p[label] -= T(1);
    std::vector<T>& gl = t.MutableGrad(logits);
    for (size_t i = 0; i < p.size(); ++i) gl[i] += g * p[i];
  });
}

template <typename T>
Var Sum(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  T s = 0;
  for (T v : xv.data) s += v;
  return tape.Record(Tensor<T>({}, {s}), {x}, [=](Tape<T>& t, size_t self) {
    const T g = t.MutableGrad(self)[0];
    for (T& v : t.MutableGrad(x)) v += g;
  });
}

template <typename T>
Var WeightedSum(Tape<T>& tape, Var x, const Tensor<T>& weights) {
  const Tensor<T>& xv = tape.value(x);
  if (weights.size() != xv.size()) throw InvalidInput("WeightedSum: size mismatch");
  T s = 0;
  for (size_t i = 0; i < xv.size(); ++i) s += weights.data[i] * xv.data[i];
  auto wcopy = std::make_shared<std::vector<T>>(weights.data);
  return tape.Record(Tensor<T>({}, {s}), {x}, [=](Tape<T>& t, size_t self) {
    const T g = t.MutableGrad(self)[0];
    std::vector<T>& gx = t.MutableGrad(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g * (*wcopy)[i];
  });
}

template <typename T>
Var Scale(Tape<T>& tape, Var x, T factor) {
  Tensor<T> out = tape.value(x);
  for (T& v : out.data) v *= factor;
  return tape.Record(std::move(out), {x}, [=](Tape<T>& t, size_t self) {
    const std::vector<T>& g = t.MutableGrad(self);
    std::vector<T>& gx = t.MutableGrad(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += factor * g[i];
  });
}

template <typename T>
Var Add(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  if (av.shape != bv.shape) {
    throw InvalidInput("Add: shape mismatch " + ShapeString(av.shape) + " vs " + ShapeString(bv.shape));
  }
  Tensor<T> out = av;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  return tape.Record(std::move(out), {a, b}, [=](Tape<T>& t, size_t self) {
    // Copy first: a and b may be the same node.
    const std::vector<T> g = t.MutableGrad(self);
    for (Var in : {a, b}) {
      if (!t.requires_grad(in)) continue;
      std::vector<T>& gi = t.MutableGrad(in);
      for (size_t i = 0; i < gi.size(); ++i) gi[i] += g[i];
    }
  });
}

template <typename T>
Var Reshape(Tape<T>& tape, Var x, Shape shape) {
  const Tensor<T>& xv = tape.value(x);
  if (NumElements(shape) != xv.size()) {
    throw InvalidInput("Reshape: cannot view " + ShapeString(xv.shape) + " as " + ShapeString(shape));
  }
  return tape.Record(Tensor<T>(std::move(shape), xv.data), {x}, [=](Tape<T>& t, size_t self) {
    const std::vector<T>& g = t.MutableGrad(self);
    std::vector<T>& gx = t.MutableGrad(x);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
  });
}

#define DSV_INSTANTIATE_OPS(T)                                              \
  template Var Conv2dSame<T>(Tape<T>&, Var, Var, Var);                      \
  template Var MaxPool2x2<T>(Tape<T>&, Var);                                \
  template Var Mfm<T>(Tape<T>&, Var);                                       \
  template Var Dense<T>(Tape<T>&, Var, Var, std::optional<Var>);            \
  template Var SoftmaxXent<T>(Tape<T>&, Var, size_t);                       \
  template Var Sum<T>(Tape<T>&, Var);                                       \
  template Var WeightedSum<T>(Tape<T>&, Var, const Tensor<T>&);             \
  template Var Scale<T>(Tape<T>&, Var, T);                                  \
  template Var Add<T>(Tape<T>&, Var, Var);                                  \
  template Var Reshape<T>(Tape<T>&, Var, Shape);                            \
  template std::vector<T> Softmax<T>(const std::vector<T>&);

DSV_INSTANTIATE_OPS(float)
DSV_INSTANTIATE_OPS(double)

#undef DSV_INSTANTIATE_OPS

}  // namespace dsv::tensor
