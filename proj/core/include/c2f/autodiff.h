// Copyright 2026 The C2F Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef C2F_AUTODIFF_H_
#define C2F_AUTODIFF_H_

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "c2f/tensor.h"

namespace c2f {

// A trainable tensor. Gradients accumulate into `grad` during
// Tape::Backward and are cleared by ZeroGrad.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v);
  void ZeroGrad();
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool needs_grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Passed to an op's backward closure. Input gradients are allocated lazily
// and only for inputs that need them.
class BackwardContext {
 public:
  BackwardContext(Tape& tape, int node) : tape_(tape), node_(node) {}
  const Tensor& output() const;
  const Tensor& output_grad() const;
  const Tensor& input(size_t i) const;
  bool wants(size_t i) const;
  // Zero-initialized on first access.
  Tensor& grad(size_t i);

 private:
  Tape& tape_;
  int node_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

// Records a forward computation so gradients can be replayed in exact reverse
// order. Nodes are appended in topological order by construction, so the
// recorded list is acyclic and backward traversal is deterministic.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value that never receives a gradient.
  Var Constant(Tensor value);
  // A leaf whose gradient is readable through grad() after Backward.
  Var Input(Tensor value);
  // A leaf bound to `param`; Backward adds into param.grad.
  Var Param(Parameter& param);

  // Appends an op node. Throws NumericError naming `op` if `value` holds
  // non-finite entries.
  Var Record(std::string op, Tensor value, std::vector<Var> inputs,
             BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable leaf.
  void Backward(Var loss);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Gradient of a node after Backward; empty tensor if none flowed.
  const Tensor& grad(Var v) const { return nodes_[v.id()].grad; }
  const std::string& op_name(int id) const { return nodes_[id].op; }
  size_t size() const { return nodes_.size(); }

 private:
  friend class BackwardContext;
  struct Node {
    std::string op;
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  Tensor& GradOf(int id);

  std::deque<Node> nodes_;
};

enum class Padding { kSame, kValid };

// Graph ops. All shapes are (b, h, w, c); kernels are (kh, kw, cin, cout).
Var Conv2D(Var input, Var kernel, int stride, Padding padding);
// Transposed convolution; kernel is (kh, kw, cout, cin) so that it is the
// exact adjoint of Conv2D with the same kernel tensor.
Var Deconv2D(Var input, Var kernel, int stride, Padding padding);
// Adds a (1, 1, 1, c) bias.
Var BiasAdd(Var input, Var bias);
// Generalized divisive normalization over channels:
//   y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
// and the multiplicative form when `inverse`. beta is (1,1,1,c), gamma
// (1,1,c,c) with gamma(0,0,i,j) = gamma_ij.
Var Gdn(Var input, Var beta, Var gamma, bool inverse);
Var SpaceToDepth(Var input, int block);
Var DepthToSpace(Var input, int block);

Var Relu(Var x);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Scale(Var x, float s);
Var AddScalar(Var x, float s);
Var Square(Var x);
Var Mul(Var a, Var b);
// a / b; b must be nonzero.
Var Div(Var a, Var b);
// max(x, floor)^p, zero gradient where the floor is active. floor > 0.
Var Pow(Var x, float p, float floor);
// exp(x) clamped to [lo, hi]; zero gradient where the clamp is active.
Var ExpClamp(Var x, float lo, float hi);
Var Concat(const std::vector<Var>& parts);
// Channels [begin, end) of x.
Var SliceChannels(Var x, int64_t begin, int64_t end);
// Scalar (1,1,1,1) reductions; accumulate in double.
Var Sum(Var x);
Var Mse(Var a, Var b);
// Mean over h and w: (b,h,w,c) -> (b,1,1,c).
Var MeanSpatial(Var x);
Var L2Norm(Var x);

// Gradient-free copy of a node's value.
Var StopGradient(Var x);

// Output spatial size of Conv2D along one axis.
int64_t ConvOutputSize(int64_t in, int64_t kernel, int stride, Padding padding);
// Output spatial size of Deconv2D along one axis.
int64_t DeconvOutputSize(int64_t in, int64_t kernel, int stride,
                         Padding padding);

}  // namespace c2f

#endif  // C2F_AUTODIFF_H_
