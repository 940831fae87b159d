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

#include "c2f/autodiff.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "c2f/errors.h"

namespace c2f {

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

void Parameter::ZeroGrad() {
  if (!(grad.shape() == value.shape())) {
    grad = Tensor(value.shape());
  } else {
    grad.Fill(0.0f);
  }
}

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::needs_grad() const { return tape_->needs_grad(id_); }

const Tensor& BackwardContext::output() const {
  return tape_.nodes_[node_].value;
}
const Tensor& BackwardContext::output_grad() const {
  return tape_.nodes_[node_].grad;
}
const Tensor& BackwardContext::input(size_t i) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs[i]].value;
}
bool BackwardContext::wants(size_t i) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs[i]].needs_grad;
}
Tensor& BackwardContext::grad(size_t i) {
  return tape_.GradOf(tape_.nodes_[node_].inputs[i]);
}

Tensor& Tape::GradOf(int id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape() || n.grad.empty()) {
    n.grad = Tensor(n.value.shape());
  }
  return n.grad;
}

Var Tape::Constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Input(Tensor value) {
  Node n;
  n.op = "input";
  n.value = std::move(value);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Param(Parameter& param) {
  Node n;
  n.op = "param:" + param.name;
  n.value = param.value;
  n.needs_grad = true;
  n.param = &param;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Record(std::string op, Tensor value, std::vector<Var> inputs,
                 BackwardFn backward) {
  if (!value.AllFinite()) {
    throw NumericError("non-finite output in op '" + op + "'");
  }
  Node n;
  n.op = std::move(op);
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (&v.tape() != this) {
      throw ContractError("op '" + n.op + "' mixes vars from different tapes");
    }
    n.inputs.push_back(v.id());
    n.needs_grad = n.needs_grad || nodes_[v.id()].needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::Backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("loss is from another tape");
  if (loss.value().size() != 1) {
    throw ContractError("Backward needs a scalar loss, got " +
                        loss.shape().ToString());
  }
  for (Node& n : nodes_) n.grad = Tensor();
  if (!nodes_[loss.id()].needs_grad) return;
  GradOf(loss.id())[0] = 1.0f;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.param != nullptr) {
      Parameter& p = *n.param;
      if (!(p.grad.shape() == p.value.shape())) p.grad = Tensor(p.value.shape());
      const int64_t count = p.grad.size();
      for (int64_t i = 0; i < count; ++i) p.grad[i] += n.grad[i];
      continue;
    }
    if (!n.backward) continue;
    BackwardContext ctx(*this, id);
    n.backward(ctx);
    for (int in : n.inputs) {
      const Node& src = nodes_[in];
      if (src.needs_grad && !src.grad.empty() && !src.grad.AllFinite()) {
        throw NumericError("non-finite gradient flowing out of op '" + n.op +
                           "'");
      }
    }
  }
}

namespace {

Var Scalar(Tape& tape, const char* op, double v, std::vector<Var> inputs,
           BackwardFn fn) {
  Tensor out(Shape{1, 1, 1, 1});
  out[0] = static_cast<float>(v);
  return tape.Record(op, std::move(out), std::move(inputs), std::move(fn));
}

}  // namespace

Var Relu(Var x) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (int64_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
  return x.tape().Record("relu", std::move(out), {x}, [](BackwardContext& c) {
    const Tensor& in = c.input(0);
    const Tensor& g = c.output_grad();
    Tensor& gx = c.grad(0);
    for (int64_t i = 0; i < in.size(); ++i) {
      if (in[i] > 0.0f) gx[i] += g[i];
    }
  });
}

Var Add(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "add");
  Tensor out(a.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return a.tape().Record("add", std::move(out), {a, b},
                         [](BackwardContext& c) {
                           const Tensor& g = c.output_grad();
                           for (size_t k = 0; k < 2; ++k) {
                             if (!c.wants(k)) continue;
                             Tensor& gk = c.grad(k);
                             for (int64_t i = 0; i < g.size(); ++i) gk[i] += g[i];
                           }
                         });
}

Var Sub(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "sub");
  Tensor out(a.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return a.tape().Record("sub", std::move(out), {a, b},
                         [](BackwardContext& c) {
                           const Tensor& g = c.output_grad();
                           if (c.wants(0)) {
                             Tensor& ga = c.grad(0);
                             for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           }
                           if (c.wants(1)) {
                             Tensor& gb = c.grad(1);
                             for (int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                           }
                         });
}

Var Scale(Var x, float s) {
  Tensor out(x.shape());
  const Tensor& in = x.value();
  for (int64_t i = 0; i < in.size(); ++i) out[i] = in[i] * s;
  return x.tape().Record("scale", std::move(out), {x},
                         [s](BackwardContext& c) {
                           const Tensor& g = c.output_grad();
                           Tensor& gx = c.grad(0);
                           for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s;
                         });
}

Var AddScalar(Var x, float s) {
  Tensor out(x.shape());
  const Tensor& in = x.value();
  for (int64_t i = 0; i < in.size(); ++i) out[i] = in[i] + s;
  return x.tape().Record("add_scalar", std::move(out), {x},
                         [](BackwardContext& c) {
                           const Tensor& g = c.output_grad();
                           Tensor& gx = c.grad(0);
                           for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                         });
}

Var Square(Var x) {
  Tensor out(x.shape());
  const Tensor& in = x.value();
  for (int64_t i = 0; i < in.size(); ++i) out[i] = in[i] * in[i];
  return x.tape().Record("square", std::move(out), {x},
                         [](BackwardContext& c) {
                           const Tensor& in = c.input(0);
                           const Tensor& g = c.output_grad();
                           Tensor& gx = c.grad(0);
                           for (int64_t i = 0; i < g.size(); ++i) {
                             gx[i] += 2.0f * in[i] * g[i];
                           }
                         });
}

Var Mul(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape().Record("mul", std::move(out), {a, b}, [](BackwardContext& c) {
    const Tensor& g = c.output_grad();
    if (c.wants(0)) {
      const Tensor& bv = c.input(1);
      Tensor& ga = c.grad(0);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (c.wants(1)) {
      const Tensor& av = c.input(0);
      Tensor& gb = c.grad(1);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Div(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "div");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) {
    if (bv[i] == 0.0f) throw NumericError("div: zero divisor");
    out[i] = av[i] / bv[i];
  }
  return a.tape().Record("div", std::move(out), {a, b}, [](BackwardContext& c) {
    const Tensor& g = c.output_grad();
    const Tensor& bv = c.input(1);
    if (c.wants(0)) {
      Tensor& ga = c.grad(0);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (c.wants(1)) {
      const Tensor& y = c.output();
      Tensor& gb = c.grad(1);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * y[i] / bv[i];
    }
  });
}

Var Pow(Var x, float p, float floor) {
  if (!(floor > 0.0f)) throw ContractError("pow: floor must be positive");
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (int64_t i = 0; i < in.size(); ++i) {
    out[i] = std::pow(std::max(in[i], floor), p);
  }
  return x.tape().Record(
      "pow", std::move(out), {x}, [p, floor](BackwardContext& c) {
        const Tensor& in = c.input(0);
        const Tensor& y = c.output();
        const Tensor& g = c.output_grad();
        Tensor& gx = c.grad(0);
        for (int64_t i = 0; i < g.size(); ++i) {
          if (in[i] > floor) gx[i] += g[i] * p * y[i] / in[i];
        }
      });
}

Var ExpClamp(Var x, float lo, float hi) {
  if (!(lo > 0.0f && lo < hi)) throw ContractError("exp_clamp: need 0 < lo < hi");
  Tensor out(x.shape());
  const Tensor& in = x.value();
  for (int64_t i = 0; i < in.size(); ++i) {
    out[i] = std::clamp(std::exp(in[i]), lo, hi);
  }
  return x.tape().Record(
      "exp_clamp", std::move(out), {x}, [lo, hi](BackwardContext& c) {
        const Tensor& y = c.output();
        const Tensor& g = c.output_grad();
        Tensor& gx = c.grad(0);
        for (int64_t i = 0; i < g.size(); ++i) {
          if (y[i] > lo && y[i] < hi) gx[i] += g[i] * y[i];
        }
      });
}

Var Concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat of nothing");
  Shape s = parts[0].shape();
  int64_t channels = 0;
  for (const Var& p : parts) {
    const Shape& ps = p.shape();
    if (ps.b != s.b || ps.h != s.h || ps.w != s.w) {
      throw ContractError("concat: spatial mismatch " + s.ToString() + " vs " +
                          ps.ToString());
    }
    channels += ps.c;
  }
  s.c = channels;
  Tensor out(s);
  const int64_t pixels = s.pixels();
  int64_t offset = 0;
  std::vector<int64_t> offsets;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const int64_t pc = v.shape().c;
    for (int64_t px = 0; px < pixels; ++px) {
      std::copy_n(v.data() + px * pc, pc, out.data() + px * channels + offset);
    }
    offsets.push_back(offset);
    offset += pc;
  }
  return parts[0].tape().Record(
      "concat", std::move(out), parts,
      [offsets, channels, pixels](BackwardContext& c) {
        const Tensor& g = c.output_grad();
        for (size_t k = 0; k < offsets.size(); ++k) {
          if (!c.wants(k)) continue;
          Tensor& gk = c.grad(k);
          const int64_t pc = gk.shape().c;
          for (int64_t px = 0; px < pixels; ++px) {
            const float* src = g.data() + px * channels + offsets[k];
            float* dst = gk.data() + px * pc;
            for (int64_t ch = 0; ch < pc; ++ch) dst[ch] += src[ch];
          }
        }
      });
}

Var SliceChannels(Var x, int64_t begin, int64_t end) {
  const Shape& in = x.shape();
  if (begin < 0 || end > in.c || begin >= end) {
    throw ContractError("slice_channels: bad range [" + std::to_string(begin) +
                        "," + std::to_string(end) + ") of " + in.ToString());
  }
  Shape s = in;
  s.c = end - begin;
  Tensor out(s);
  const Tensor& v = x.value();
  for (int64_t px = 0; px < in.pixels(); ++px) {
    std::copy_n(v.data() + px * in.c + begin, s.c, out.data() + px * s.c);
  }
  return x.tape().Record(
      "slice_channels", std::move(out), {x}, [begin](BackwardContext& c) {
        const Tensor& g = c.output_grad();
        Tensor& gx = c.grad(0);
        const int64_t oc = g.shape().c;
        const int64_t ic = gx.shape().c;
        for (int64_t px = 0; px < g.shape().pixels(); ++px) {
          for (int64_t ch = 0; ch < oc; ++ch) {
            gx[px * ic + begin + ch] += g[px * oc + ch];
          }
        }
      });
}

Var Sum(Var x) {
  double acc = 0.0;
  for (float v : x.value().values()) acc += v;
  return Scalar(x.tape(), "sum", acc, {x}, [](BackwardContext& c) {
    const float g = c.output_grad()[0];
    Tensor& gx = c.grad(0);
    for (int64_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var Mse(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "mse");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const int64_t n = av.size();
  if (n == 0) throw ContractError("mse of empty tensors");
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    acc += d * d;
  }
  return Scalar(a.tape(), "mse", acc / static_cast<double>(n), {a, b},
                [n](BackwardContext& c) {
                  const Tensor& av = c.input(0);
                  const Tensor& bv = c.input(1);
                  const double scale = 2.0 * c.output_grad()[0] / n;
                  if (c.wants(0)) {
                    Tensor& ga = c.grad(0);
                    for (int64_t i = 0; i < n; ++i) {
                      ga[i] += static_cast<float>(scale * (av[i] - bv[i]));
                    }
                  }
                  if (c.wants(1)) {
                    Tensor& gb = c.grad(1);
                    for (int64_t i = 0; i < n; ++i) {
                      gb[i] -= static_cast<float>(scale * (av[i] - bv[i]));
                    }
                  }
                });
}

Var MeanSpatial(Var x) {
  const Shape s = x.shape();
  if (s.h * s.w == 0) throw ContractError("mean_spatial of empty tensor");
  const double inv = 1.0 / static_cast<double>(s.h * s.w);
  const Tensor& in = x.value();
  Tensor out(Shape{s.b, 1, 1, s.c});
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t ch = 0; ch < s.c; ++ch) {
      double acc = 0.0;
      for (int64_t p = 0; p < s.h * s.w; ++p) acc += in[(b * s.h * s.w + p) * s.c + ch];
      out[b * s.c + ch] = static_cast<float>(acc * inv);
    }
  }
  return x.tape().Record("mean_spatial", std::move(out), {x},
                         [s, inv](BackwardContext& c) {
                           const Tensor& g = c.output_grad();
                           Tensor& gx = c.grad(0);
                           for (int64_t b = 0; b < s.b; ++b) {
                             for (int64_t p = 0; p < s.h * s.w; ++p) {
                               for (int64_t ch = 0; ch < s.c; ++ch) {
                                 gx[(b * s.h * s.w + p) * s.c + ch] +=
                                     static_cast<float>(g[b * s.c + ch] * inv);
                               }
                             }
                           }
                         });
}

Var L2Norm(Var x) {
  double acc = 0.0;
  for (float v : x.value().values()) acc += static_cast<double>(v) * v;
  const double norm = std::sqrt(acc);
  return Scalar(x.tape(), "l2_norm", norm, {x}, [norm](BackwardContext& c) {
    if (norm == 0.0) return;  // subgradient 0 at the origin
    const Tensor& in = c.input(0);
    const double g = c.output_grad()[0] / norm;
    Tensor& gx = c.grad(0);
    for (int64_t i = 0; i < in.size(); ++i) {
      gx[i] += static_cast<float>(g * in[i]);
    }
  });
}

Var StopGradient(Var x) { return x.tape().Constant(x.value()); }

}  // namespace c2f
