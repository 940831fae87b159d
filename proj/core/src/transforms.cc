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

#include "c2f/transforms.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "c2f/errors.h"
#include "c2f/random.h"

namespace c2f {
namespace {

constexpr float kBetaFloor = 1e-6f;

}  // namespace

const char* ToString(Activation a) {
  return a == Activation::kRelu ? "relu" : "linear";
}

const char* ToString(LayerKind k) {
  switch (k) {
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kDeconv:
      return "deconv";
    case LayerKind::kGdn:
      return "gdn";
    case LayerKind::kInverseGdn:
      return "igdn";
    case LayerKind::kSpaceToDepth:
      return "space_to_depth";
    case LayerKind::kDepthToSpace:
      return "depth_to_space";
  }
  return "?";
}

ArchConfig ArchConfig::FromMain(int64_t n) {
  ArchConfig a;
  a.n_main = n;
  a.c_y = n;
  a.c_z = std::max<int64_t>(1, n / 2);
  return a;
}

void ArchConfig::Validate() const {
  if (n_main < 1 || c_y < 1 || c_z < 1) {
    throw ContractError("all channel counts must be >= 1");
  }
  if (n_main > 4096 || c_y > 4096 || c_z > 4096) {
    throw ContractError("channel counts above 4096 are not supported");
  }
}

void CheckPadded(const Shape& image) {
  if (image.h <= 0 || image.w <= 0 || image.h % ArchConfig::kDownsampling != 0 ||
      image.w % ArchConfig::kDownsampling != 0) {
    throw ContractError("image " + image.ToString() +
                        " is not padded to a multiple of 64");
  }
}

std::vector<LayerSpec> Sequential::Describe() const {
  std::vector<LayerSpec> out;
  for (const Layer& l : layers_) out.push_back(l.spec);
  return out;
}

Var Sequential::Forward(std::span<const Var> params, Var x) const {
  for (const Layer& l : layers_) {
    const LayerSpec& s = l.spec;
    if (x.shape().c != s.in_channels) {
      throw ContractError("layer " + s.name + " expects " +
                          std::to_string(s.in_channels) + " channels, got " +
                          x.shape().ToString());
    }
    switch (s.kind) {
      case LayerKind::kConv:
      case LayerKind::kDeconv: {
        const Var k = params[l.kernel_param];
        x = s.kind == LayerKind::kConv
                ? Conv2D(x, k, s.stride, Padding::kSame)
                : Deconv2D(x, k, s.stride, Padding::kSame);
        x = BiasAdd(x, params[l.bias_param]);
        if (s.activation == Activation::kRelu) x = Relu(x);
        break;
      }
      case LayerKind::kGdn:
      case LayerKind::kInverseGdn: {
        const Var beta = AddScalar(Square(params[l.kernel_param]), kBetaFloor);
        const Var gamma = Square(params[l.bias_param]);
        x = Gdn(x, beta, gamma, s.kind == LayerKind::kInverseGdn);
        break;
      }
      case LayerKind::kSpaceToDepth:
        x = SpaceToDepth(x, 2);
        break;
      case LayerKind::kDepthToSpace:
        x = DepthToSpace(x, 2);
        break;
    }
  }
  return x;
}

int CodecModel::AddParam(const std::string& name, Tensor value) {
  params_.emplace_back(name, std::move(value));
  return static_cast<int>(params_.size() - 1);
}

void CodecModel::AddConv(Sequential& seq, const std::string& name, int kernel,
                         int stride, int64_t cin, int64_t cout, Activation act,
                         bool transposed, Rng& rng) {
  Sequential::Layer l;
  l.spec = LayerSpec{name, transposed ? LayerKind::kDeconv : LayerKind::kConv,
                     kernel, stride, cin, cout, act};
  const Shape ks = transposed ? Shape{kernel, kernel, cout, cin}
                              : Shape{kernel, kernel, cin, cout};
  double fan_in = static_cast<double>(kernel) * kernel * cin;
  if (transposed) fan_in /= static_cast<double>(stride) * stride;
  const double gain = act == Activation::kRelu ? 2.0 : 1.0;
  const double std = std::sqrt(gain / std::max(1.0, fan_in));
  Tensor k(ks);
  for (int64_t i = 0; i < k.size(); ++i) {
    k[i] = static_cast<float>(std * rng.Normal());
  }
  l.kernel_param = AddParam(name + ".kernel", std::move(k));
  l.bias_param = AddParam(name + ".bias", Tensor(Shape{1, 1, 1, cout}));
  seq.layers_.push_back(l);
}

void CodecModel::AddGdn(Sequential& seq, const std::string& name,
                        int64_t channels, bool inverse) {
  Sequential::Layer l;
  l.spec = LayerSpec{name, inverse ? LayerKind::kInverseGdn : LayerKind::kGdn,
                     1, 1, channels, channels, Activation::kLinear};
  // beta = u^2 + floor starts at 1; gamma = v^2 starts at 0.1 on the
  // diagonal with a small off-diagonal coupling so v is not stuck at 0.
  Tensor u(Shape{1, 1, 1, channels}, std::sqrt(1.0f - kBetaFloor));
  Tensor v(Shape{1, 1, channels, channels}, 0.01f);
  for (int64_t i = 0; i < channels; ++i) v[i * channels + i] = std::sqrt(0.1f);
  l.kernel_param = AddParam(name + ".beta_u", std::move(u));
  l.bias_param = AddParam(name + ".gamma_v", std::move(v));
  seq.layers_.push_back(l);
}

void CodecModel::AddReshape(Sequential& seq, const std::string& name,
                            LayerKind kind, int64_t cin) {
  Sequential::Layer l;
  const int64_t cout = kind == LayerKind::kSpaceToDepth ? cin * 4 : cin / 4;
  l.spec = LayerSpec{name, kind, 2, 2, cin, cout, Activation::kLinear};
  seq.layers_.push_back(l);
}

void CodecModel::BuildHyperAnalysis(Sequential& seq, const std::string& name,
                                    int64_t c, int64_t c_out, Rng& rng) {
  AddConv(seq, name + ".e1", 3, 1, c, 2 * c, Activation::kLinear, false, rng);
  AddReshape(seq, name + ".down", LayerKind::kSpaceToDepth, 2 * c);
  AddConv(seq, name + ".e2", 1, 1, 8 * c, 4 * c, Activation::kRelu, false, rng);
  AddConv(seq, name + ".e3", 1, 1, 4 * c, 4 * c, Activation::kRelu, false, rng);
  AddConv(seq, name + ".e4", 1, 1, 4 * c, c_out, Activation::kLinear, false,
          rng);
}

void CodecModel::BuildHyperSynthesis(Sequential& seq, const std::string& name,
                                     int64_t c, int64_t c_in, Rng& rng) {
  AddConv(seq, name + ".d1", 1, 1, c_in, 4 * c, Activation::kLinear, true, rng);
  AddReshape(seq, name + ".up", LayerKind::kDepthToSpace, 4 * c);
  AddConv(seq, name + ".d2", 1, 1, c, 4 * c, Activation::kRelu, true, rng);
  AddConv(seq, name + ".d3", 1, 1, 4 * c, 4 * c, Activation::kRelu, true, rng);
  AddConv(seq, name + ".d4", 3, 1, 4 * c, c, Activation::kLinear, true, rng);
}

void CodecModel::BuildSidePath(Sequential& seq, const std::string& name,
                               int64_t cin, int64_t cout, int upsamples,
                               Rng& rng) {
  for (int i = 0; i < upsamples; ++i) {
    const bool last = i + 1 == upsamples;
    AddConv(seq, name + ".up" + std::to_string(i), 3, 2, i == 0 ? cin : cout,
            cout, last ? Activation::kLinear : Activation::kRelu, true, rng);
  }
}

CodecModel::CodecModel(const ArchConfig& arch, uint64_t seed) : arch_(arch) {
  arch_.Validate();
  Rng rng(seed);
  const int64_t n = arch_.n_main;
  const int64_t side = std::max<int64_t>(1, n / 2);

  int64_t cin = 3;
  for (int i = 0; i < ArchConfig::kMainStages; ++i) {
    const std::string name = "analysis." + std::to_string(i);
    AddConv(analysis_, name + ".conv", 5, 2, cin, n, Activation::kLinear, false,
            rng);
    AddGdn(analysis_, name + ".gdn", n, false);
    cin = n;
  }
  BuildHyperAnalysis(hyper_analysis_[0], "hyper_analysis1", n, arch_.c_y, rng);
  BuildHyperAnalysis(hyper_analysis_[1], "hyper_analysis2", arch_.c_y,
                     arch_.c_z, rng);
  BuildHyperSynthesis(hyper_synthesis_[0], "hyper_synthesis1", n, arch_.c_y,
                      rng);
  BuildHyperSynthesis(hyper_synthesis_[1], "hyper_synthesis2", arch_.c_y,
                      arch_.c_z, rng);
  const int64_t pc[2] = {n, arch_.c_y};
  for (int level = 0; level < 2; ++level) {
    const std::string name = "predict_" + std::string(level == 0 ? "x" : "y");
    AddConv(predictor_[level], name + ".p1", 1, 1, pc[level], 2 * pc[level],
            Activation::kRelu, false, rng);
    AddConv(predictor_[level], name + ".p2", 1, 1, 2 * pc[level],
            2 * pc[level], Activation::kLinear, false, rng);
  }
  for (int i = 0; i < ArchConfig::kMainStages - 1; ++i) {
    const std::string name = "synthesis." + std::to_string(i);
    AddConv(synth_main_, name + ".deconv", 5, 2, n, n, Activation::kLinear,
            true, rng);
    AddGdn(synth_main_, name + ".igdn", n, true);
  }
  // Side representations sit at 1/16 (level 1) and 1/32 (level 2) of the
  // image; the fusion grid is 1/2.
  BuildSidePath(side_path_[0], "aggregate.side1", n, side, 3, rng);
  BuildSidePath(side_path_[1], "aggregate.side2", arch_.c_y, side, 4, rng);
  AddConv(fuse_in_, "aggregate.fuse_in", 3, 1, n + 2 * side, n,
          Activation::kLinear, false, rng);
  AddConv(res_a_, "aggregate.res_a", 3, 1, n, n, Activation::kRelu, false, rng);
  AddConv(res_b_, "aggregate.res_b", 3, 1, n, n, Activation::kLinear, false,
          rng);
  AddConv(fuse_out_, "aggregate.fuse_out", 3, 1, n, n, Activation::kLinear,
          false, rng);
  AddConv(fuse_out_, "aggregate.to_pixels", 5, 2, n, 3, Activation::kLinear,
          true, rng);
  AddConv(info_fidelity_, "info_fidelity", 2, 2, arch_.c_y, n,
          Activation::kLinear, true, rng);
  sigma_z_param_ = AddParam("sigma_z.log", Tensor(Shape{1, 1, 1, arch_.c_z}));
}

std::vector<Parameter*> CodecModel::ParameterPointers() {
  std::vector<Parameter*> out;
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

int CodecModel::FindParameter(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<Var> CodecModel::Bind(Tape& tape) {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(tape.Param(p));
  return out;
}

std::vector<Var> CodecModel::BindFrozen(Tape& tape) const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const Parameter& p : params_) out.push_back(tape.Constant(p.value));
  return out;
}

const Sequential& CodecModel::hyper_analysis(int level) const {
  if (level != 1 && level != 2) throw ContractError("hyper level must be 1|2");
  return hyper_analysis_[level - 1];
}
const Sequential& CodecModel::hyper_synthesis(int level) const {
  if (level != 1 && level != 2) throw ContractError("hyper level must be 1|2");
  return hyper_synthesis_[level - 1];
}
const Sequential& CodecModel::predictor(int level) const {
  if (level != 1 && level != 2) throw ContractError("hyper level must be 1|2");
  return predictor_[level - 1];
}
const Sequential& CodecModel::side_path(int level) const {
  if (level != 1 && level != 2) throw ContractError("hyper level must be 1|2");
  return side_path_[level - 1];
}

Var CodecModel::Analysis(std::span<const Var> p, Var image) const {
  CheckPadded(image.shape());
  if (image.shape().c != 3) {
    throw ContractError("analysis expects 3-channel images, got " +
                        image.shape().ToString());
  }
  return analysis_.Forward(p, image);
}

Var CodecModel::HyperAnalysis(std::span<const Var> p, Var input,
                              int level) const {
  const Shape& s = input.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ContractError("hyper analysis input " + s.ToString() +
                        " has odd spatial size");
  }
  return hyper_analysis(level).Forward(p, input);
}

Var CodecModel::HyperSynthesis(std::span<const Var> p, Var code,
                               int level) const {
  return hyper_synthesis(level).Forward(p, code);
}

std::pair<Var, Var> CodecModel::PredictParams(std::span<const Var> p, Var side,
                                              int level) const {
  const Var raw = predictor(level).Forward(p, side);
  const int64_t c = raw.shape().c / 2;
  const Var mu = SliceChannels(raw, 0, c);
  const Var sigma = ExpClamp(SliceChannels(raw, c, 2 * c), kSigmaMin, kSigmaMax);
  return {mu, sigma};
}

Var CodecModel::Synthesize(std::span<const Var> p, Var x_hat, Var side1,
                           Var side2) const {
  const Shape& xs = x_hat.shape();
  const Shape& s1 = side1.shape();
  const Shape& s2 = side2.shape();
  if (s1.h != xs.h || s1.w != xs.w || s2.h * 2 != xs.h || s2.w * 2 != xs.w ||
      s1.b != xs.b || s2.b != xs.b) {
    throw ContractError("synthesize: grids " + xs.ToString() + ", " +
                        s1.ToString() + ", " + s2.ToString() +
                        " do not form the 1/16, 1/16, 1/32 ladder");
  }
  const Var main = synth_main_.Forward(p, x_hat);
  const Var a = side_path_[0].Forward(p, side1);
  const Var b = side_path_[1].Forward(p, side2);
  const Var fused = fuse_in_.Forward(p, Concat({main, a, b}));
  const Var res = res_b_.Forward(p, res_a_.Forward(p, fused));
  return fuse_out_.Forward(p, Add(fused, res));
}

Var CodecModel::InfoFidelityProject(std::span<const Var> p, Var y) const {
  return info_fidelity_.Forward(p, y);
}

Var CodecModel::SigmaZ(std::span<const Var> p) const {
  return ExpClamp(p[sigma_z_param_], kSigmaMin, kSigmaMax);
}

ForwardPass RunForward(const CodecModel& model, std::span<const Var> params,
                       Var image, QuantizerMode mode, Rng* rng) {
  ForwardPass f;
  f.x_cont = model.Analysis(params, image);
  f.y_cont = model.HyperAnalysis(params, f.x_cont, 1);
  f.z_cont = model.HyperAnalysis(params, f.y_cont, 2);

  f.z_hat = Quantize(f.z_cont, mode, rng);
  f.side2 = model.HyperSynthesis(params, f.z_hat, 2);
  std::tie(f.mu_y, f.sigma_y) = model.PredictParams(params, f.side2, 2);

  f.y_hat = Quantize(f.y_cont, mode, rng);
  f.side1 = model.HyperSynthesis(params, f.y_hat, 1);
  std::tie(f.mu_x, f.sigma_x) = model.PredictParams(params, f.side1, 1);

  f.x_hat = Quantize(f.x_cont, mode, rng);
  f.image_hat = model.Synthesize(params, f.x_hat, f.side1, f.side2);

  f.sigma_z = model.SigmaZ(params);
  f.qz = ZLikelihood(f.z_hat, f.sigma_z);
  f.qy = GaussianLikelihood(f.y_hat, f.mu_y, f.sigma_y);
  f.qx = GaussianLikelihood(f.x_hat, f.mu_x, f.sigma_x);
  return f;
}

}  // namespace c2f
