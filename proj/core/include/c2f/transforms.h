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

#ifndef C2F_TRANSFORMS_H_
#define C2F_TRANSFORMS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "c2f/autodiff.h"
#include "c2f/entropy.h"

namespace c2f {

enum class Activation { kLinear, kRelu };
enum class LayerKind {
  kConv,
  kDeconv,
  kGdn,
  kInverseGdn,
  kSpaceToDepth,
  kDepthToSpace,
};

const char* ToString(Activation a);
const char* ToString(LayerKind k);

// Introspection record of one layer as built.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int kernel = 0;
  int stride = 1;
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  Activation activation = Activation::kLinear;
};

enum class DistortionKind : uint8_t { kMse = 0, kMsSsim = 1 };

// Channel layout of the network. Spatial downsampling is fixed: 16 in the
// main transform and 2 in each of the two hyper levels.
struct ArchConfig {
  int64_t n_main = 128;
  int64_t c_y = 128;
  int64_t c_z = 64;

  static constexpr int kMainStages = 4;
  static constexpr int64_t kMainFactor = 16;
  static constexpr int64_t kDownsampling = 64;

  // c_y = n, c_z = n / 2.
  static ArchConfig FromMain(int64_t n);
  void Validate() const;
  bool operator==(const ArchConfig&) const = default;
};

// A chain of layers whose parameters live in a CodecModel.
class Sequential {
 public:
  struct Layer {
    LayerSpec spec;
    int kernel_param = -1;
    int bias_param = -1;
  };

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<LayerSpec> Describe() const;
  Var Forward(std::span<const Var> params, Var x) const;

 private:
  friend class CodecModel;
  std::vector<Layer> layers_;
};

// Every trainable parameter of the coarse-to-fine codec plus the layer
// graph that uses them.
class CodecModel {
 public:
  // Deterministic random initialization from `seed`.
  explicit CodecModel(const ArchConfig& arch, uint64_t seed = 1);

  const ArchConfig& arch() const { return arch_; }
  uint16_t lambda_tag() const { return lambda_tag_; }
  void set_lambda_tag(uint16_t tag) { lambda_tag_ = tag; }
  DistortionKind distortion() const { return distortion_; }
  void set_distortion(DistortionKind d) { distortion_ = d; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::vector<Parameter*> ParameterPointers();
  // Index of the named parameter or -1.
  int FindParameter(const std::string& name) const;

  // Binds every parameter onto `tape`, with gradients.
  std::vector<Var> Bind(Tape& tape);
  // Binds every parameter as a constant; safe on a shared const model.
  std::vector<Var> BindFrozen(Tape& tape) const;

  // image (b, 64m, 64n, 3) in [0,1] -> X (b, 4m, 4n, n_main).
  Var Analysis(std::span<const Var> p, Var image) const;
  // level 1: X -> Y; level 2: Y -> Z.
  Var HyperAnalysis(std::span<const Var> p, Var input, int level) const;
  // level 1: Y -> side representation on the X grid (n_main channels);
  // level 2: Z -> side representation on the Y grid (c_y channels).
  Var HyperSynthesis(std::span<const Var> p, Var code, int level) const;
  // level 1 predicts (mu, sigma) of X, level 2 those of Y.
  std::pair<Var, Var> PredictParams(std::span<const Var> p, Var side,
                                    int level) const;
  // Aggregating decoder: X_hat plus both side representations -> image.
  // Output is not clipped.
  Var Synthesize(std::span<const Var> p, Var x_hat, Var side1,
                 Var side2) const;
  // Linear map from Y to X's grid used by the information-fidelity loss.
  Var InfoFidelityProject(std::span<const Var> p, Var y) const;
  // Per-channel (1,1,1,c_z) scale of the Z prior.
  Var SigmaZ(std::span<const Var> p) const;

  const Sequential& analysis() const { return analysis_; }
  const Sequential& hyper_analysis(int level) const;
  const Sequential& hyper_synthesis(int level) const;
  const Sequential& predictor(int level) const;
  const Sequential& synthesis_main() const { return synth_main_; }
  const Sequential& side_path(int level) const;
  const Sequential& info_fidelity() const { return info_fidelity_; }

 private:
  int AddParam(const std::string& name, Tensor value);
  void AddConv(Sequential& seq, const std::string& name, int kernel,
               int stride, int64_t cin, int64_t cout, Activation act,
               bool transposed, Rng& rng);
  void AddGdn(Sequential& seq, const std::string& name, int64_t channels,
              bool inverse);
  void AddReshape(Sequential& seq, const std::string& name, LayerKind kind,
                  int64_t cin);
  void BuildHyperAnalysis(Sequential& seq, const std::string& name, int64_t c,
                          int64_t c_out, Rng& rng);
  void BuildHyperSynthesis(Sequential& seq, const std::string& name,
                           int64_t c, int64_t c_in, Rng& rng);
  void BuildSidePath(Sequential& seq, const std::string& name, int64_t cin,
                     int64_t cout, int upsamples, Rng& rng);

  ArchConfig arch_;
  uint16_t lambda_tag_ = 0;
  DistortionKind distortion_ = DistortionKind::kMse;
  std::vector<Parameter> params_;

  Sequential analysis_;
  Sequential hyper_analysis_[2];
  Sequential hyper_synthesis_[2];
  Sequential predictor_[2];
  Sequential synth_main_;
  Sequential side_path_[2];
  Sequential fuse_in_;
  Sequential res_a_;
  Sequential res_b_;
  Sequential fuse_out_;
  Sequential info_fidelity_;
  int sigma_z_param_ = -1;
};

// Quantized latents and the entropy parameters that code them.
struct LatentTriple {
  Tensor x, y, z;
  Tensor mu_x, sigma_x;
  Tensor mu_y, sigma_y;
  Tensor sigma_z;
};

// One full pass: analysis, both hyper levels, quantization, parameter
// prediction, likelihoods and reconstruction.
struct ForwardPass {
  Var x_cont, y_cont, z_cont;
  Var x_hat, y_hat, z_hat;
  Var side1, side2;
  Var mu_x, sigma_x, mu_y, sigma_y, sigma_z;
  Var qx, qy, qz;
  Var image_hat;
};

ForwardPass RunForward(const CodecModel& model, std::span<const Var> params,
                       Var image, QuantizerMode mode, Rng* rng);

// Throws ContractError unless h and w are positive multiples of 64.
void CheckPadded(const Shape& image);

}  // namespace c2f

#endif  // C2F_TRANSFORMS_H_
