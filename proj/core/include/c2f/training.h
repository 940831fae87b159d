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

#ifndef C2F_TRAINING_H_
#define C2F_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "c2f/adam.h"
#include "c2f/dataset.h"
#include "c2f/transforms.h"

namespace c2f {

// Distortion units: D = 255^2 * MSE of [0,1] pixels, or
// kMsSsimWeight * (1 - MS-SSIM).
inline constexpr double kMseScale = 255.0 * 255.0;
inline constexpr double kMsSsimWeight = 2000.0;

struct TrainConfig {
  double lambda = 0.01;
  DistortionKind distortion = DistortionKind::kMse;
  double lr = 1e-4;
  // Learning rate is multiplied by lr_decay at each listed fraction of steps.
  std::vector<double> lr_decay_at = {0.7, 0.9};
  double lr_decay = 0.5;
  int64_t steps = 1000;
  int64_t batch = 8;
  int64_t patch = 128;
  uint64_t seed = 42;
  // Information-fidelity weight: if_weight until if_hold * steps, then
  // linear to zero at if_end * steps.
  double if_weight = 0.1;
  double if_hold = 0.2;
  double if_end = 0.5;
  // 0 disables periodic checkpoints.
  int64_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  AdamConfig adam;

  void Validate() const;
  double LearningRate(int64_t step) const;
  double IfWeight(int64_t step) const;
};

struct LossTerms {
  double loss = 0.0;
  double rate_bpp = 0.0;
  double distortion = 0.0;
  double l_if = 0.0;
  double if_weight = 0.0;
  // Modeled bits per stream.
  double bits_z = 0.0, bits_y = 0.0, bits_x = 0.0;
};

struct RdLoss {
  Var loss, rate_bpp, distortion, l_if;
  Var bits_z, bits_y, bits_x;
  ForwardPass forward;
};

// loss = R_bpp + lambda * D + if_weight * L_if on a (b, h, w, 3) batch.
// L_if is the mean squared error between F(Y_hat) and X with gradients
// stopped at X. Throws NumericError naming the offending term if any term is
// non-finite.
RdLoss ComputeRdLoss(const CodecModel& model, std::span<const Var> params,
                     Var batch, double lambda, DistortionKind distortion,
                     double if_weight, QuantizerMode mode, Rng* noise);

LossTerms Terms(const RdLoss& l, double if_weight);

// Quantization noise of training step `step`.
Rng NoiseRng(uint64_t seed, int64_t step);

// Owns optimizer state and the step counter for one model.
class Trainer {
 public:
  Trainer(CodecModel& model, TrainConfig config);

  // One optimization step on `batch` at the current step index.
  LossTerms Step(const Tensor& batch);
  // The loss Step would report, without updating anything.
  LossTerms Evaluate(const Tensor& batch) const;

  int64_t step() const { return state_.step; }
  const TrainConfig& config() const { return config_; }
  CodecModel& model() { return model_; }

  // Weights plus optimizer state and step, in the weights format.
  void SaveCheckpoint(const std::filesystem::path& path) const;
  // Restores model parameters, optimizer state and step from a checkpoint
  // written for the same architecture.
  void LoadCheckpoint(const std::filesystem::path& path);

 private:
  CodecModel& model_;
  TrainConfig config_;
  AdamState state_;
};

using ProgressFn = std::function<void(int64_t step, const LossTerms&)>;

// Runs until config.steps, continuing from trainer.step(). Appends
// "step,rate_bpp,distortion,l_if,loss" rows to `log` (header first when the
// trainer starts at step 0) and writes periodic checkpoints.
std::vector<LossTerms> Train(Trainer& trainer, const PatchSampler& data,
                             std::ostream* log, const ProgressFn& progress = {});

inline constexpr const char* kTrainLogHeader = "step,rate_bpp,distortion,l_if,loss";

}  // namespace c2f

#endif  // C2F_TRAINING_H_
