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

#include "c2f/training.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "c2f/entropy.h"
#include "c2f/errors.h"
#include "c2f/metrics.h"
#include "c2f/weights_io.h"

namespace c2f {

void TrainConfig::Validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be non-negative");
  }
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (patch < 64 || patch % ArchConfig::kDownsampling != 0) {
    throw ConfigError("patch must be a positive multiple of 64, got " +
                      std::to_string(patch));
  }
  if (!(if_weight >= 0.0) || !(0.0 <= if_hold && if_hold <= if_end)) {
    throw ConfigError("information-fidelity schedule needs weight >= 0 and "
                      "0 <= hold <= end");
  }
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

double TrainConfig::LearningRate(int64_t step) const {
  double rate = lr;
  for (double f : lr_decay_at) {
    if (static_cast<double>(step) >= f * static_cast<double>(steps)) rate *= lr_decay;
  }
  return rate;
}

double TrainConfig::IfWeight(int64_t step) const {
  const double s = static_cast<double>(step);
  const double hold = if_hold * static_cast<double>(steps);
  const double end = if_end * static_cast<double>(steps);
  if (s < hold) return if_weight;
  if (s >= end) return 0.0;
  return if_weight * (end - s) / (end - hold);
}

Rng NoiseRng(uint64_t seed, int64_t step) {
  return Rng(seed, static_cast<uint64_t>(step));
}

RdLoss ComputeRdLoss(const CodecModel& model, std::span<const Var> params,
                     Var batch, double lambda, DistortionKind distortion,
                     double if_weight, QuantizerMode mode, Rng* noise) {
  RdLoss l;
  l.forward = RunForward(model, params, batch, mode, noise);
  const ForwardPass& f = l.forward;
  const Shape s = batch.shape();
  const float inv_pixels = 1.0f / static_cast<float>(s.b * s.h * s.w);
  l.bits_z = RateBits(f.qz);
  l.bits_y = RateBits(f.qy);
  l.bits_x = RateBits(f.qx);
  l.rate_bpp = Scale(Add(Add(l.bits_z, l.bits_y), l.bits_x), inv_pixels);
  if (distortion == DistortionKind::kMse) {
    l.distortion = Scale(Mse(f.image_hat, batch), static_cast<float>(kMseScale));
  } else {
    l.distortion = Scale(AddScalar(Scale(MsSsim(f.image_hat, batch), -1.0f), 1.0f),
                         static_cast<float>(kMsSsimWeight));
  }
  l.l_if = Mse(model.InfoFidelityProject(params, f.y_hat), StopGradient(f.x_cont));
  l.loss = Add(Add(l.rate_bpp, Scale(l.distortion, static_cast<float>(lambda))),
               Scale(l.l_if, static_cast<float>(if_weight)));
  const std::pair<const char*, Var> terms[] = {
      {"rate", l.rate_bpp}, {"distortion", l.distortion}, {"l_if", l.l_if},
      {"loss", l.loss}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v.value()[0])) {
      throw NumericError(std::string("non-finite ") + name + " term");
    }
  }
  return l;
}

LossTerms Terms(const RdLoss& l, double if_weight) {
  LossTerms t;
  t.loss = l.loss.value()[0];
  t.rate_bpp = l.rate_bpp.value()[0];
  t.distortion = l.distortion.value()[0];
  t.l_if = l.l_if.value()[0];
  t.if_weight = if_weight;
  t.bits_z = l.bits_z.value()[0];
  t.bits_y = l.bits_y.value()[0];
  t.bits_x = l.bits_x.value()[0];
  return t;
}

Trainer::Trainer(CodecModel& model, TrainConfig config)
    : model_(model), config_(std::move(config)) {
  config_.Validate();
  model_.set_lambda_tag(static_cast<uint16_t>(std::lround(config_.lambda * 1e4)));
  model_.set_distortion(config_.distortion);
}

LossTerms Trainer::Step(const Tensor& batch) {
  const int64_t step = state_.step;
  const double w_if = config_.IfWeight(step);
  Tape tape;
  auto params = model_.Bind(tape);
  Rng noise = NoiseRng(config_.seed, step);
  const RdLoss l = ComputeRdLoss(model_, params, tape.Constant(batch),
                                 config_.lambda, config_.distortion, w_if,
                                 QuantizerMode::kTrainNoise, &noise);
  for (Parameter& p : model_.parameters()) p.ZeroGrad();
  tape.Backward(l.loss);
  auto ptrs = model_.ParameterPointers();
  AdamStep(ptrs, state_, config_.LearningRate(step), config_.adam);
  return Terms(l, w_if);
}

LossTerms Trainer::Evaluate(const Tensor& batch) const {
  const double w_if = config_.IfWeight(state_.step);
  Tape tape;
  auto params = model_.BindFrozen(tape);
  Rng noise = NoiseRng(config_.seed, state_.step);
  return Terms(ComputeRdLoss(model_, params, tape.Constant(batch),
                             config_.lambda, config_.distortion, w_if,
                             QuantizerMode::kTrainNoise, &noise),
               w_if);
}

void Trainer::SaveCheckpoint(const std::filesystem::path& path) const {
  std::vector<NamedTensor> extra;
  // The step is split into two exactly representable halves.
  Tensor step(Shape{1, 1, 1, 2});
  step[0] = static_cast<float>(state_.step >> 20);
  step[1] = static_cast<float>(state_.step & 0xFFFFF);
  extra.push_back({"train.step", step});
  const auto& params = model_.parameters();
  for (size_t i = 0; i < state_.m.size(); ++i) {
    extra.push_back({"adam.m." + params[i].name, state_.m[i]});
    extra.push_back({"adam.v." + params[i].name, state_.v[i]});
  }
  SaveWeights(model_, path, extra);
}

void Trainer::LoadCheckpoint(const std::filesystem::path& path) {
  std::vector<NamedTensor> extra;
  CodecModel loaded = LoadWeights(path, &extra);
  if (!(loaded.arch() == model_.arch())) {
    throw ConfigError("checkpoint " + path.string() +
                      " has a different architecture");
  }
  std::map<std::string, Tensor> by_name;
  for (auto& e : extra) by_name[e.name] = std::move(e.value);
  const auto it = by_name.find("train.step");
  if (it == by_name.end() || it->second.size() != 2) {
    throw FormatError(FormatErrorKind::kBadHeader,
                      path.string() + " is a weights file, not a checkpoint");
  }
  AdamState state;
  state.step = (static_cast<int64_t>(it->second[0]) << 20) +
               static_cast<int64_t>(it->second[1]);
  auto& params = loaded.parameters();
  if (state.step > 0) {
    for (const auto& p : params) {
      auto m = by_name.find("adam.m." + p.name);
      auto v = by_name.find("adam.v." + p.name);
      if (m == by_name.end() || v == by_name.end()) {
        throw FormatError(FormatErrorKind::kBadHeader,
                          "checkpoint lacks optimizer state for " + p.name);
      }
      state.m.push_back(std::move(m->second));
      state.v.push_back(std::move(v->second));
    }
  }
  auto& dst = model_.parameters();
  for (size_t i = 0; i < dst.size(); ++i) dst[i].value = params[i].value;
  model_.set_lambda_tag(loaded.lambda_tag());
  model_.set_distortion(loaded.distortion());
  state_ = std::move(state);
}

std::vector<LossTerms> Train(Trainer& trainer, const PatchSampler& data,
                             std::ostream* log, const ProgressFn& progress) {
  const TrainConfig& cfg = trainer.config();
  const int64_t first = trainer.step();
  std::vector<LossTerms> history;
  if (first >= cfg.steps) return history;
  if (data.patch() != cfg.patch || data.batch() != cfg.batch) {
    throw ConfigError("sampler geometry does not match the training config");
  }
  if (log && first == 0) *log << kTrainLogHeader << '\n';
  BatchPrefetcher prefetch(data, static_cast<uint64_t>(first),
                           static_cast<uint64_t>(cfg.steps));
  for (int64_t step = first; step < cfg.steps; ++step) {
    const LossTerms t = trainer.Step(prefetch.Next());
    history.push_back(t);
    if (log) {
      char line[160];
      std::snprintf(line, sizeof line, "%lld,%.9g,%.9g,%.9g,%.9g",
                    static_cast<long long>(step), t.rate_bpp, t.distortion,
                    t.l_if, t.loss);
      *log << line << '\n';
    }
    if (progress) progress(step, t);
    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      trainer.SaveCheckpoint(cfg.checkpoint_dir /
                             ("step_" + std::to_string(step + 1) + ".c2fw"));
    }
  }
  return history;
}

}  // namespace c2f
