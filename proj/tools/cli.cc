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

#include "cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "c2f/bytes.h"
#include "c2f/codec.h"
#include "c2f/dataset.h"
#include "c2f/errors.h"
#include "c2f/metrics.h"
#include "c2f/rd_report.h"
#include "c2f/training.h"
#include "c2f/weights_io.h"

namespace c2f::cli {
namespace {

namespace fs = std::filesystem;

// Command failures carry their exit code.
struct Failure {
  int code;
  std::string message;
};

struct LoadedModel {
  CodecModel model;
  ModelId id;
};

// The model id is the digest of the weights file exactly as stored.
LoadedModel LoadModel(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return {DeserializeWeights(bytes), Sha256(bytes)};
  } catch (const FormatError& e) {
    throw Failure{kStreamMismatch, path + ": " + e.what()};
  }
}

void RequireFile(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Failure{kIoFailure, "no such file: " + path};
  }
}

void RequireDir(const std::string& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    throw Failure{kIoFailure, "no such directory: " + path};
  }
}

// Parent directory of an output file must exist.
void RequireOutput(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec)) {
    throw Failure{kIoFailure, "output directory does not exist: " +
                                  parent.string()};
  }
}

// Writes `payload` to --out if given, else to `out`.
void Emit(const std::string& path, const std::string& payload, std::ostream& out) {
  if (path.empty()) {
    out << payload;
    return;
  }
  WriteFileBytes(path, {reinterpret_cast<const uint8_t*>(payload.data()),
                        payload.size()});
}

double Milliseconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - since)
      .count();
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data_dir;
  int synthetic = 0;
  int64_t synthetic_size = 64;
  int downsample = 1;
  std::string out;
  std::string log;
  std::string resume;
  std::string distortion = "mse";
  int64_t n_main = 128;
  TrainConfig config;
};

int CmdTrain(const TrainArgs& a, std::ostream& err) {
  if (a.data_dir.empty() == (a.synthetic == 0)) {
    throw Failure{kBadArgs, "give exactly one of --data or --synthetic"};
  }
  if (!a.data_dir.empty()) RequireDir(a.data_dir);
  if (!a.resume.empty()) RequireFile(a.resume);
  RequireOutput(a.out);
  if (!a.log.empty()) RequireOutput(a.log);

  TrainConfig cfg = a.config;
  if (a.distortion == "mse") {
    cfg.distortion = DistortionKind::kMse;
  } else if (a.distortion == "msssim") {
    cfg.distortion = DistortionKind::kMsSsim;
  } else {
    throw Failure{kBadArgs, "--distortion must be mse or msssim"};
  }
  cfg.Validate();

  std::vector<Image> images;
  if (a.synthetic > 0) {
    images = SyntheticCorpus(a.synthetic, a.synthetic_size, cfg.seed);
  } else {
    std::vector<std::string> warnings;
    images = LoadImages(ListImages(a.data_dir), cfg.patch, a.downsample, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
  }
  const PatchSampler sampler(std::move(images), cfg.patch, cfg.batch, cfg.seed);

  CodecModel model(ArchConfig::FromMain(a.n_main), cfg.seed);
  Trainer trainer(model, cfg);
  if (!a.resume.empty()) {
    trainer.LoadCheckpoint(a.resume);
    err << "resumed at step " << trainer.step() << '\n';
  }
  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, trainer.step() == 0 ? std::ios::trunc : std::ios::app);
    if (!log_file) throw IoError("cannot open " + a.log);
  }
  const auto start = std::chrono::steady_clock::now();
  const int64_t every = std::max<int64_t>(1, cfg.steps / 20);
  Train(trainer, sampler, a.log.empty() ? nullptr : &log_file,
        [&](int64_t step, const LossTerms& t) {
          if ((step + 1) % every == 0 || step + 1 == cfg.steps) {
            err << "step " << step + 1 << "/" << cfg.steps
                << " loss=" << t.loss << " bpp=" << t.rate_bpp
                << " D=" << t.distortion << " L_if=" << t.l_if << '\n';
          }
        });
  SaveWeights(model, a.out);
  err << "train: steps=" << cfg.steps << " seconds="
      << Fmt("%.1f", Milliseconds(start) / 1000.0) << " model=" << a.out
      << " model_id=" << ToHex(ComputeModelId(model)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- encode

int CmdEncode(const std::string& model_path, const std::string& input,
              const std::string& output, std::ostream& err) {
  RequireFile(model_path);
  RequireFile(input);
  RequireOutput(output);
  const LoadedModel m = LoadModel(model_path);
  const Image image = ReadImage(input);
  const auto start = std::chrono::steady_clock::now();
  const EncodeResult r = EncodeImage(m.model, m.id, image);
  const double ms = Milliseconds(start);
  WriteFileBytes(output, r.container);
  err << "encode: bpp=" << Fmt("%.6f", Bpp(r.container.size(), image.width, image.height))
      << " bytes=" << r.container.size() << " width=" << image.width
      << " height=" << image.height << " encode_ms=" << Fmt("%.1f", ms)
      << " latent_sha256=" << LatentChecksum(r.latents) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- decode

int CmdDecode(const std::string& model_path, const std::string& input,
              const std::string& output, const std::string& expect_checksum,
              std::ostream& err) {
  RequireFile(model_path);
  RequireFile(input);
  RequireOutput(output);
  const LoadedModel m = LoadModel(model_path);
  const auto bytes = ReadFileBytes(input);
  const auto start = std::chrono::steady_clock::now();
  DecodeResult r;
  try {
    r = DecodeImage(m.model, m.id, bytes);
  } catch (const FormatError& e) {
    throw Failure{kStreamMismatch, input + ": " + e.what()};
  } catch (const CorruptStreamError& e) {
    throw Failure{kStreamMismatch, input + ": corrupt stream: " + e.what()};
  }
  const double ms = Milliseconds(start);
  const std::string checksum = LatentChecksum(r.latents);
  if (!expect_checksum.empty() && expect_checksum != checksum) {
    throw Failure{kStreamMismatch, "decoded latents " + checksum +
                                       " differ from the encoder's " +
                                       expect_checksum};
  }
  WriteImage(r.image, output);
  err << "decode: width=" << r.image.width << " height=" << r.image.height
      << " decode_ms=" << Fmt("%.1f", ms) << " latent_sha256=" << checksum
      << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval

RdRecord Measure(const std::string& codec, const std::string& name,
                 const Image& ref, const Image& dist, std::optional<uint64_t> bytes) {
  RdRecord r;
  r.codec = codec;
  r.image = name;
  r.psnr_db = Psnr(ref, dist);
  r.msssim = MsSsim(ref, dist);
  r.msssim_db = MsSsimDb(r.msssim);
  r.pixels = ref.width * ref.height;
  if (bytes) {
    r.bits = 8 * *bytes;
    r.bpp = Bpp(*bytes, ref.width, ref.height);
  } else {
    r.bpp = std::nan("");
  }
  return r;
}

int CmdEval(const std::string& reference, const std::string& distorted,
            const std::string& bitstream, const std::string& codec,
            const std::string& out_path, std::ostream& out) {
  RequireFile(reference);
  RequireFile(distorted);
  if (!bitstream.empty()) RequireFile(bitstream);
  if (!out_path.empty()) RequireOutput(out_path);
  const Image ref = ReadImage(reference);
  const Image dist = ReadImage(distorted);
  std::optional<uint64_t> bytes;
  if (!bitstream.empty()) bytes = fs::file_size(bitstream);
  std::ostringstream csv;
  WriteRdCsv(csv, {Measure(codec, fs::path(reference).filename().string(), ref,
                           dist, bytes)});
  Emit(out_path, csv.str(), out);
  return kOk;
}

// ---------------------------------------------------------------- rdcurve

struct RdCurveArgs {
  std::vector<std::string> models;
  std::string images;
  std::string codec = "c2f";
  std::string dataset;
  std::string per_image;
  std::string out;
  std::optional<int> threads;
};

int CmdRdCurve(const RdCurveArgs& a, std::ostream& out, std::ostream& err) {
  for (const auto& m : a.models) RequireFile(m);
  RequireDir(a.images);
  if (!a.out.empty()) RequireOutput(a.out);
  if (!a.per_image.empty()) RequireOutput(a.per_image);
  const int threads = ResolveThreads(a.threads);

  std::vector<LoadedModel> models;
  for (const auto& m : a.models) models.push_back(LoadModel(m));
  const auto paths = ListImages(a.images);
  if (paths.empty()) throw Failure{kIoFailure, "no PNG/PPM images in " + a.images};
  std::vector<Image> images;
  for (const auto& p : paths) images.push_back(ReadImage(p));

  std::vector<RdRecord> records(models.size() * images.size());
  ParallelFor(records.size(), threads, [&](size_t job) {
    const size_t mi = job / images.size(), ii = job % images.size();
    const LoadedModel& m = models[mi];
    const EncodeResult enc = EncodeImage(m.model, m.id, images[ii]);
    const DecodeResult dec = DecodeImage(m.model, m.id, enc.container);
    if (!(dec.latents == enc.latents)) {
      throw EvaluationError("latent mismatch decoding " + paths[ii].string());
    }
    records[job] = Measure(a.codec, paths[ii].filename().string(), images[ii],
                           dec.image, enc.container.size());
  });

  const std::string dataset =
      a.dataset.empty() ? fs::path(a.images).filename().string() : a.dataset;
  const auto points = AverageCurves(records, dataset);
  std::vector<RdRecord> averaged;
  for (const auto& p : points) {
    averaged.push_back(p.mean);
    err << "point " << p.rank << ": images=" << p.images
        << " mean_bpp=" << FormatMetric(p.mean.bpp)
        << " pooled_bpp=" << FormatMetric(p.pooled_bpp)
        << (p.diverges ? " bpp_divergence=yes" : " bpp_divergence=no") << '\n';
  }
  if (!a.per_image.empty()) {
    std::ostringstream csv;
    WriteRdCsv(csv, records);
    Emit(a.per_image, csv.str(), out);
  }
  std::ostringstream csv;
  WriteRdCsv(csv, averaged);
  Emit(a.out, csv.str(), out);
  return kOk;
}

// ---------------------------------------------------------------- bdrate

struct BdRateArgs {
  std::string anchor;
  std::vector<std::string> tests;
  std::string anchor_codec;
  std::string metric = "psnr_db";
  std::string dataset;
  std::vector<double> range;
  std::string out;
};

int CmdBdRate(const BdRateArgs& a, std::ostream& out) {
  RequireFile(a.anchor);
  for (const auto& t : a.tests) RequireFile(t);
  if (!a.out.empty()) RequireOutput(a.out);
  std::optional<std::pair<double, double>> range;
  if (!a.range.empty()) {
    if (a.range.size() != 2) throw Failure{kBadArgs, "--range takes LO HI"};
    range = std::make_pair(a.range[0], a.range[1]);
  } else if (!a.dataset.empty()) {
    range = BppRangePreset(a.dataset);
  }

  std::vector<RdRecord> anchor_rows = ReadRdCsvFile(a.anchor);
  if (anchor_rows.empty()) throw ConfigError(a.anchor + " has no rows");
  std::string anchor_codec = a.anchor_codec;
  if (anchor_codec.empty()) {
    anchor_codec = anchor_rows.front().codec;
    for (const auto& r : anchor_rows) {
      if (r.codec != anchor_codec) {
        throw ConfigError(a.anchor + " holds several codecs; pick one with "
                                     "--anchor-codec");
      }
    }
  }
  std::vector<RdRecord> test_rows;
  for (const auto& t : a.tests) {
    auto rows = ReadRdCsvFile(t);
    test_rows.insert(test_rows.end(), rows.begin(), rows.end());
  }
  const std::string dataset = a.dataset.empty() ? "dataset" : a.dataset;
  const auto anchor_points = AverageCurves(anchor_rows, dataset);
  const auto test_points = AverageCurves(test_rows, dataset);
  std::ostringstream csv;
  WriteBdCsv(csv, BdRateTable(anchor_points, anchor_codec, test_points, dataset,
                               a.metric, range));
  Emit(a.out, csv.str(), out);
  return kOk;
}

std::vector<char*> Argv(std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  return argv;
}

}  // namespace

int Run(const std::vector<std::string>& input_args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Coarse-to-fine hyperprior image codec", "c2f"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  uint64_t seed = 42;
  app.add_option("--seed", seed, "Seed for every random choice")
      ->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train one model for one lambda");
  c_train->add_option("--data", train.data_dir, "Directory of PNG/PPM images");
  c_train->add_option("--synthetic", train.synthetic,
                      "Train on N synthetic images instead");
  c_train->add_option("--synthetic-size", train.synthetic_size,
                      "Side of synthetic images")->capture_default_str();
  c_train->add_option("--downsample", train.downsample,
                      "Integer box downsampling of loaded images")
      ->capture_default_str();
  c_train->add_option("--out", train.out, "Weights file to write")->required();
  c_train->add_option("--log", train.log, "CSV metrics log");
  c_train->add_option("--resume", train.resume, "Checkpoint to continue from");
  c_train->add_option("--lambda", train.config.lambda)->capture_default_str();
  c_train->add_option("--distortion", train.distortion, "mse or msssim")
      ->capture_default_str();
  c_train->add_option("--n-main", train.n_main, "Channels of the main latent")
      ->capture_default_str();
  c_train->add_option("--steps", train.config.steps)->capture_default_str();
  c_train->add_option("--batch", train.config.batch)->capture_default_str();
  c_train->add_option("--patch", train.config.patch)->capture_default_str();
  c_train->add_option("--lr", train.config.lr)->capture_default_str();
  c_train->add_option("--if-weight", train.config.if_weight)->capture_default_str();
  c_train->add_option("--checkpoint-every", train.config.checkpoint_every)
      ->capture_default_str();
  std::string checkpoint_dir = "checkpoints";
  c_train->add_option("--checkpoint-dir", checkpoint_dir)->capture_default_str();

  std::string model, input, output, expect;
  auto* c_encode = app.add_subcommand("encode", "Compress an image");
  c_encode->add_option("--model", model)->required();
  c_encode->add_option("--input", input)->required();
  c_encode->add_option("--output", output)->required();

  auto* c_decode = app.add_subcommand("decode", "Decompress to PNG");
  c_decode->add_option("--model", model)->required();
  c_decode->add_option("--input", input)->required();
  c_decode->add_option("--output", output)->required();
  c_decode->add_option("--expect-latents", expect,
                       "Fail unless the decoded latent checksum matches");

  std::string reference, distorted, bitstream, codec = "c2f", out_path;
  auto* c_eval = app.add_subcommand("eval", "Metrics of one image pair");
  c_eval->add_option("--reference", reference)->required();
  c_eval->add_option("--distorted", distorted)->required();
  c_eval->add_option("--bitstream", bitstream, "Container to take bpp from");
  c_eval->add_option("--codec", codec)->capture_default_str();
  c_eval->add_option("--out", out_path);

  RdCurveArgs rd;
  auto* c_rd = app.add_subcommand("rdcurve", "Averaged RD points of a model zoo");
  c_rd->add_option("--models", rd.models)->required();
  c_rd->add_option("--images", rd.images)->required();
  c_rd->add_option("--codec", rd.codec)->capture_default_str();
  c_rd->add_option("--dataset", rd.dataset, "Label; defaults to the directory name");
  c_rd->add_option("--per-image", rd.per_image, "Per-image CSV to write");
  c_rd->add_option("--out", rd.out);
  int threads = 0;
  auto* threads_opt = c_rd->add_option("--threads", threads,
                                       "Parallel images (else C2F_THREADS)");

  BdRateArgs bd;
  auto* c_bd = app.add_subcommand("bdrate", "BD-rate table from RD CSVs");
  c_bd->add_option("--anchor", bd.anchor)->required();
  c_bd->add_option("--test", bd.tests)->required();
  c_bd->add_option("--anchor-codec", bd.anchor_codec);
  c_bd->add_option("--metric", bd.metric, "Distortion column")->capture_default_str();
  c_bd->add_option("--dataset", bd.dataset, "kodak, tecnick, clic or a label");
  c_bd->add_option("--range", bd.range, "bpp interval LO HI")->expected(2);
  c_bd->add_option("--out", bd.out);

  std::vector<std::string> args = input_args;
  if (args.empty()) args.push_back("c2f");
  auto argv = Argv(args);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "c2f: " << e.what() << '\n';
    return kBadArgs;
  }

  const bool eval_family = c_eval->parsed() || c_rd->parsed() || c_bd->parsed();
  try {
    if (c_train->parsed()) {
      train.config.seed = seed;
      train.config.checkpoint_dir = checkpoint_dir;
      return CmdTrain(train, err);
    }
    if (c_encode->parsed()) return CmdEncode(model, input, output, err);
    if (c_decode->parsed()) return CmdDecode(model, input, output, expect, err);
    if (c_eval->parsed()) {
      return CmdEval(reference, distorted, bitstream, codec, out_path, out);
    }
    if (c_rd->parsed()) {
      if (threads_opt->count() > 0) rd.threads = threads;
      return CmdRdCurve(rd, out, err);
    }
    if (c_bd->parsed()) return CmdBdRate(bd, out);
  } catch (const Failure& f) {
    err << "c2f: " << f.message << '\n';
    return f.code;
  } catch (const IoError& e) {
    err << "c2f: " << e.what() << '\n';
    return kIoFailure;
  } catch (const FormatError& e) {
    err << "c2f: " << e.what() << '\n';
    return eval_family ? kEvaluationFailure : kStreamMismatch;
  } catch (const CorruptStreamError& e) {
    err << "c2f: corrupt stream: " << e.what() << '\n';
    return eval_family ? kEvaluationFailure : kStreamMismatch;
  } catch (const ConfigError& e) {
    err << "c2f: " << e.what() << '\n';
    return eval_family ? kEvaluationFailure : kBadArgs;
  } catch (const std::exception& e) {
    err << "c2f: " << e.what() << '\n';
    return eval_family ? kEvaluationFailure : kBadArgs;
  }
  return kBadArgs;
}

}  // namespace c2f::cli
