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

#include "c2f/dataset.h"

#include <algorithm>
#include <cmath>

#include "c2f/errors.h"

namespace c2f {

std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  for (const auto& e : it) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Image Downsample(const Image& image, int factor) {
  if (factor < 1) throw ContractError("downsample factor must be >= 1");
  if (factor == 1) return image;
  Image out(image.width / factor, image.height / factor);
  const int area = factor * factor;
  for (int64_t y = 0; y < out.height; ++y) {
    for (int64_t x = 0; x < out.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int sum = 0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            sum += image.at(y * factor + dy, x * factor + dx, c);
          }
        }
        out.at(y, x, c) = static_cast<uint8_t>((sum + area / 2) / area);
      }
    }
  }
  return out;
}

std::vector<Image> LoadImages(const std::vector<std::filesystem::path>& paths,
                              int64_t patch, int downsample,
                              std::vector<std::string>* warnings) {
  std::vector<Image> out;
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  for (const auto& p : paths) {
    Image img;
    try {
      img = Downsample(ReadImage(p), downsample);
    } catch (const std::exception& e) {
      warn("skipping " + p.string() + ": " + e.what());
      continue;
    }
    if (img.width < patch || img.height < patch) {
      warn("skipping " + p.string() + ": " + std::to_string(img.width) + "x" +
           std::to_string(img.height) + " is smaller than the " +
           std::to_string(patch) + " patch");
      continue;
    }
    out.push_back(std::move(img));
  }
  if (out.empty()) {
    throw ConfigError("no usable training images among " +
                      std::to_string(paths.size()) + " files");
  }
  return out;
}

namespace {

constexpr double kLeafMinRadius = 8.0;

// Paints one elliptical leaf onto uncovered pixels; returns pixels painted.
int64_t PaintLeaf(std::vector<double>& px, std::vector<uint8_t>& covered,
                  int64_t width, int64_t height, Rng& rng) {
  // Radius density proportional to r^-3 on [rmin, rmax].
  const double rmin = kLeafMinRadius;
  const double rmax = 0.6 * static_cast<double>(std::max(width, height));
  const double u = rng.Uniform();
  const double r = 1.0 / std::sqrt(1.0 / (rmin * rmin) -
                                   u * (1.0 / (rmin * rmin) - 1.0 / (rmax * rmax)));
  const double cx = rng.Uniform(-r, width + r), cy = rng.Uniform(-r, height + r);
  double base[3];
  const double lum = rng.Uniform(0.0, 255.0);
  for (double& b : base) b = std::clamp(lum + 40.0 * rng.Normal(), 0.0, 255.0);
  const double tilt = rng.Uniform(0.0, 2.0 * M_PI);
  const double slope = rng.Uniform(0.0, 60.0) / std::max(r, 4.0);
  const int texture = static_cast<int>(rng.Below(3));  // flat, wave, grain
  const double freq = rng.Uniform(0.2, 1.2), amp = rng.Uniform(5.0, 40.0);
  const double wave = rng.Uniform(0.0, M_PI);
  const double ecc = rng.Uniform(0.5, 2.0);
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(cy - 2 * r));
  const int64_t y1 = std::min<int64_t>(height, static_cast<int64_t>(cy + 2 * r + 1));
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(cx - 2 * r));
  const int64_t x1 = std::min<int64_t>(width, static_cast<int64_t>(cx + 2 * r + 1));
  int64_t painted = 0;
  for (int64_t y = y0; y < y1; ++y) {
    for (int64_t x = x0; x < x1; ++x) {
      const double dx = (x - cx) * ecc, dy = (y - cy) / ecc;
      if (dx * dx + dy * dy > r * r || covered[y * width + x]) continue;
      covered[y * width + x] = 1;
      ++painted;
      double v = slope * (std::cos(tilt) * (x - cx) + std::sin(tilt) * (y - cy));
      if (texture == 1) v += amp * std::sin(freq * (std::cos(wave) * x + std::sin(wave) * y));
      if (texture == 2) v += 0.5 * amp * rng.Normal();
      for (int c = 0; c < 3; ++c) px[(y * width + x) * 3 + c] = base[c] + v;
    }
  }
  return painted;
}

void BinomialBlur(std::vector<double>& px, int64_t width, int64_t height) {
  constexpr double k[3] = {0.25, 0.5, 0.25};
  std::vector<double> out(px.size());
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = -1; j <= 1; ++j) {
          const int64_t yy = std::clamp<int64_t>(y + j, 0, height - 1);
          for (int i = -1; i <= 1; ++i) {
            const int64_t xx = std::clamp<int64_t>(x + i, 0, width - 1);
            acc += k[j + 1] * k[i + 1] * px[(yy * width + xx) * 3 + c];
          }
        }
        out[(y * width + x) * 3 + c] = acc;
      }
    }
  }
  px.swap(out);
}

}  // namespace

Image SyntheticImage(int64_t width, int64_t height, Rng& rng) {
  if (width <= 0 || height <= 0) throw ContractError("synthetic image needs a positive size");
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.Uniform(0.0, 255.0);
    c1[c] = rng.Uniform(0.0, 255.0);
  }
  const double angle = rng.Uniform(0.0, 2.0 * M_PI);
  const double gx = std::cos(angle), gy = std::sin(angle);
  std::vector<double> px(static_cast<size_t>(width * height * 3));
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      const double t =
          0.5 + (gx * (x - width / 2.0) + gy * (y - height / 2.0)) / (width + height);
      for (int c = 0; c < 3; ++c) {
        px[(y * width + x) * 3 + c] = c0[c] + (c1[c] - c0[c]) * t;
      }
    }
  }
  // Dead-leaves occlusion, painted front to back until the target coverage.
  std::vector<uint8_t> covered(static_cast<size_t>(width * height), 0);
  const double target = rng.Uniform(0.7, 1.0) * static_cast<double>(width * height);
  int64_t painted = 0;
  for (int leaf = 0; leaf < 20000 && painted < target; ++leaf) {
    painted += PaintLeaf(px, covered, width, height, rng);
  }
  if (rng.Below(2) == 1) BinomialBlur(px, width, height);
  const double noise = rng.Uniform(0.5, 4.0);
  Image out(width, height);
  for (size_t i = 0; i < px.size(); ++i) {
    const double v = std::round(px[i] + noise * rng.Normal());
    out.pixels[i] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

std::vector<Image> SyntheticCorpus(int count, int64_t size, uint64_t seed) {
  std::vector<Image> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<uint64_t>(i));
    out.push_back(SyntheticImage(size, size, rng));
  }
  return out;
}

PatchSampler::PatchSampler(std::vector<Image> images, int64_t patch,
                           int64_t batch, uint64_t seed)
    : images_(std::move(images)), patch_(patch), batch_(batch), seed_(seed) {
  if (images_.empty()) throw ConfigError("patch sampler has no images");
  if (patch <= 0 || batch <= 0) {
    throw ConfigError("patch and batch must be positive");
  }
  for (const auto& img : images_) {
    if (img.width < patch || img.height < patch) {
      throw ContractError("image smaller than the patch size");
    }
  }
}

Tensor PatchSampler::Batch(uint64_t step) const {
  // Stream 0 of (seed, *) is reserved for quantization noise.
  Rng rng(seed_ ^ 0x5a4d504c45ULL, step);
  Tensor out(Shape{batch_, patch_, patch_, 3});
  for (int64_t b = 0; b < batch_; ++b) {
    const Image& img = images_[rng.Below(images_.size())];
    const int64_t x0 = static_cast<int64_t>(rng.Below(img.width - patch_ + 1));
    const int64_t y0 = static_cast<int64_t>(rng.Below(img.height - patch_ + 1));
    const bool flip_x = rng.Below(2) == 1;
    const bool flip_y = rng.Below(2) == 1;
    for (int64_t y = 0; y < patch_; ++y) {
      const int64_t sy = y0 + (flip_y ? patch_ - 1 - y : y);
      for (int64_t x = 0; x < patch_; ++x) {
        const int64_t sx = x0 + (flip_x ? patch_ - 1 - x : x);
        for (int c = 0; c < 3; ++c) {
          out.at(b, y, x, c) = img.at(sy, sx, c) / 255.0f;
        }
      }
    }
  }
  return out;
}

BatchPrefetcher::BatchPrefetcher(const PatchSampler& sampler, uint64_t first,
                                 uint64_t last, size_t capacity)
    : sampler_(sampler),
      next_(first),
      last_(last),
      consumed_(first),
      capacity_(std::max<size_t>(capacity, 1)),
      worker_([this] { Produce(); }) {}

BatchPrefetcher::~BatchPrefetcher() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void BatchPrefetcher::Produce() {
  for (;;) {
    uint64_t step;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait(lock, [&] { return stop_ || queue_.size() < capacity_; });
      if (stop_ || next_ >= last_) return;
      step = next_++;
    }
    Tensor t;
    try {
      t = sampler_.Batch(step);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      error_ = std::current_exception();
      cv_.notify_all();
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push_back(std::move(t));
    }
    cv_.notify_all();
  }
}

Tensor BatchPrefetcher::Next() {
  std::unique_lock<std::mutex> lock(mu_);
  if (consumed_ >= last_) throw ContractError("prefetcher exhausted");
  cv_.wait(lock, [&] { return !queue_.empty() || error_; });
  if (queue_.empty()) std::rethrow_exception(error_);
  Tensor t = std::move(queue_.front());
  queue_.pop_front();
  ++consumed_;
  lock.unlock();
  cv_.notify_all();
  return t;
}

}  // namespace c2f
