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

#ifndef C2F_DATASET_H_
#define C2F_DATASET_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "c2f/image_io.h"
#include "c2f/random.h"
#include "c2f/tensor.h"

namespace c2f {

// PNG and PPM files directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir);

// Decodes `paths`, optionally box-downsampling each by an integer factor.
// Undecodable files and images smaller than `patch` on either side are
// skipped with a message appended to `warnings`. Throws ConfigError when
// nothing is left.
std::vector<Image> LoadImages(const std::vector<std::filesystem::path>& paths,
                              int64_t patch, int downsample,
                              std::vector<std::string>* warnings);

// Integer box filter; sizes are floored.
Image Downsample(const Image& image, int factor);

// A smooth two-colour gradient mostly covered by dead-leaves occlusion:
// elliptical leaves with power-law radii, each with its own slope and
// optional stripes or grain. Half the images are blurred slightly; all get
// mild Gaussian noise.
Image SyntheticImage(int64_t width, int64_t height, Rng& rng);
std::vector<Image> SyntheticCorpus(int count, int64_t size, uint64_t seed);

// Random crops with random horizontal and vertical flips. Batch `step` is a
// pure function of (seed, step), so any step can be regenerated.
class PatchSampler {
 public:
  PatchSampler(std::vector<Image> images, int64_t patch, int64_t batch,
               uint64_t seed);
  Tensor Batch(uint64_t step) const;
  int64_t patch() const { return patch_; }
  int64_t batch() const { return batch_; }
  size_t num_images() const { return images_.size(); }

 private:
  std::vector<Image> images_;
  int64_t patch_;
  int64_t batch_;
  uint64_t seed_;
};

// Builds batches [first, last) on a worker thread into a bounded queue.
class BatchPrefetcher {
 public:
  BatchPrefetcher(const PatchSampler& sampler, uint64_t first, uint64_t last,
                  size_t capacity = 2);
  ~BatchPrefetcher();
  BatchPrefetcher(const BatchPrefetcher&) = delete;
  BatchPrefetcher& operator=(const BatchPrefetcher&) = delete;

  // Blocks until the next batch in order is ready. Throws ContractError past
  // `last`, or rethrows a producer failure.
  Tensor Next();

 private:
  void Produce();

  const PatchSampler& sampler_;
  uint64_t next_, last_, consumed_;
  size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Tensor> queue_;
  std::exception_ptr error_;
  bool stop_ = false;
  std::thread worker_;
};

}  // namespace c2f

#endif  // C2F_DATASET_H_
