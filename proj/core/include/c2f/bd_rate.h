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

#ifndef C2F_BD_RATE_H_
#define C2F_BD_RATE_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace c2f {

enum class DistortionMetric { kPsnrDb, kMsSsim, kMsSsimDb };
const char* ToString(DistortionMetric m);

struct RdPoint {
  double bpp = 0.0;
  double distortion = 0.0;
};

// Points sorted by strictly increasing bpp.
struct RdCurve {
  std::string codec;
  DistortionMetric metric = DistortionMetric::kPsnrDb;
  std::vector<RdPoint> points;

  // Sorts by bpp. Throws EvaluationError on non-positive or repeated bpp.
  static RdCurve Make(std::string codec, DistortionMetric metric,
                      std::vector<RdPoint> points);
};

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes with
// the shape-preserving three-point end condition). Linear for two knots.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  // Exact integral over [a, b] within the knot range.
  double Integral(double a, double b) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& slopes() const { return d_; }

 private:
  size_t Segment(double x) const;
  double SegmentAntiderivative(size_t k, double s) const;
  std::vector<double> x_, y_, d_;
};

inline constexpr size_t kBdRateMinPoints = 4;

struct BdRateResult {
  double percent = 0.0;
  // Common distortion interval the log-rates were averaged over.
  double d_lo = 0.0;
  double d_hi = 0.0;
};

// Average bitrate difference of `test` relative to `anchor` at equal
// distortion. log2(bpp) is interpolated as a function of distortion on each
// curve; when `bpp_range` is set each curve is restricted to the distortion
// interval its interpolant maps into that bpp range, and the two intervals
// are intersected. Throws EvaluationError naming both curves on too few
// points, non-monotone curves, or an empty overlap.
BdRateResult BdRate(const RdCurve& anchor, const RdCurve& test,
                    std::optional<std::pair<double, double>> bpp_range = {});

// Dataset presets: kodak [0.4, 1.15], tecnick [0.3, 0.6], clic [0.3, 0.9].
std::optional<std::pair<double, double>> BppRangePreset(const std::string& name);

}  // namespace c2f

#endif  // C2F_BD_RATE_H_
