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

#ifndef C2F_RD_REPORT_H_
#define C2F_RD_REPORT_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "c2f/bd_rate.h"

namespace c2f {

// One row of the RD CSV: codec,image,bpp,psnr_db,msssim,msssim_db followed
// by any extra metric columns. Infinite values are written as "inf";
// unknown values as "nan".
struct RdRecord {
  std::string codec;
  std::string image;
  double bpp = 0.0;
  double psnr_db = 0.0;
  double msssim = 0.0;
  double msssim_db = 0.0;
  std::map<std::string, double> extra;
  // Not serialized: size data used for pooled averaging when known.
  uint64_t bits = 0;
  int64_t pixels = 0;

  // Value of a named column, core or extra. Throws ConfigError if absent.
  double Metric(const std::string& column) const;
};

inline constexpr const char* kRdCsvHeader =
    "codec,image,bpp,psnr_db,msssim,msssim_db";
inline constexpr const char* kBdCsvHeader =
    "codec,dataset,range_lo,range_hi,bd_rate_pct";

std::string FormatMetric(double v);
double ParseMetric(const std::string& s);

void WriteRdCsv(std::ostream& out, const std::vector<RdRecord>& records);
// Accepts extra trailing columns; `source` names the input in errors.
std::vector<RdRecord> ReadRdCsv(std::istream& in, const std::string& source);
std::vector<RdRecord> ReadRdCsvFile(const std::string& path);

// Averaged operating point of one codec: rows of every image are ranked by
// bpp, and the k-th rows of all images form point k.
struct AveragedPoint {
  std::string codec;
  int rank = 0;
  int images = 0;
  RdRecord mean;  // per-image means, image field holds the dataset label
  // Total bits over total pixels; NaN when sizes are unknown.
  double pooled_bpp = 0.0;
  // |pooled - mean| / mean > 1%.
  bool diverges = false;
};

inline constexpr double kBppDivergence = 0.01;

// Groups by codec (first-appearance order). Throws EvaluationError if a
// codec has a different number of rows for different images.
std::vector<AveragedPoint> AverageCurves(const std::vector<RdRecord>& records,
                                         const std::string& dataset);

// Builds the curve of one codec from averaged points. `column` is any
// metric column; psnr_db, msssim and msssim_db map to their typed metric.
RdCurve CurveFromPoints(const std::vector<AveragedPoint>& points,
                        const std::string& codec, const std::string& column);

struct BdRow {
  std::string codec;
  std::string dataset;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double bd_rate_pct = 0.0;
};

// BD-rate of every codec in `test` against `anchor_codec` in `anchor`.
// Throws ConfigError if the anchor has no points.
std::vector<BdRow> BdRateTable(const std::vector<AveragedPoint>& anchor,
                               const std::string& anchor_codec,
                               const std::vector<AveragedPoint>& test,
                               const std::string& dataset,
                               const std::string& column,
                               std::optional<std::pair<double, double>> range);
void WriteBdCsv(std::ostream& out, const std::vector<BdRow>& rows);

// Runs fn(0..n-1) on up to `threads` workers. The first exception thrown
// is rethrown after all workers stop.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn);

// --threads value, else C2F_THREADS, else 1.
int ResolveThreads(std::optional<int> flag);

}  // namespace c2f

#endif  // C2F_RD_REPORT_H_
