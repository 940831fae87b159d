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

#include "c2f/rd_report.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "c2f/errors.h"

namespace c2f {
namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const std::vector<std::string> kCoreColumns = {"codec", "image", "bpp",
                                               "psnr_db", "msssim", "msssim_db"};

}  // namespace

double RdRecord::Metric(const std::string& column) const {
  if (column == "bpp") return bpp;
  if (column == "psnr_db") return psnr_db;
  if (column == "msssim") return msssim;
  if (column == "msssim_db") return msssim_db;
  const auto it = extra.find(column);
  if (it == extra.end()) throw ConfigError("no metric column '" + column + "'");
  return it->second;
}

std::string FormatMetric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double ParseMetric(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

void WriteRdCsv(std::ostream& out, const std::vector<RdRecord>& records) {
  std::vector<std::string> extra_cols;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.extra) {
      if (std::find(extra_cols.begin(), extra_cols.end(), k) == extra_cols.end()) {
        extra_cols.push_back(k);
      }
    }
  }
  out << kRdCsvHeader;
  for (const auto& c : extra_cols) out << ',' << c;
  out << '\n';
  for (const auto& r : records) {
    out << r.codec << ',' << r.image << ',' << FormatMetric(r.bpp) << ','
        << FormatMetric(r.psnr_db) << ',' << FormatMetric(r.msssim) << ','
        << FormatMetric(r.msssim_db);
    for (const auto& c : extra_cols) {
      const auto it = r.extra.find(c);
      out << ',' << FormatMetric(it == r.extra.end() ? std::nan("") : it->second);
    }
    out << '\n';
  }
}

std::vector<RdRecord> ReadRdCsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty csv");
  const auto header = SplitCsv(line);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  // msssim_db may be derived; the other core columns are required.
  for (const char* req : {"codec", "image", "bpp", "psnr_db", "msssim"}) {
    if (!col.count(req)) {
      throw ConfigError(source + ": missing column '" + req + "'");
    }
  }
  std::vector<RdRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " columns, got " +
                        std::to_string(cells.size()));
    }
    RdRecord r;
    try {
      r.codec = cells[col["codec"]];
      r.image = cells[col["image"]];
      r.bpp = ParseMetric(cells[col["bpp"]]);
      r.psnr_db = ParseMetric(cells[col["psnr_db"]]);
      r.msssim = ParseMetric(cells[col["msssim"]]);
      if (col.count("msssim_db")) {
        r.msssim_db = ParseMetric(cells[col["msssim_db"]]);
      } else {
        r.msssim_db = r.msssim >= 1.0 ? std::numeric_limits<double>::infinity()
                                      : -10.0 * std::log10(1.0 - r.msssim);
      }
      for (size_t i = 0; i < header.size(); ++i) {
        if (std::find(kCoreColumns.begin(), kCoreColumns.end(), header[i]) ==
            kCoreColumns.end()) {
          r.extra[header[i]] = ParseMetric(cells[i]);
        }
      }
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RdRecord> ReadRdCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ReadRdCsv(in, path);
}

std::vector<AveragedPoint> AverageCurves(const std::vector<RdRecord>& records,
                                         const std::string& dataset) {
  std::vector<std::string> codecs;
  std::map<std::string, std::map<std::string, std::vector<const RdRecord*>>> by;
  std::map<std::string, std::vector<std::string>> image_order;
  for (const auto& r : records) {
    if (!by.count(r.codec)) codecs.push_back(r.codec);
    auto& per_image = by[r.codec];
    if (!per_image.count(r.image)) image_order[r.codec].push_back(r.image);
    per_image[r.image].push_back(&r);
  }
  std::vector<AveragedPoint> out;
  for (const auto& codec : codecs) {
    auto& per_image = by[codec];
    const auto& images = image_order[codec];
    const size_t levels = per_image[images.front()].size();
    for (const auto& img : images) {
      auto& rows = per_image[img];
      if (rows.size() != levels) {
        throw EvaluationError("codec '" + codec + "' has " +
                              std::to_string(rows.size()) + " points for '" +
                              img + "' but " + std::to_string(levels) +
                              " for '" + images.front() + "'");
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [](const RdRecord* a, const RdRecord* b) {
                         return a->bpp < b->bpp;
                       });
    }
    for (size_t k = 0; k < levels; ++k) {
      AveragedPoint p;
      p.codec = codec;
      p.rank = static_cast<int>(k);
      p.images = static_cast<int>(images.size());
      p.mean.codec = codec;
      p.mean.image = dataset;
      uint64_t bits = 0;
      int64_t pixels = 0;
      bool sized = true;
      std::map<std::string, double> extra_sum;
      for (const auto& img : images) {
        const RdRecord& r = *per_image[img][k];
        p.mean.bpp += r.bpp;
        p.mean.psnr_db += r.psnr_db;
        p.mean.msssim += r.msssim;
        p.mean.msssim_db += r.msssim_db;
        for (const auto& [name, v] : r.extra) extra_sum[name] += v;
        sized = sized && r.pixels > 0;
        bits += r.bits;
        pixels += r.pixels;
      }
      const double n = static_cast<double>(images.size());
      p.mean.bpp /= n;
      p.mean.psnr_db /= n;
      p.mean.msssim /= n;
      p.mean.msssim_db /= n;
      for (auto& [name, v] : extra_sum) p.mean.extra[name] = v / n;
      p.pooled_bpp = sized ? static_cast<double>(bits) / static_cast<double>(pixels)
                           : std::nan("");
      p.diverges = sized && std::abs(p.pooled_bpp - p.mean.bpp) >
                                kBppDivergence * p.mean.bpp;
      out.push_back(std::move(p));
    }
  }
  return out;
}

RdCurve CurveFromPoints(const std::vector<AveragedPoint>& points,
                        const std::string& codec, const std::string& column) {
  DistortionMetric metric = DistortionMetric::kPsnrDb;
  if (column == "msssim") metric = DistortionMetric::kMsSsim;
  if (column == "msssim_db") metric = DistortionMetric::kMsSsimDb;
  std::vector<RdPoint> pts;
  for (const auto& p : points) {
    if (p.codec == codec) pts.push_back({p.mean.bpp, p.mean.Metric(column)});
  }
  if (pts.empty()) throw ConfigError("no points for codec '" + codec + "'");
  return RdCurve::Make(codec, metric, std::move(pts));
}

std::vector<BdRow> BdRateTable(const std::vector<AveragedPoint>& anchor,
                               const std::string& anchor_codec,
                               const std::vector<AveragedPoint>& test,
                               const std::string& dataset,
                               const std::string& column,
                               std::optional<std::pair<double, double>> range) {
  const bool has_anchor = std::any_of(
      anchor.begin(), anchor.end(),
      [&](const AveragedPoint& p) { return p.codec == anchor_codec; });
  if (!has_anchor) {
    throw ConfigError("anchor codec '" + anchor_codec + "' has no RD points");
  }
  const RdCurve anchor_curve = CurveFromPoints(anchor, anchor_codec, column);
  std::vector<BdRow> rows;
  std::vector<std::string> seen;
  for (const auto& p : test) {
    if (std::find(seen.begin(), seen.end(), p.codec) != seen.end()) continue;
    seen.push_back(p.codec);
    const RdCurve curve = CurveFromPoints(test, p.codec, column);
    BdRow row;
    row.codec = p.codec;
    row.dataset = dataset;
    row.range_lo = range ? range->first : std::nan("");
    row.range_hi = range ? range->second : std::nan("");
    row.bd_rate_pct = BdRate(anchor_curve, curve, range).percent;
    rows.push_back(row);
  }
  return rows;
}

void WriteBdCsv(std::ostream& out, const std::vector<BdRow>& rows) {
  out << kBdCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.codec << ',' << r.dataset << ',' << FormatMetric(r.range_lo) << ','
        << FormatMetric(r.range_hi) << ',' << FormatMetric(r.bd_rate_pct)
        << '\n';
  }
}

void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (size_t i; !failed && (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int ResolveThreads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("C2F_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("C2F_THREADS is not a positive integer: ") + env);
  }
  return 1;
}

}  // namespace c2f
