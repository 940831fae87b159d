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

#include "c2f/bd_rate.h"

#include <algorithm>
#include <cmath>

#include "c2f/errors.h"

namespace c2f {

const char* ToString(DistortionMetric m) {
  switch (m) {
    case DistortionMetric::kPsnrDb:
      return "psnr_db";
    case DistortionMetric::kMsSsim:
      return "msssim";
    case DistortionMetric::kMsSsimDb:
      return "msssim_db";
  }
  return "?";
}

RdCurve RdCurve::Make(std::string codec, DistortionMetric metric,
                      std::vector<RdPoint> points) {
  std::sort(points.begin(), points.end(),
            [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bpp > 0.0) || !std::isfinite(points[i].bpp)) {
      throw EvaluationError("curve '" + codec + "' has a non-positive bpp");
    }
    if (!std::isfinite(points[i].distortion)) {
      throw EvaluationError("curve '" + codec + "' has a non-finite " +
                            ToString(metric) + " value");
    }
    if (i > 0 && points[i].bpp == points[i - 1].bpp) {
      throw EvaluationError("curve '" + codec + "' repeats bpp " +
                            std::to_string(points[i].bpp));
    }
  }
  return {std::move(codec), metric, std::move(points)};
}

namespace {

int Sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw ContractError("pchip needs at least two knots of matching size");
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw ContractError("pchip knots must increase");
  }
  std::vector<double> h(n - 1), m(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    m[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = m[0];
    return;
  }
  for (size_t k = 1; k + 1 < n; ++k) {
    if (Sign(m[k - 1]) * Sign(m[k]) > 0) {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
  }
  auto end_slope = [](double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (Sign(d) != Sign(m0)) {
      d = 0.0;
    } else if (Sign(m0) != Sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
      d = 3.0 * m0;
    }
    return d;
  };
  d_[0] = end_slope(h[0], h[1], m[0], m[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

size_t Pchip::Segment(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t k = static_cast<size_t>(it - x_.begin());
  return std::clamp<size_t>(k == 0 ? 0 : k - 1, 0, x_.size() - 2);
}

double Pchip::operator()(double x) const {
  const size_t k = Segment(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * d_[k] +
         (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
}

double Pchip::SegmentAntiderivative(size_t k, double s) const {
  const double h = x_[k + 1] - x_[k];
  const double m = (y_[k + 1] - y_[k]) / h;
  const double c0 = y_[k];
  const double c1 = d_[k];
  const double c2 = (3.0 * m - 2.0 * d_[k] - d_[k + 1]) / h;
  const double c3 = (d_[k] + d_[k + 1] - 2.0 * m) / (h * h);
  return s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)));
}

double Pchip::Integral(double a, double b) const {
  if (a > b) return -Integral(b, a);
  if (a < x_.front() || b > x_.back()) {
    throw ContractError("pchip integral outside the knot range");
  }
  const size_t ka = Segment(a), kb = Segment(b);
  if (ka == kb) {
    return SegmentAntiderivative(ka, b - x_[ka]) -
           SegmentAntiderivative(ka, a - x_[ka]);
  }
  double total = SegmentAntiderivative(ka, x_[ka + 1] - x_[ka]) -
                 SegmentAntiderivative(ka, a - x_[ka]);
  for (size_t k = ka + 1; k < kb; ++k) {
    total += SegmentAntiderivative(k, x_[k + 1] - x_[k]);
  }
  total += SegmentAntiderivative(kb, b - x_[kb]);
  return total;
}

namespace {

struct LogRateFit {
  Pchip fit;
  double d_lo, d_hi;
};

LogRateFit FitCurve(const RdCurve& c, const std::string& pair) {
  if (c.points.size() < kBdRateMinPoints) {
    throw EvaluationError("curve '" + c.codec + "' has " +
                          std::to_string(c.points.size()) +
                          " points, bd-rate needs at least " +
                          std::to_string(kBdRateMinPoints) + " (" + pair + ")");
  }
  std::vector<RdPoint> pts = c.points;
  std::sort(pts.begin(), pts.end(), [](const RdPoint& a, const RdPoint& b) {
    return a.distortion < b.distortion;
  });
  std::vector<double> d, r;
  for (const RdPoint& p : pts) {
    if (!d.empty() && !(p.distortion > d.back())) {
      throw EvaluationError("curve '" + c.codec + "' repeats a distortion "
                            "value (" + pair + ")");
    }
    d.push_back(p.distortion);
    r.push_back(std::log2(p.bpp));
  }
  for (size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) {
      throw EvaluationError("curve '" + c.codec + "' is not monotone: rate "
                            "does not rise with quality (" + pair + ")");
    }
  }
  return {Pchip(d, r), d.front(), d.back()};
}

// Distortion at which a monotone increasing fit reaches `target` log-rate,
// clamped to the fit's domain.
double InvertFit(const Pchip& f, double target) {
  double lo = f.x_min(), hi = f.x_max();
  if (target <= f(lo)) return lo;
  if (target >= f(hi)) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BdRateResult BdRate(const RdCurve& anchor, const RdCurve& test,
                    std::optional<std::pair<double, double>> bpp_range) {
  const std::string pair = "anchor '" + anchor.codec + "', test '" + test.codec + "'";
  if (anchor.metric != test.metric) {
    throw EvaluationError(std::string("curves use different metrics: ") +
                          ToString(anchor.metric) + " vs " +
                          ToString(test.metric) + " (" + pair + ")");
  }
  const LogRateFit a = FitCurve(anchor, pair);
  const LogRateFit t = FitCurve(test, pair);
  double lo = std::max(a.d_lo, t.d_lo);
  double hi = std::min(a.d_hi, t.d_hi);
  if (bpp_range) {
    const auto [r_lo, r_hi] = *bpp_range;
    if (!(r_lo > 0.0 && r_lo < r_hi)) {
      throw EvaluationError("bpp range must satisfy 0 < lo < hi");
    }
    const double l2lo = std::log2(r_lo), l2hi = std::log2(r_hi);
    lo = std::max({lo, InvertFit(a.fit, l2lo), InvertFit(t.fit, l2lo)});
    hi = std::min({hi, InvertFit(a.fit, l2hi), InvertFit(t.fit, l2hi)});
  }
  if (!(hi > lo)) {
    throw EvaluationError("no overlapping distortion interval between " + pair);
  }
  const double diff =
      (t.fit.Integral(lo, hi) - a.fit.Integral(lo, hi)) / (hi - lo);
  return {(std::exp2(diff) - 1.0) * 100.0, lo, hi};
}

std::optional<std::pair<double, double>> BppRangePreset(const std::string& name) {
  if (name == "kodak") return std::make_pair(0.4, 1.15);
  if (name == "tecnick") return std::make_pair(0.3, 0.6);
  if (name == "clic") return std::make_pair(0.3, 0.9);
  return std::nullopt;
}

}  // namespace c2f
