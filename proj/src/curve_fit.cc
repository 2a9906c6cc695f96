// Copyright 2026 The Authors.
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

#include "prefcache/curve_fit.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace prefcache {
namespace {

constexpr int kMaxIterations = 500;
constexpr int kGridStarts = 27;

using Params = std::vector<double>;

// Partial derivatives of the model with respect to each parameter.
void Gradient(CurveFamily family, const Params& p, double x, double* grad) {
  switch (family) {
    case CurveFamily::kZipf: {
      const double t = std::pow(x, -p[1]);
      grad[0] = t;
      grad[1] = -p[0] * t * std::log(x);
      return;
    }
    case CurveFamily::kWeibull: {
      const double u = std::pow(x, p[1]);
      const double f = p[0] * p[1] * std::pow(x, p[1] - 1.0) * std::exp(-p[0] * u);
      grad[0] = f * (1.0 / p[0] - u);
      grad[1] = f * (1.0 / p[1] + std::log(x) * (1.0 - p[0] * u));
      return;
    }
    case CurveFamily::kExponential: {
      const double e = std::exp(-p[1] * x);
      grad[0] = e;
      grad[1] = -p[0] * x * e;
      return;
    }
    case CurveFamily::kPower: {
      const double t = std::pow(x, p[1]);
      grad[0] = t;
      grad[1] = p[0] * t * std::log(x);
      grad[2] = 1.0;
      return;
    }
    case CurveFamily::kLog:
      grad[0] = std::log(p[1] * x);
      grad[1] = p[0] / p[1];
      return;
  }
}

double SumSquares(std::span<const CurvePoint> points, CurveFamily family,
                  const Params& p) {
  double s = 0.0;
  for (const auto& pt : points) {
    const double r = pt.y - EvaluateCurve(family, p, pt.x);
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Solves the n x n system in place with partial pivoting.
bool Solve(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0 || !std::isfinite(a[pivot * n + col])) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return true;
}

// Levenberg-Marquardt damped Gauss-Newton. Returns the final sum of squares.
double Refine(std::span<const CurvePoint> points, CurveFamily family, Params& p) {
  const int n = ParameterCount(family);
  double cost = SumSquares(points, family, p);
  if (!std::isfinite(cost)) return cost;
  double lambda = 1e-3;
  std::vector<double> jtj(n * n), jtr(n), grad(n), delta;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (const auto& pt : points) {
      Gradient(family, p, pt.x, grad.data());
      const double r = pt.y - EvaluateCurve(family, p, pt.x);
      for (int i = 0; i < n; ++i) {
        jtr[i] += grad[i] * r;
        for (int j = 0; j < n; ++j) jtj[i * n + j] += grad[i] * grad[j];
      }
    }
    bool accepted = false;
    while (lambda < 1e16) {
      std::vector<double> damped = jtj;
      for (int i = 0; i < n; ++i) {
        damped[i * n + i] += lambda * std::max(jtj[i * n + i], 1e-300);
      }
      if (Solve(damped, jtr, n, delta)) {
        Params trial = p;
        for (int i = 0; i < n; ++i) trial[i] += delta[i];
        const double trial_cost = SumSquares(points, family, trial);
        if (trial_cost < cost) {
          const double improvement = cost - trial_cost;
          p = std::move(trial);
          cost = trial_cost;
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          if (improvement <= 1e-15 * cost) return cost;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return cost;
}

// Least-squares line y = intercept + slope * x.
bool LinearRegression(const std::vector<double>& xs, const std::vector<double>& ys,
                      double& intercept, double& slope) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return false;
  slope = (n * sxy - sx * sy) / det;
  intercept = (sy - slope * sx) / n;
  return true;
}

std::vector<Params> InitialGuesses(std::span<const CurvePoint> points,
                                   CurveFamily family) {
  std::vector<Params> starts;
  switch (family) {
    case CurveFamily::kZipf:
    case CurveFamily::kExponential: {
      std::vector<double> xs, ys;
      for (const auto& pt : points) {
        xs.push_back(family == CurveFamily::kZipf ? std::log(pt.x) : pt.x);
        ys.push_back(std::log(pt.y));
      }
      double intercept = 0.0, slope = 0.0;
      if (LinearRegression(xs, ys, intercept, slope)) {
        starts.push_back({std::exp(intercept), -slope});
      } else {
        starts.push_back({points[0].y, 0.0});
      }
      break;
    }
    case CurveFamily::kPower:
      // For a fixed exponent the model is linear in (a, c).
      for (int i = 0; i < kGridStarts; ++i) {
        const double b = -2.0 + (i + 0.5) * 4.0 / kGridStarts;
        std::vector<double> xs, ys;
        for (const auto& pt : points) {
          xs.push_back(std::pow(pt.x, b));
          ys.push_back(pt.y);
        }
        double c = 0.0, a = 0.0;
        if (LinearRegression(xs, ys, c, a)) starts.push_back({a, b, c});
      }
      break;
    case CurveFamily::kLog:
      for (int i = 0; i < kGridStarts; ++i) {
        const double b = std::pow(10.0, -4.0 + 8.0 * i / (kGridStarts - 1));
        double num = 0.0, den = 0.0;
        for (const auto& pt : points) {
          const double l = std::log(b * pt.x);
          num += pt.y * l;
          den += l * l;
        }
        if (den > 0.0) starts.push_back({num / den, b});
      }
      break;
    case CurveFamily::kWeibull: {
      constexpr std::array<double, 9> kShapes = {0.2, 0.35, 0.5, 0.7, 1.0,
                                                 1.4, 2.0,  3.0, 5.0};
      for (double b : kShapes) {
        double mean_u = 0.0;
        for (const auto& pt : points) mean_u += std::pow(pt.x, b);
        mean_u /= static_cast<double>(points.size());
        for (double scale : {0.1, 1.0, 10.0}) starts.push_back({scale / mean_u, b});
      }
      break;
    }
  }
  return starts;
}

}  // namespace

std::string_view CurveFamilyName(CurveFamily family) {
  switch (family) {
    case CurveFamily::kZipf:
      return "zipf";
    case CurveFamily::kWeibull:
      return "weibull";
    case CurveFamily::kExponential:
      return "exponential";
    case CurveFamily::kPower:
      return "power";
    case CurveFamily::kLog:
      return "log";
  }
  return "unknown";
}

absl::StatusOr<CurveFamily> ParseCurveFamily(std::string_view name) {
  for (CurveFamily f : {CurveFamily::kZipf, CurveFamily::kWeibull,
                        CurveFamily::kExponential, CurveFamily::kPower,
                        CurveFamily::kLog}) {
    if (CurveFamilyName(f) == name) return f;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown curve family '", std::string(name), "'"));
}

int ParameterCount(CurveFamily family) {
  return family == CurveFamily::kPower ? 3 : 2;
}

double EvaluateCurve(CurveFamily family, std::span<const double> p, double x) {
  switch (family) {
    case CurveFamily::kZipf:
      return p[0] * std::pow(x, -p[1]);
    case CurveFamily::kWeibull:
      return p[0] * p[1] * std::pow(x, p[1] - 1.0) * std::exp(-p[0] * std::pow(x, p[1]));
    case CurveFamily::kExponential:
      return p[0] * std::exp(-p[1] * x);
    case CurveFamily::kPower:
      return p[0] * std::pow(x, p[1]) + p[2];
    case CurveFamily::kLog:
      return p[0] * std::log(p[1] * x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double RSquared(std::span<const CurvePoint> points, CurveFamily family,
                std::span<const double> params, bool* defined) {
  double mean = 0.0;
  for (const auto& pt : points) mean += pt.y;
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (const auto& pt : points) {
    ss_tot += (pt.y - mean) * (pt.y - mean);
    const double r = pt.y - EvaluateCurve(family, params, pt.x);
    ss_res += r * r;
  }
  if (defined != nullptr) *defined = ss_tot > 0.0;
  if (ss_tot == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - ss_res / ss_tot;
}

absl::StatusOr<FitResult> FitCurve(std::span<const CurvePoint> points,
                                   CurveFamily family) {
  const int n_params = ParameterCount(family);
  if (static_cast<int>(points.size()) < n_params + 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(CurveFamilyName(family)), " fit needs at least ", n_params + 1, " points, got ",
        points.size()));
  }
  const bool needs_positive_x = family != CurveFamily::kExponential;
  const bool needs_positive_y =
      family == CurveFamily::kZipf || family == CurveFamily::kExponential;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) {
      return absl::InvalidArgumentError("non-finite point");
    }
    if (needs_positive_x && pt.x <= 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat(std::string(CurveFamilyName(family)), " fit needs positive x"));
    }
    if (needs_positive_y && pt.y <= 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat(std::string(CurveFamilyName(family)), " fit needs positive y"));
    }
  }

  FitResult best;
  best.family = family;
  double best_cost = std::numeric_limits<double>::infinity();
  for (Params start : InitialGuesses(points, family)) {
    const double cost = Refine(points, family, start);
    if (cost < best_cost) {
      best_cost = cost;
      best.params = start;
    }
  }
  if (best.params.empty()) {
    return absl::InternalError(
        absl::StrCat("no usable starting point for the ", std::string(CurveFamilyName(family)), " fit"));
  }
  best.r_squared = RSquared(points, family, best.params, &best.r_squared_defined);
  return best;
}

}  // namespace prefcache
