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

// Least-squares fitting of the curve families used to summarize request
// statistics, scored by the coefficient of determination.

#ifndef PREFCACHE_CURVE_FIT_H_
#define PREFCACHE_CURVE_FIT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace prefcache {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

enum class CurveFamily {
  kZipf,         // a x^-beta; params {a, beta}
  kWeibull,      // a b x^(b-1) exp(-a x^b); params {a, b}
  kExponential,  // a exp(-b x); params {a, b}
  kPower,        // a x^b + c; params {a, b, c}
  kLog,          // a log(b x); params {a, b}
};

std::string_view CurveFamilyName(CurveFamily family);
absl::StatusOr<CurveFamily> ParseCurveFamily(std::string_view name);
int ParameterCount(CurveFamily family);

double EvaluateCurve(CurveFamily family, std::span<const double> params, double x);

struct FitResult {
  CurveFamily family = CurveFamily::kZipf;
  std::vector<double> params;
  // 1 - SS_res / SS_tot; NaN when the data are constant.
  double r_squared = 0.0;
  bool r_squared_defined = true;
};

// R^2 of an arbitrary prediction.
double RSquared(std::span<const CurvePoint> points, CurveFamily family,
                std::span<const double> params, bool* defined = nullptr);

// Deterministic fit: Zipf and exponential start from a log-space linear
// regression; power, log and Weibull run damped Gauss-Newton from 27 fixed
// starts and keep the best.
absl::StatusOr<FitResult> FitCurve(std::span<const CurvePoint> points,
                                   CurveFamily family);

}  // namespace prefcache

#endif  // PREFCACHE_CURVE_FIT_H_
