// Copyright 2026 The tsense Authors
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

/**
 * @file
 * Small statistics toolkit for the Monte Carlo harness.
 */
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tsense::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
/// sqrt(mean((x - truth)^2)).
double rms_error(std::span<const double> x, double truth);

double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic critical value c(alpha) / sqrt(n), c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_band(int n, double alpha);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace tsense::stats
