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

#include "tsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsense/error.hpp"

namespace tsense::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("variance needs two or more values");
    const double mu = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(x.size() - 1);
}

double rms_error(std::span<const double> x, double truth) {
    if (x.empty()) throw InvalidArgument("rms of an empty sample");
    double ss = 0.0;
    for (double v : x) ss += (v - truth) * (v - truth);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InvalidArgument("KS statistic of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_band(int n, double alpha) {
    if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("ks_band: bad arguments");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

namespace {
std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}
}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two equal-length samples");
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace tsense::stats
