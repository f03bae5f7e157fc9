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

#include "tsense/heterodyne.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tsense/error.hpp"

namespace tsense {

long preliminary_size(long n, double q) {
    if (n < 1) throw InvalidArgument("preliminary_size needs n >= 1");
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("schedule exponent must lie in (0, 1)");
    const double x = std::pow(static_cast<double>(n), q);
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * x) return std::max(1L, static_cast<long>(nearest));
    return std::max(1L, static_cast<long>(std::ceil(x)));
}

std::vector<HeterodyneSample> sample_heterodyne(const ChannelParams& p, long count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample_heterodyne needs count >= 1");
    if (!(p.theta >= 0.0 && p.theta <= 1.0) || p.n_s < 0.0 || !(p.n_b > 0.0))
        throw InvalidArgument("invalid channel for heterodyne sampling");
    const double amp = std::sqrt(p.theta * p.n_s);
    const double mean_a = amp * std::cos(p.gamma), mean_b = amp * std::sin(p.gamma);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(p.n_b + 0.5));
    std::vector<HeterodyneSample> out(static_cast<std::size_t>(count));
    for (auto& s : out) {
        s.a = mean_a + noise(rng);
        s.b = mean_b + noise(rng);
    }
    return out;
}

PreliminaryEstimate mle_preliminary(std::span<const HeterodyneSample> samples, double n_s) {
    if (samples.empty()) throw InvalidArgument("mle_preliminary needs at least one sample");
    if (!(n_s > 0.0)) throw InvalidArgument("mle_preliminary needs n_s > 0");
    double sa = 0.0, sb = 0.0;
    for (const auto& s : samples) {
        sa += s.a;
        sb += s.b;
    }
    const double scale = 1.0 / (static_cast<double>(samples.size()) * std::sqrt(n_s));
    const double a = sa * scale, b = sb * scale;
    PreliminaryEstimate e;
    e.theta_p = a * a + b * b;
    e.n_used = static_cast<int>(samples.size());
    if (a == 0.0 && b == 0.0) {
        e.gamma_hat = 0.0;
        e.degenerate = true;
    } else {
        e.gamma_hat = wrap_phase(std::atan2(b, a));
    }
    return e;
}

PreliminaryEstimate clamp_to_gamma_space(const PreliminaryEstimate& e, double gamma_lo) {
    if (!(gamma_lo > 0.0 && gamma_lo <= 1.0)) throw InvalidArgument("parameter-space endpoint must lie in (0, 1]");
    PreliminaryEstimate out = e;
    out.theta_p = std::clamp(e.theta_p, gamma_lo, 1.0);
    return out;
}

}  // namespace tsense
