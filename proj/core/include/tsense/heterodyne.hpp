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
 * Preliminary stage: coherent-state probe with heterodyne detection and the
 * closed-form joint estimates of transmittance and phase.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsense/gaussian.hpp"

namespace tsense {

struct HeterodyneSample {
    double a = 0.0;
    double b = 0.0;
};

struct PreliminaryEstimate {
    double theta_p = 0.0;
    double gamma_hat = 0.0;
    int n_used = 0;
    bool degenerate = false;  ///< both quadrature means vanished; gamma_hat forced to 0

    bool operator==(const PreliminaryEstimate&) const = default;
};

/// f(n) = ceil(n^q), with exact powers not rounded up by round-off.
long preliminary_size(long n, double q);

/// i.i.d. outcomes for a coherent probe of amplitude sqrt(n_s): each
/// quadrature is normal with mean sqrt(theta n_s) (cos gamma, sin gamma) and
/// variance n_b + 1/2.
std::vector<HeterodyneSample> sample_heterodyne(const ChannelParams& p, long count, std::uint64_t seed);

/// theta_p = A^2 + B^2, gamma_hat = atan2(B, A) with A, B the sample means
/// scaled by 1/sqrt(n_s).
PreliminaryEstimate mle_preliminary(std::span<const HeterodyneSample> samples, double n_s);

/// Clamps theta_p into [gamma_lo, 1].
PreliminaryEstimate clamp_to_gamma_space(const PreliminaryEstimate& e, double gamma_lo);

}  // namespace tsense
