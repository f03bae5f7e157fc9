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
 * Gaussian model of the lossy thermal-noise channel probed by a two-mode
 * squeezed vacuum, its squeezed-thermal normal form, the Fock-basis output
 * state, the loss derivative of that state and the quantum Fisher information
 * for the transmittance.
 *
 * Quadratures are x = a + a^dag and p = -i (a - a^dag), so the vacuum
 * covariance is the identity. Covariances are ordered (x_I, p_I, x_R, p_R).
 */
#pragma once

#include <Eigen/Dense>

#include "tsense/fock.hpp"
#include "tsense/sectors.hpp"

namespace tsense {

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

struct ChannelParams {
    double theta = 0.9;  ///< power transmittance, (0, 1]
    double gamma = 0.0;  ///< phase offset on the returned mode
    double n_s = 0.3;    ///< mean probe photons per mode
    double n_b = 0.4;    ///< mean background photons reaching the receiver

    /// Environment occupancy n_b / (1 - theta); infinite at theta = 1.
    double n_t() const;
    /// (1 - theta)(2 n_t + 1), finite at theta = 1.
    double added_noise() const { return 2.0 * n_b + 1.0 - theta; }
    void validate() const;

    bool operator==(const ChannelParams&) const = default;

    ChannelParams with_theta(double t) const {
        ChannelParams c = *this;
        c.theta = t;
        return c;
    }
    ChannelParams with_gamma(double g) const {
        ChannelParams c = *this;
        c.gamma = g;
        return c;
    }
};

struct GaussianState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();

    /// Smallest eigenvalue of cov + i Omega (negative when unphysical).
    double uncertainty_margin() const;
    void validate(double tol = 1e-10) const;
};

/// sigma = U_R(gamma) S^dag(zeta) (thermal N1 (x) thermal N2) S(zeta) U_R^dag(gamma).
struct SqueezedThermalForm {
    double zeta = 0.0;
    double n1 = 0.0;  ///< occupancy of the returned-mode thermal factor
    double n2 = 0.0;  ///< occupancy of the idler thermal factor
    double gamma = 0.0;

    double mu() const;
    double nu() const;
};

struct FisherInfo {
    double value = 0.0;
};

/// Covariance from <n_R>, <n_I> and the pair correlation c = <a_R a_I>.
GaussianState covariance_from_moments(double n_r, double n_i, cplx pair);

/// Idler / returned-probe covariance after the channel.
GaussianState output_covariance(const ChannelParams& p);

/// Closed-form normal form for states with covariance of the two-mode
/// squeezed-thermal shape. The squeeze is reported non-negative; the phase
/// absorbs the sign. Throws NonPhysicalState or ConvergenceFailure.
SqueezedThermalForm williamson_two_mode(const GaussianState& g);

GaussianState reconstruct_covariance(const SqueezedThermalForm& form);

/// N1^s N2^t / ((1+N1)^(s+1) (1+N2)^(t+1)).
double r_weight(int s, int t, const SqueezedThermalForm& form);

/// Probability mass of the thermal weights outside [0, w]^2.
double r_tail(const SqueezedThermalForm& form, int w);

/// Smallest W >= min_work at which the output state keeps all but 1e-12 of
/// its trace on [0, W]^2 (capped at 4 min_work + 60).
int state_work_cutoff(const SqueezedThermalForm& form, int min_work);

/// The output state on the working grid [0, W]^2, one block per sector.
SectorMatrix density_sectors(const SqueezedThermalForm& form, int work_max);

/// Output state cropped to the cutoff. Built on a larger working grid so the
/// cropped entries are converged; throws CutoffTooSmall when the trace falls
/// short of 1 - tail_tol.
TwoModeOperator density_matrix_fock(const SqueezedThermalForm& form, const FockCutoff& cutoff);

/// d sigma / d theta = -(1/(2 theta)) [(n_b+1) L[a_R] + n_b L[a_R^dag]] sigma
/// with L[c] rho = 2 c rho c^dag - c^dag c rho - rho c^dag c.
SectorMatrix loss_derivative(const SectorMatrix& sigma, double theta, double n_b);

/// Transmittance QFI from the SLD of the output state. The basis [0, W]^2
/// starts at the cutoff and grows until the state's trace has converged; the
/// truncated-space SLD is unreliable near the grid edge otherwise.
FisherInfo qfi_transmittance(const ChannelParams& p, const FockCutoff& cutoff);

}  // namespace tsense
