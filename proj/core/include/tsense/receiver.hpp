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
 * Refinement-stage receiver: symmetric logarithmic derivative of the output
 * state, the photon-count p.m.f. after the receiver squeezer, its
 * transmittance derivative, classical Fisher information and the choice of
 * receiver squeeze.
 *
 * The receiver applies U_R(-gamma_hat), then S^dag(omega), then counts
 * photons in both modes:
 *   p(k,m) = <k,m| S^dag(omega) U_R(-gamma_hat) sigma U_R(gamma_hat) S(omega) |k,m>.
 */
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "tsense/fock.hpp"
#include "tsense/gaussian.hpp"
#include "tsense/sectors.hpp"

namespace tsense {

struct ReceiverConfig {
    SqueezeParams omega{0.0};
    double gamma_hat = 0.0;
    FockCutoff cutoff{};

    void validate() const;
};

struct PmfTable {
    Eigen::MatrixXd probs;  ///< probs(k, m) for k, m in [0, K]
    double tail_mass = 0.0;
    double theta = 0.0;
    ReceiverConfig config{};

    int per_mode_max() const { return static_cast<int>(probs.rows()) - 1; }
};

/// Symmetric logarithmic derivative of a dense state.
struct SldResult {
    TwoModeOperator lambda_op;
    std::vector<double> eigenvalues;  ///< ascending
    Eigen::MatrixXcd eigenvectors;    ///< column i spans the i-th projector
    double qfi = 0.0;                 ///< tr(sigma Lambda^2)
    double guarded_fraction = 0.0;    ///< share of element pairs dropped by the rank guard
    bool rank_deficient = false;      ///< guarded_fraction > 10%

    /// Rank-1 projector onto the i-th eigenvector of the SLD.
    TwoModeOperator projector(int i) const;
};

/// Same quantities for a sector-diagonal state; eigen-data stays per block.
struct SectorSld {
    SectorMatrix lambda;
    double qfi = 0.0;
    double guarded_fraction = 0.0;
};

SldResult sld_operator(const TwoModeOperator& sigma, const TwoModeOperator& dsigma);
SectorSld sld_sectors(const SectorMatrix& sigma, const SectorMatrix& dsigma);

enum class PmfRoute {
    ExplicitSums,  ///< term-by-term triple sum over pair counts
    Sandwich,      ///< block products of squeezer and phase matrices
};

/// Smallest working cutoff W >= K + 4 at which the receiver p.m.f. on
/// [0, K]^2 is stable (1e-9 relative per cell) against enlarging W, checked
/// at channel.theta and at full transmittance. Depends on the channel only
/// through its template, so p.m.f. tables at neighbouring theta share W.
int receiver_work_cutoff(const ReceiverConfig& config, const ChannelParams& channel);

/// p.m.f. when the true state is the channel output at `theta` (channel.gamma
/// is the state phase). Throws CutoffTooSmall when the tail mass exceeds
/// config.cutoff.tail_tol and RouteDisagreement is never raised here.
PmfTable pmf_tms_pnr(double theta, const ReceiverConfig& config, const ChannelParams& channel,
                     PmfRoute route = PmfRoute::Sandwich);

/// Route A against route B on the same inputs; throws RouteDisagreement when
/// the largest entry gap exceeds 1e-6 and returns the gap otherwise.
double pmf_route_gap(double theta, const ReceiverConfig& config, const ChannelParams& channel);

/// d p(k,m) / d theta from the loss master equation applied to the state.
Eigen::MatrixXd pmf_theta_derivative(double theta, const ReceiverConfig& config, const ChannelParams& channel);

/// sum over p > 1e-14 of (dp)^2 / p.
FisherInfo classical_fisher_info(const Eigen::MatrixXd& pmf, const Eigen::MatrixXd& dpmf);
FisherInfo classical_fisher_info(const PmfTable& pmf, const Eigen::MatrixXd& dpmf);

/// State fixed, receiver squeeze scanned: reuses the rotated state and its
/// derivative across evaluations.
class ReceiverScan {
public:
    /// `state` holds the model transmittance and the state phase; the receiver
    /// corrects by gamma_hat. work_max <= 0 picks it automatically.
    ReceiverScan(const ChannelParams& state, double gamma_hat, const FockCutoff& cutoff, int work_max = 0);

    struct Point {
        double cfi = 0.0;
        double tail_mass = 0.0;
    };
    Point evaluate(double omega) const;
    Eigen::MatrixXd pmf(double omega) const;
    Eigen::MatrixXd dpmf(double omega) const;

    double qfi() const { return qfi_; }
    int work_max() const { return work_max_; }
    const SqueezedThermalForm& form() const { return form_; }

private:
    void project(double omega, Eigen::MatrixXd* p, Eigen::MatrixXd* dp) const;

    int grid_max_;
    int work_max_;
    SqueezedThermalForm form_;
    std::vector<Eigen::MatrixXd> state_re_;
    std::vector<Eigen::MatrixXd> deriv_re_;
    double qfi_ = 0.0;
};

struct OmegaSelection {
    SqueezeParams omega{0.0};
    double cfi = 0.0;
    double qfi = 0.0;
    double ratio = 0.0;
    int evaluations = 0;
    bool certified = false;  ///< ratio >= 0.99
    double bracket_lo = -2.0;
    double bracket_hi = 2.0;
    int work_max = 0;
};

/// Grid seed over [-2, 2] (41 points, widened on edge hits) followed by
/// golden-section refinement to 1e-6. Throws ExistenceFailure when the best
/// CFI stays below 0.9 J.
OmegaSelection select_omega_detailed(double theta_hat, double gamma_hat, const ChannelParams& channel_template,
                                     const FockCutoff& cutoff);
SqueezeParams select_omega(double theta_hat, double gamma_hat, const ChannelParams& channel_template,
                           const FockCutoff& cutoff);

struct LowerBoundReport {
    bool ok = true;
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    int bad_k = -1;
    int bad_m = -1;
    double worst_margin = 0.0;  ///< min over cells of p - bound

    explicit operator bool() const { return ok; }
};

/// p(k,m) >= r_{k,m} l3^(k+m) l2^-(k+m+1) on every retained cell, with
/// l2 >= 1 and 0 < l3 < 1. `form` describes the state the table was built
/// from; its phase is the true channel phase.
LowerBoundReport pmf_lower_bound_check(const PmfTable& pmf, const SqueezedThermalForm& form,
                                       const ReceiverConfig& config);

/// Receiver fixed, transmittance varied: the likelihood used by the
/// refinement stage. Not thread-safe; use one instance per trial.
class LikelihoodModel {
public:
    LikelihoodModel(const ReceiverConfig& config, const ChannelParams& channel_template, int work_max = 0);

    /// p.m.f. at theta quantised to 1e-9 (memoised).
    const Eigen::MatrixXd& probs(double theta);
    PmfTable table(double theta);

    int work_max() const { return work_max_; }
    int evaluations() const { return evaluations_; }
    const ReceiverConfig& config() const { return config_; }

    static double quantize(double theta) { return std::round(theta * 1e9) * 1e-9; }

private:
    Eigen::MatrixXd compute(double theta) const;

    ReceiverConfig config_;
    ChannelParams template_;
    int work_max_;
    std::vector<Eigen::MatrixXcd> receiver_cols_;
    std::map<std::int64_t, Eigen::MatrixXd> cache_;
    int evaluations_ = 0;
};

namespace testing_hooks {
/// Flips the sign of the squeeze used by the sandwich route so that the
/// route-agreement check can be seen to fail. Process-wide; test use only.
void set_sandwich_sign_flip(bool on);
bool sandwich_sign_flip();
}  // namespace testing_hooks

}  // namespace tsense
