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
 * One two-stage estimation run: heterodyne preliminary batch, receiver
 * construction at the preliminary estimate, photon-count sampling and the
 * refinement maximum-likelihood estimate.
 */
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsense/heterodyne.hpp"
#include "tsense/receiver.hpp"

namespace tsense {

struct ThetaSpace {
    double lo = 0.5;
    double hi = 1.0;

    void validate() const;
    bool operator==(const ThetaSpace&) const = default;
};

/// Phase assumed by the refinement likelihood for the state.
enum class LikelihoodPhase {
    True,    ///< the channel's true phase, as in the refinement p.m.f.
    PlugIn,  ///< the preliminary phase estimate
};

struct RunConfig {
    ChannelParams channel{};
    long n_total = 4000;
    double schedule_q = 0.5;
    FockCutoff cutoff{20, 1e-8};
    std::uint64_t seed = 1;
    ThetaSpace theta_space{};
    LikelihoodPhase phase_model = LikelihoodPhase::True;

    long f_n() const { return preliminary_size(n_total, schedule_q); }
    /// One coherent batch serves both theta and the phase: 2 f(n) modes.
    long heterodyne_count() const { return 2 * f_n(); }
    long refine_count() const { return n_total - heterodyne_count(); }
    void validate() const;
};

enum class TrialStatus { Ok, ExistenceFailure, CutoffFailure, Failed };

const char* to_string(TrialStatus s);
TrialStatus trial_status_from_string(const std::string& s);

struct TrialRecord {
    long n_total = 0;
    long f_n = 0;
    long n_refine = 0;
    std::uint64_t seed = 0;
    PreliminaryEstimate prelim{};  ///< unclamped
    double theta_p_clamped = 0.0;
    double omega = 0.0;
    double cfi_ratio = 0.0;  ///< CFI / J at the model theta_p_clamped
    bool omega_certified = false;
    int omega_evals = 0;
    int work_max = 0;
    int cutoff_used = 0;  ///< outcome grid the counts were drawn on
    double theta_r = 0.0;
    double loglik_at_max = 0.0;
    bool boundary = false;
    int mle_evals = 0;
    double tail_mass = 0.0;  ///< of the p.m.f. the counts were drawn from
    TrialStatus status = TrialStatus::Ok;
    std::string message;

    bool ok() const { return status == TrialStatus::Ok; }
    bool operator==(const TrialRecord&) const = default;
};

/// (k, m) outcome counts on [0, K]^2.
using CountHistogram = Eigen::MatrixXd;

/// Inverse-CDF draws over the row-major flattened table; draws that land in
/// the missing tail mass go to the most probable cell.
std::vector<std::pair<int, int>> sample_pnr(const PmfTable& pmf, long count, std::uint64_t seed);

CountHistogram histogram(const std::vector<std::pair<int, int>>& data, int per_mode_max);

double log_likelihood(const CountHistogram& counts, const Eigen::MatrixXd& probs);
double log_likelihood(const std::vector<std::pair<int, int>>& data, const Eigen::MatrixXd& probs);

struct RefineResult {
    double theta = 0.0;
    double loglik = 0.0;
    bool boundary = false;
    int evaluations = 0;
};

/// 33-point grid over the parameter space, then golden-section to 1e-7.
RefineResult refine_mle_detailed(const CountHistogram& counts, LikelihoodModel& model, const ThetaSpace& space);

double refine_mle(const std::vector<std::pair<int, int>>& data, const ReceiverConfig& config,
                  const ChannelParams& channel_template, const ThetaSpace& space);

/// Throws ExistenceFailure / CutoffTooSmall from the receiver stage. The
/// outcome grid starts at cfg.cutoff and may grow to twice that.
TrialRecord run_trial(const RunConfig& cfg);

/// Same trial; library errors become the record's status and message, and
/// the stages completed before the failure stay filled in.
TrialRecord run_trial_guarded(const RunConfig& cfg);

}  // namespace tsense
